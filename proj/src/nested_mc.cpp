#include "dualstop/nested_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "dualstop/exact.hpp"
#include "dualstop/parallel.hpp"

namespace dualstop {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kChunk = 64;
constexpr std::size_t kMaxArenaNodes = 50'000'000;

void check_ceiling(const char* what, double predicted, const SampleBudget& budget)
{
    if (!std::isfinite(predicted) || predicted > 9.0e18) {
        std::ostringstream os;
        os << what << ": predicted simulator calls " << predicted << " cannot be counted";
        throw BudgetExceeded(os.str(), predicted, budget.max_calls.value_or(9.0e18));
    }
    if (budget.max_calls && predicted > *budget.max_calls) {
        std::ostringstream os;
        os << what << ": predicted simulator calls " << predicted << " exceed the ceiling " << *budget.max_calls;
        throw BudgetExceeded(os.str(), predicted, *budget.max_calls);
    }
}

// ---------------------------------------------------------------------------
// Strict recursion, following the algorithm listings line by line.

class StrictRecursion {
public:
    struct Workspace {
        std::vector<std::vector<double>> buf;  // one D x h path per level
        std::uint64_t calls = 0;
    };

    StrictRecursion(const StoppingProblem& p, int active)
        : p_(p), sim_(p.simulator()), d_(static_cast<std::size_t>(p.dim())), h_(active)
    {
    }

    [[nodiscard]] Workspace workspace(int k) const
    {
        Workspace ws;
        ws.buf.assign(static_cast<std::size_t>(k + 1), std::vector<double>(d_ * static_cast<std::size_t>(h_)));
        return ws;
    }

    [[nodiscard]] int active() const noexcept { return h_; }

    double g(int t, const double* path) const { return p_.payout(t, std::span<const double>(path, d_ * t)); }

    void draw(std::vector<double>& buf, int t, RandomStream& rng, Workspace& ws) const
    {
        sim_.extend(buf, t, h_, rng);
        ++ws.calls;
    }

    // B^k(t, gamma, eps, delta); gamma holds t columns.
    double Z(int k, int t, const double* gamma, double eps, double delta, const RandomStream& s, Workspace& ws) const
    {
        if (k == 1) return g(t, gamma);
        const int km = k - 1;
        const std::int64_t n = budget_N(eps / 4.0, delta / 4.0);
        auto& buf = ws.buf[static_cast<std::size_t>(k)];
        std::copy(gamma, gamma + d_ * t, buf.begin());

        double sum = 0.0;
        if (km == 1) {
            // B^1 at j <= t reads the prefix only, so its minimum is shared by every draw
            double prefix_min = kInf;
            for (int j = 1; j <= t; ++j) prefix_min = std::min(prefix_min, g(j, gamma));
            if (t == h_) {
                // every draw returns the prefix itself
                ws.calls += static_cast<std::uint64_t>(n);
                return g(t, gamma) - prefix_min;
            }
            for (std::int64_t i = 0; i < n; ++i) {
                auto si = s.child(static_cast<std::uint64_t>(i));
                draw(buf, t, si, ws);
                double m = prefix_min;
                for (int j = t + 1; j <= h_; ++j) m = std::min(m, g(j, buf.data()));
                sum += m;
            }
        } else {
            const double inner_eps = eps / 4.0;
            const double inner_delta = delta / (4.0 * static_cast<double>(n) * h_);
            for (std::int64_t i = 0; i < n; ++i) {
                auto si = s.child(static_cast<std::uint64_t>(i));
                draw(buf, t, si, ws);
                double m = kInf;
                for (int j = 1; j <= h_; ++j)
                    m = std::min(m, Z(km, j, buf.data(), inner_eps, inner_delta, si.child(static_cast<std::uint64_t>(j)), ws));
                sum += m;
            }
        }
        const double a3 = Z(km, t, gamma, eps / 2.0, delta / 2.0, s.child(static_cast<std::uint64_t>(n)), ws);
        return a3 - sum / static_cast<double>(n);
    }

    // One outer term of hB^k: min_j B^k(j, Y_[j]) on a fresh unconditioned path.
    double outer_term(int k, double eps, double delta, const RandomStream& s, Workspace& ws) const
    {
        auto& path = ws.buf[0];
        auto rng = s;
        draw(path, 0, rng, ws);
        double m = kInf;
        for (int j = 1; j <= h_; ++j)
            m = std::min(m, k == 1 ? g(j, path.data())
                                   : Z(k, j, path.data(), eps, delta, s.child(static_cast<std::uint64_t>(j)), ws));
        return m;
    }

private:
    const StoppingProblem& p_;
    const PathSimulator& sim_;
    std::size_t d_;
    int h_;
};

struct OuterResults {
    std::vector<double> terms;
    std::uint64_t calls = 0;
};

// Runs `term(i, workspace)` for i in [0, n) in fixed-size chunks; results
// depend only on i, never on the worker count.
template <class Term>
OuterResults run_outer(std::int64_t n, int workers, int depth, const StrictRecursion& rec, Term&& term)
{
    OuterResults out;
    out.terms.resize(static_cast<std::size_t>(n));
    const std::size_t chunks = (static_cast<std::size_t>(n) + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> calls(chunks, 0);
    parallel_for(chunks, workers, [&](std::size_t c) {
        auto ws = rec.workspace(depth);
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(static_cast<std::size_t>(n), lo + kChunk);
        for (std::size_t i = lo; i < hi; ++i) out.terms[i] = term(i, ws);
        calls[c] = ws.calls;
    });
    for (auto c : calls) out.calls += c;
    return out;
}

Estimate strict_Hk(const StoppingProblem& problem, int k, double eps, double delta, int workers, const RandomStream& s,
                   int active)
{
    StrictRecursion rec(problem, active);
    const std::int64_t n = budget_N(eps / 2.0, delta / 2.0);
    const double inner_delta = delta / (2.0 * static_cast<double>(n) * active);
    auto res = run_outer(n, workers, k, rec, [&](std::size_t i, StrictRecursion::Workspace& ws) {
        return rec.outer_term(k, eps / 2.0, inner_delta, s.child(i), ws);
    });
    const auto me = mean_and_error(res.terms);
    Estimate e;
    e.value = me.mean;
    e.std_error = me.std_error;
    e.eps = eps;
    e.delta = delta;
    e.mode = BudgetMode::PaperStrict;
    e.calls = res.calls;
    e.levels.push_back({k, me.mean, me.mean, me.std_error, n});
    return e;
}

// ---------------------------------------------------------------------------
// Practical engine: a sampled tree per outer path.
//
// A node that needs Z^L (L >= 2) below the active horizon draws m
// continuations to the horizon; the continuation nodes need Z^{L-1}. Then,
// level by level,
//   Z^{k+1}(x) = Z^k(x) - mean_c pmin^k(end of continuation c)
// with pmin^k the running minimum of Z^k from time 1, and
//   Z^{k+1}(x) = Z^k(x) - pmin^k(x) at the horizon itself.

class PracticalTree {
public:
    struct Node {
        int parent;
        int depth;
        int level;
        int gen;
        int buf;
        int first_cont;
        int conts;
    };

    PracticalTree(const StoppingProblem& p, const SampleBudget& b, int active)
        : p_(p), sim_(p.simulator()), budget_(b), d_(static_cast<std::size_t>(p.dim())), h_(active),
          stride_(d_ * static_cast<std::size_t>(active))
    {
    }

    std::uint64_t calls = 0;

    // Fills out[0..L) with pmin^k at the horizon of a fresh outer path.
    void outer(int level, RandomStream& rng, double* out)
    {
        reset();
        const int b = new_buffer();
        sim_.extend(buffer(b), 0, h_, rng);
        ++calls;
        for (int t = 1; t <= h_; ++t) nodes_.push_back({t - 2, t, level, 0, b, -1, 0});
        grow(rng);
        sweep(level);
        const auto K = static_cast<std::size_t>(level_cap_);
        for (int k = 1; k <= level; ++k) out[k - 1] = pm_[static_cast<std::size_t>(h_ - 1) * K + k - 1];
    }

    // Z^k at the prefix node (depth t).
    double rooted(int k, std::span<const double> prefix, int t, RandomStream& rng)
    {
        reset();
        const int b = new_buffer();
        std::copy(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(d_ * t), buffer(b).begin());
        for (int s = 1; s <= t; ++s) nodes_.push_back({s - 2, s, s == t ? k : std::max(1, k - 1), 0, b, -1, 0});
        grow(rng);
        sweep(k);
        return z_[static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(level_cap_) + k - 1];
    }

private:
    void reset()
    {
        nodes_.clear();
        paths_.clear();
    }

    int new_buffer()
    {
        const auto idx = paths_.size() / std::max<std::size_t>(stride_, 1);
        paths_.resize(paths_.size() + stride_);
        return static_cast<int>(idx);
    }

    std::span<double> buffer(int b) { return {paths_.data() + static_cast<std::size_t>(b) * stride_, stride_}; }

    void grow(RandomStream& rng)
    {
        for (std::size_t x = 0; x < nodes_.size(); ++x) {
            const Node node = nodes_[x];
            if (node.level < 2 || node.depth >= h_) continue;
            const int m = budget_.inner_at(node.gen);
            nodes_[x].first_cont = static_cast<int>(nodes_.size());
            nodes_[x].conts = m;
            const std::size_t len = static_cast<std::size_t>(h_ - node.depth);
            if (nodes_.size() + static_cast<std::size_t>(m) * len > kMaxArenaNodes)
                throw BudgetExceeded("practical estimator: sampled tree exceeds " + std::to_string(kMaxArenaNodes) + " nodes",
                                     static_cast<double>(nodes_.size()), static_cast<double>(kMaxArenaNodes));
            for (int c = 0; c < m; ++c) {
                const int b = new_buffer();
                auto dst = buffer(b);
                const auto src = buffer(node.buf);
                std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(d_ * node.depth), dst.begin());
                sim_.extend(dst, node.depth, h_, rng);
                ++calls;
                for (int j = node.depth + 1; j <= h_; ++j) {
                    const int parent = j == node.depth + 1 ? static_cast<int>(x) : static_cast<int>(nodes_.size()) - 1;
                    nodes_.push_back({parent, j, node.level - 1, node.gen + 1, b, -1, 0});
                }
            }
        }
    }

    void sweep(int K)
    {
        level_cap_ = K;
        const auto n = nodes_.size();
        const auto KK = static_cast<std::size_t>(K);
        z_.assign(n * KK, 0.0);
        pm_.assign(n * KK, 0.0);
        for (int k = 1; k <= K; ++k) {
            const std::size_t col = static_cast<std::size_t>(k - 1);
            for (std::size_t x = 0; x < n; ++x) {
                const Node& node = nodes_[x];
                if (node.level < k) continue;
                if (k == 1) {
                    z_[x * KK] = p_.payout(node.depth, std::span<const double>(paths_.data() + static_cast<std::size_t>(node.buf) * stride_, stride_));
                    continue;
                }
                double cm;
                if (node.conts == 0) {
                    cm = pm_[x * KK + col - 1];
                } else {
                    const std::size_t len = static_cast<std::size_t>(h_ - node.depth);
                    double s = 0.0;
                    for (int c = 0; c < node.conts; ++c) {
                        const std::size_t end = static_cast<std::size_t>(node.first_cont) + (static_cast<std::size_t>(c) + 1) * len - 1;
                        s += pm_[end * KK + col - 1];
                    }
                    cm = s / node.conts;
                }
                z_[x * KK + col] = z_[x * KK + col - 1] - cm;
            }
            for (std::size_t x = 0; x < n; ++x) {
                const Node& node = nodes_[x];
                if (node.level < k) continue;
                const double zx = z_[x * KK + col];
                pm_[x * KK + col] = node.parent < 0 ? zx : std::min(pm_[static_cast<std::size_t>(node.parent) * KK + col], zx);
            }
        }
    }

    const StoppingProblem& p_;
    const PathSimulator& sim_;
    const SampleBudget& budget_;
    std::size_t d_;
    int h_;
    std::size_t stride_;
    int level_cap_ = 1;
    std::vector<Node> nodes_;
    std::vector<double> paths_;
    std::vector<double> z_;
    std::vector<double> pm_;
};

// calls made below a node needing level L at depth t, generation g
class CallCounter {
public:
    CallCounter(const std::vector<int>& inner, int h) : inner_(inner), h_(h) {}

    double below(int L, int t, int g)
    {
        if (L < 2 || t >= h_) return 0.0;
        const int gc = std::min<int>(g, static_cast<int>(inner_.size()) - 1);
        auto key = std::make_tuple(L, t, gc);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        double s = 1.0;
        for (int j = t + 1; j <= h_; ++j) s += below(L - 1, j, gc + 1);
        const double m = inner_.empty() ? 1.0 : inner_[static_cast<std::size_t>(gc)];
        return memo_[key] = m * s;
    }

private:
    const std::vector<int>& inner_;
    int h_;
    std::map<std::tuple<int, int, int>, double> memo_;
};

int path_level(const std::vector<std::int64_t>& counts, std::int64_t i)
{
    int L = 0;
    while (L < static_cast<int>(counts.size()) && i < counts[static_cast<std::size_t>(L)]) ++L;
    return L;
}

void check_problem_for_mode(const StoppingProblem& problem, const SampleBudget& budget)
{
    budget.validate();
    if (budget.mode == BudgetMode::PaperStrict && !problem.normalized())
        throw DomainError("strict mode needs a normalized problem (payouts in [0,1]); '" + problem.name() + "' is not");
}

std::vector<std::int64_t> practical_counts(const SampleBudget& budget, int k)
{
    if (budget.outer.empty()) throw DomainError("practical mode needs outer sample counts");
    if (budget.outer.size() == 1) return std::vector<std::int64_t>(static_cast<std::size_t>(k), budget.outer[0]);
    if (static_cast<int>(budget.outer.size()) != k)
        throw DomainError("practical mode: expected 1 or " + std::to_string(k) + " outer counts, got " +
                          std::to_string(budget.outer.size()));
    return budget.outer;
}

}  // namespace

double practical_calls(const std::vector<std::int64_t>& counts, const std::vector<int>& inner, int active_horizon)
{
    CallCounter cc(inner, active_horizon);
    double total = 0.0;
    std::int64_t prev = 0;
    // paths with the same level form contiguous blocks
    for (int L = static_cast<int>(counts.size()); L >= 1; --L) {
        const std::int64_t hi = counts[static_cast<std::size_t>(L - 1)];
        if (hi <= prev) continue;
        double per_path = 1.0;
        for (int t = 1; t <= active_horizon; ++t) per_path += cc.below(L, t, 0);
        total += static_cast<double>(hi - prev) * per_path;
        prev = hi;
    }
    return total;
}

double practical_rooted_calls(int k, int t, const std::vector<int>& inner, int active_horizon)
{
    CallCounter cc(inner, active_horizon);
    double total = cc.below(k, t, 0);
    for (int s = 1; s < t; ++s) total += cc.below(std::max(1, k - 1), s, 0);
    return total;
}

Estimate practical_levels(const StoppingProblem& problem, const std::vector<std::int64_t>& counts,
                          const SampleBudget& budget, std::uint64_t seed, int active)
{
    budget.validate();
    if (counts.empty()) throw DomainError("practical mode needs at least one level");
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] < 1) throw DomainError("practical outer counts must be at least 1");
        if (k > 0 && counts[k] > counts[k - 1]) throw DomainError("practical outer counts must be nonincreasing in k");
    }
    if (active < 1 || active > problem.horizon()) throw DomainError("active horizon outside [1,T]");
    check_ceiling("practical estimator", practical_calls(counts, budget.inner, active), budget);

    const int K = static_cast<int>(counts.size());
    const auto KK = static_cast<std::size_t>(K);
    const std::int64_t n = counts[0];
    std::vector<double> x(static_cast<std::size_t>(n) * KK, 0.0);
    const std::size_t chunks = (static_cast<std::size_t>(n) + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> calls(chunks, 0);
    const RandomStream master(seed);

    parallel_for(chunks, budget.workers, [&](std::size_t c) {
        PracticalTree tree(problem, budget, active);
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(static_cast<std::size_t>(n), lo + kChunk);
        for (std::size_t i = lo; i < hi; ++i) {
            auto rng = master.child(i);
            tree.outer(path_level(counts, static_cast<std::int64_t>(i)), rng, x.data() + i * KK);
        }
        calls[c] = tree.calls;
    });

    Estimate e;
    e.mode = BudgetMode::Practical;
    e.eps = budget.eps;
    e.delta = budget.delta;
    e.seed = seed;
    for (auto cc : calls) e.calls += cc;

    double running = 0.0;
    std::vector<double> column;
    for (int k = 1; k <= K; ++k) {
        const auto nk = counts[static_cast<std::size_t>(k - 1)];
        column.resize(static_cast<std::size_t>(nk));
        for (std::int64_t i = 0; i < nk; ++i) column[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i) * KK + k - 1];
        const auto me = mean_and_error(column);
        running += me.mean;
        e.levels.push_back({k, me.mean, running, me.std_error, nk});
    }

    // E_K = sum_i W_i with W_i = sum_{k <= L_i} X_ik / n_k; blocks of equal L_i are iid
    double variance = 0.0;
    std::int64_t prev = 0;
    for (int L = K; L >= 1; --L) {
        const std::int64_t hi = counts[static_cast<std::size_t>(L - 1)];
        if (hi <= prev) continue;
        column.resize(static_cast<std::size_t>(hi - prev));
        for (std::int64_t i = prev; i < hi; ++i) {
            double w = 0.0;
            for (int k = 1; k <= L; ++k)
                w += x[static_cast<std::size_t>(i) * KK + k - 1] / static_cast<double>(counts[static_cast<std::size_t>(k - 1)]);
            column[static_cast<std::size_t>(i - prev)] = w;
        }
        const auto me = mean_and_error(column);
        const double size = static_cast<double>(column.size());
        variance += size * size * me.std_error * me.std_error;  // size * Var(W)
        prev = hi;
    }
    e.value = running;
    e.std_error = std::sqrt(variance);
    return e;
}

Estimate estimate_Zk(const StoppingProblem& problem, int k, const PathPrefix& prefix, const SampleBudget& budget,
                     std::uint64_t seed)
{
    if (k < 1) throw DomainError("estimate_Zk: k must be at least 1");
    check_problem_for_mode(problem, budget);
    const int t = prefix.t();
    if (t < 1 || t > problem.horizon()) throw DomainError("estimate_Zk: prefix length must lie in [1,T]");
    if (prefix.dim() != problem.dim()) throw DomainError("estimate_Zk: prefix dimension mismatch");
    problem.simulator().validate_prefix(prefix.values(), t);

    Estimate e;
    e.mode = budget.mode;
    e.eps = budget.eps;
    e.delta = budget.delta;
    e.seed = seed;
    if (k == 1) {
        e.value = problem.payout(t, prefix);
        e.levels.push_back({1, e.value, e.value, 0.0, 1});
        return e;
    }
    const int h = problem.horizon();
    const RandomStream master(seed);

    if (budget.mode == BudgetMode::PaperStrict) {
        check_ceiling("estimate_Zk", strict_calls_Zk(k, budget.eps, budget.delta, h), budget);
        StrictRecursion rec(problem, h);
        const double eps = budget.eps;
        const double delta = budget.delta;
        // top-level outer loop of B^k, spread over workers
        const std::int64_t n = budget_N(eps / 4.0, delta / 4.0);
        const double inner_delta = delta / (4.0 * static_cast<double>(n) * h);
        const auto gamma = prefix.values();
        auto res = run_outer(n, budget.workers, k, rec, [&](std::size_t i, StrictRecursion::Workspace& ws) {
            auto si = master.child(i);
            auto& buf = ws.buf[static_cast<std::size_t>(k)];
            std::copy(gamma.begin(), gamma.end(), buf.begin());
            rec.draw(buf, t, si, ws);
            double m = kInf;
            for (int j = 1; j <= h; ++j)
                m = std::min(m, rec.Z(k - 1, j, buf.data(), eps / 4.0, inner_delta, si.child(static_cast<std::uint64_t>(j)), ws));
            return m;
        });
        auto ws = rec.workspace(k);
        const double a3 = rec.Z(k - 1, t, gamma.data(), eps / 2.0, delta / 2.0, master.child(static_cast<std::uint64_t>(n)), ws);
        const auto me = mean_and_error(res.terms);
        e.value = a3 - me.mean;
        e.std_error = me.std_error;
        e.calls = res.calls + ws.calls;
        e.levels.push_back({k, e.value, e.value, e.std_error, n});
        return e;
    }

    const std::int64_t reps = budget.outer.empty() ? 1 : budget.outer[0];
    if (reps < 1) throw DomainError("practical outer counts must be at least 1");
    check_ceiling("estimate_Zk", static_cast<double>(reps) * practical_rooted_calls(k, t, budget.inner, h), budget);
    std::vector<double> vals(static_cast<std::size_t>(reps));
    std::vector<std::uint64_t> calls(static_cast<std::size_t>(reps));
    parallel_for(static_cast<std::size_t>(reps), budget.workers, [&](std::size_t r) {
        PracticalTree tree(problem, budget, h);
        auto rng = master.child(r);
        vals[r] = tree.rooted(k, prefix.values(), t, rng);
        calls[r] = tree.calls;
    });
    const auto me = mean_and_error(vals);
    e.value = me.mean;
    e.std_error = me.std_error;
    for (auto c : calls) e.calls += c;
    e.levels.push_back({k, e.value, e.value, e.std_error, reps});
    return e;
}

namespace {

Estimate estimate_Hk_at(const StoppingProblem& problem, int k, const SampleBudget& budget, std::uint64_t seed, int active)
{
    if (k < 1) throw DomainError("estimate_Hk: k must be at least 1");
    check_problem_for_mode(problem, budget);
    if (budget.mode == BudgetMode::PaperStrict) {
        check_ceiling("estimate_Hk", strict_calls_Hk(k, budget.eps, budget.delta, active), budget);
        auto e = strict_Hk(problem, k, budget.eps, budget.delta, budget.workers, RandomStream(seed), active);
        e.seed = seed;
        return e;
    }
    if (budget.outer.empty()) throw DomainError("practical mode needs an outer sample count");
    const std::vector<std::int64_t> counts(static_cast<std::size_t>(k), budget.outer[0]);
    auto e = practical_levels(problem, counts, budget, seed, active);
    e.value = e.levels.back().H;
    e.std_error = e.levels.back().std_error;
    return e;
}

}  // namespace

Estimate estimate_Hk(const StoppingProblem& problem, int k, const SampleBudget& budget, std::uint64_t seed)
{
    return estimate_Hk_at(problem, k, budget, seed, problem.horizon());
}

Estimate estimate_OPT_min(const StoppingProblem& problem, const SampleBudget& budget, std::uint64_t seed)
{
    if (problem.framework() != Framework::Minimize)
        throw DomainError("estimate_OPT_min: '" + problem.name() + "' is a maximization problem");
    check_problem_for_mode(problem, budget);
    const int h = problem.horizon();

    if (budget.mode == BudgetMode::PaperStrict) {
        const int L = strict_opt_levels(budget.eps);
        const double eps = budget.eps / (2.0 * L);
        const double delta = budget.delta / L;
        check_ceiling("estimate_OPT_min", strict_calls_OPT(budget.eps, budget.delta, h), budget);
        Estimate e;
        e.mode = BudgetMode::PaperStrict;
        e.eps = budget.eps;
        e.delta = budget.delta;
        e.seed = seed;
        const RandomStream master(seed);
        double running = 0.0;
        double var = 0.0;
        for (int k = 1; k <= L; ++k) {
            auto lv = strict_Hk(problem, k, eps, delta, budget.workers, master.child(static_cast<std::uint64_t>(k)), h);
            running += lv.value;
            var += lv.std_error * lv.std_error;
            e.calls += lv.calls;
            e.levels.push_back({k, lv.value, running, lv.std_error, lv.levels[0].samples});
        }
        e.value = std::max(0.0, running);
        e.std_error = std::sqrt(var);
        return e;
    }
    if (budget.outer.empty()) throw DomainError("practical mode needs outer sample counts");
    auto e = practical_levels(problem, budget.outer, budget, seed, h);
    e.value = std::max(0.0, e.value);
    return e;
}

Estimate estimate_Hk_minus(const StoppingProblem& problem, int k, double cap, const SampleBudget& budget,
                           std::uint64_t seed)
{
    if (!(cap > 0.0)) throw DomainError("estimate_Hk_minus: U must be positive");
    return estimate_Hk(truncated_complement(problem, cap), k, budget, seed);
}

Estimate modified_expansion_estimate(const StoppingProblem& problem, int k, double eta, const SampleBudget& budget,
                                     std::uint64_t seed)
{
    if (k < 1) throw DomainError("modified_expansion_estimate: k must be at least 1");
    const int h = eta_horizon(problem.horizon(), eta);
    check_problem_for_mode(problem, budget);
    if (budget.mode == BudgetMode::PaperStrict) {
        // k levels at (eps/k, delta/k) each
        const double eps = budget.eps / k;
        const double delta = budget.delta / k;
        double predicted = 0.0;
        for (int i = 1; i <= k; ++i) predicted += strict_calls_Hk(i, eps, delta, h);
        check_ceiling("modified_expansion_estimate", predicted, budget);
        Estimate e;
        e.mode = BudgetMode::PaperStrict;
        e.eps = budget.eps;
        e.delta = budget.delta;
        e.seed = seed;
        const RandomStream master(seed);
        double running = 0.0;
        double var = 0.0;
        for (int i = 1; i <= k; ++i) {
            auto lv = strict_Hk(problem, i, eps, delta, budget.workers, master.child(static_cast<std::uint64_t>(i)), h);
            running += lv.value;
            var += lv.std_error * lv.std_error;
            e.calls += lv.calls;
            e.levels.push_back({i, lv.value, running, lv.std_error, lv.levels[0].samples});
        }
        e.value = running;
        e.std_error = std::sqrt(var);
        return e;
    }
    return practical_levels(problem, practical_counts(budget, k), budget, seed, h);
}

}  // namespace dualstop
