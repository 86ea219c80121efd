#include "dualstop/max_pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dualstop/parallel.hpp"

namespace dualstop {

MaxMoments make_moments(double M1, double M2)
{
    if (!(M1 > 0.0) || !std::isfinite(M1) || !std::isfinite(M2))
        throw DomainError("max moments: M1 must be positive and finite (all-zero payouts leave gamma0 undefined)");
    if (M2 < M1 * M1 * (1.0 - 1e-12)) throw DomainError("max moments: M2 < M1^2 is impossible");
    MaxMoments m;
    m.M1 = M1;
    m.M2 = M2;
    m.gamma0 = std::max(1.0, M2 / (M1 * M1));
    return m;
}

MaxMoments estimate_max_moments(const StoppingProblem& problem, std::int64_t n, std::uint64_t seed, int workers)
{
    if (n < 2) throw DomainError("estimate_max_moments: n must be at least 2");
    std::vector<double> mx(static_cast<std::size_t>(n));
    std::vector<double> mx2(static_cast<std::size_t>(n));
    const RandomStream master(seed);
    const auto T = problem.horizon();
    const auto size = static_cast<std::size_t>(problem.dim()) * static_cast<std::size_t>(T);
    const std::size_t chunk = 256;
    const std::size_t chunks = (static_cast<std::size_t>(n) + chunk - 1) / chunk;
    parallel_for(chunks, workers, [&](std::size_t c) {
        std::vector<double> path(size);
        for (std::size_t i = c * chunk; i < std::min(static_cast<std::size_t>(n), (c + 1) * chunk); ++i) {
            auto rng = master.child(i);
            problem.simulator().extend(path, 0, T, rng);
            double m = 0.0;
            for (int t = 1; t <= T; ++t) m = std::max(m, problem.payout(t, std::span<const double>(path)));
            mx[i] = m;
            mx2[i] = m * m;
        }
    });
    const auto a = mean_and_error(mx);
    const auto b = mean_and_error(mx2);
    auto out = make_moments(a.mean, b.mean);
    out.M1_std_error = a.std_error;
    out.M2_std_error = b.std_error;
    out.samples = n;
    return out;
}

MaxMoments exact_max_moments(const FiniteTreeProcess& tree)
{
    std::vector<double> running(static_cast<std::size_t>(tree.size()));
    double M1 = 0.0;
    double M2 = 0.0;
    for (int i = 0; i < tree.size(); ++i) {
        const auto& n = tree.node(i);
        running[i] = std::max(n.parent < 0 ? 0.0 : running[n.parent], n.payout);
        if (tree.is_leaf(i)) {
            M1 += n.path_prob * running[i];
            M2 += n.path_prob * running[i] * running[i];
        }
    }
    return make_moments(M1, M2);
}

TruncationLevel truncation_level(const MaxMoments& m, double eps)
{
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("truncation_level: eps must lie in (0,1)");
    TruncationLevel out;
    out.U0 = 1e4 * m.gamma0 * m.gamma0 * m.gamma0 * m.M1 / (eps * eps);
    out.k0 = std::ceil(std::pow(out.U0 / m.M1, 1.5));
    return out;
}

MaxEstimate estimate_OPT_max(const StoppingProblem& problem, const MaxMoments& moments, const SampleBudget& budget,
                             std::uint64_t seed, std::optional<double> U, std::optional<int> K)
{
    if (problem.framework() != Framework::Maximize)
        throw DomainError("estimate_OPT_max: '" + problem.name() + "' is a minimization problem");
    if (!(moments.M1 > 0.0)) throw DomainError("estimate_OPT_max: moments are missing");
    budget.validate();

    MaxEstimate out;
    if (budget.mode == BudgetMode::PaperStrict) {
        const auto level = truncation_level(moments, budget.eps);
        const double ratio = std::pow(level.U0 / moments.M1, 1.5) + 1.0;
        const double eps_i = 1.0 / (ratio * ratio);
        const double delta_i = budget.delta / ratio;
        const auto complement = truncated_complement(problem, level.U0);
        // preview the whole run before drawing anything
        const double ceiling = budget.max_calls.value_or(9.0e18);
        double predicted = 0.0;
        for (double i = 1; i <= level.k0 && predicted <= ceiling && std::isfinite(predicted); ++i)
            predicted += strict_calls_Hk(static_cast<int>(std::min(i, 1e9)), eps_i, delta_i, problem.horizon());
        if (!std::isfinite(predicted) || predicted > ceiling) {
            std::ostringstream os;
            os << "estimate_OPT_max: strict run needs k0 = " << level.k0 << " levels at U0 = " << level.U0
               << "; predicted calls exceed " << ceiling;
            throw BudgetExceeded(os.str(), predicted, ceiling);
        }
        SampleBudget level_budget = budget;
        level_budget.eps = eps_i;
        level_budget.delta = delta_i;
        const RandomStream master(seed);
        Estimate e;
        e.mode = BudgetMode::PaperStrict;
        e.eps = budget.eps;
        e.delta = budget.delta;
        e.seed = seed;
        double running = 0.0;
        for (int i = 1; i <= static_cast<int>(level.k0); ++i) {
            auto lv = estimate_Hk(complement, i, level_budget, master.child(static_cast<std::uint64_t>(i)).key());
            running += lv.value;
            e.calls += lv.calls;
            e.levels.push_back({i, lv.value, running, lv.std_error, lv.levels.back().samples});
        }
        e.value = level.U0 * (1.0 - running);
        out.estimate = std::move(e);
        out.U = level.U0;
        out.K = static_cast<int>(level.k0);
        out.relative_bound = budget.eps;
        return out;
    }

    if (!U || !K) throw DomainError("estimate_OPT_max: practical mode needs U and K");
    if (!(*U > 0.0)) throw DomainError("estimate_OPT_max: U must be positive");
    if (*K < 1) throw DomainError("estimate_OPT_max: K must be at least 1");
    if (budget.outer.empty()) throw DomainError("estimate_OPT_max: practical mode needs outer sample counts");
    std::vector<std::int64_t> counts = budget.outer.size() == 1
                                           ? std::vector<std::int64_t>(static_cast<std::size_t>(*K), budget.outer[0])
                                           : budget.outer;
    if (static_cast<int>(counts.size()) != *K) throw DomainError("estimate_OPT_max: expected 1 or K outer counts");

    auto e = practical_levels(truncated_complement(problem, *U), counts, budget, seed, problem.horizon());
    const double sum = e.value;
    const double sum_se = e.std_error;
    e.value = *U * (1.0 - sum);
    e.std_error = *U * sum_se;

    const double m1 = std::max(moments.M1 - 3.0 * moments.M1_std_error, std::numeric_limits<double>::min());
    const double m2 = moments.M2 + 3.0 * moments.M2_std_error;
    const double gamma = std::max(1.0, m2 / (m1 * m1));
    const double r = *U / m1;
    out.relative_bound = 7.0 * std::pow(gamma, 1.5) * (r * (1.0 / (*K + 1.0) + 3.0 * sum_se) + 1.0 / std::sqrt(r));
    out.estimate = std::move(e);
    out.U = *U;
    out.K = *K;
    return out;
}

}  // namespace dualstop
