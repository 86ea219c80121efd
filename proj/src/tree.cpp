#include "dualstop/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace dualstop {
namespace {

std::string node_label(std::int64_t id)
{
    return "node " + std::to_string(id);
}

}  // namespace

FiniteTreeProcess::FiniteTreeProcess(int dim, int horizon, std::vector<TreeNodeSpec> specs) : dim_(dim), horizon_(horizon)
{
    if (dim < 1) throw DomainError("tree: D must be at least 1");
    if (horizon < 1) throw DomainError("tree: T must be at least 1");
    if (specs.empty()) throw DomainError("tree: no nodes");

    std::map<std::int64_t, std::size_t> by_id;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!by_id.emplace(specs[i].id, i).second) throw DomainError("tree: duplicate " + node_label(specs[i].id));
    }

    // children lists in file order
    std::vector<std::vector<std::size_t>> children(specs.size());
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        auto& s = specs[i];
        if (!(s.branch_prob > 0.0) || s.branch_prob > 1.0 + kProbabilityTolerance || !std::isfinite(s.branch_prob))
            throw DomainError("tree: " + node_label(s.id) + " has branch probability outside (0,1]");
        if (!std::isfinite(s.payout) || s.payout < 0.0)
            throw DomainError("tree: " + node_label(s.id) + " has a negative or non-finite payout");
        if (s.value.empty()) s.value.assign(static_cast<std::size_t>(dim), static_cast<double>(s.id));
        if (s.value.size() != static_cast<std::size_t>(dim))
            throw DomainError("tree: " + node_label(s.id) + " value has wrong dimension");
        if (!s.parent) {
            roots.push_back(i);
            continue;
        }
        auto it = by_id.find(*s.parent);
        if (it == by_id.end()) throw DomainError("tree: " + node_label(s.id) + " references a missing parent");
        children[it->second].push_back(i);
    }
    if (roots.empty()) throw DomainError("tree: no time-1 nodes");

    // breadth-first relabelling
    std::vector<std::size_t> order;
    std::vector<int> depth(specs.size(), 0);
    std::vector<int> new_index(specs.size(), -1);
    order.reserve(specs.size());
    for (auto r : roots) {
        depth[r] = 1;
        order.push_back(r);
    }
    for (std::size_t head = 0; head < order.size(); ++head) {
        const auto cur = order[head];
        if (depth[cur] > horizon) throw DomainError("tree: " + node_label(specs[cur].id) + " is deeper than T");
        for (auto c : children[cur]) {
            depth[c] = depth[cur] + 1;
            order.push_back(c);
        }
    }
    if (order.size() != specs.size()) throw DomainError("tree: nodes unreachable from time 1 (cycle?)");
    for (std::size_t k = 0; k < order.size(); ++k) new_index[order[k]] = static_cast<int>(k);

    nodes_.resize(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& s = specs[order[k]];
        auto& n = nodes_[k];
        n.id = s.id;
        n.depth = depth[order[k]];
        n.parent = s.parent ? new_index[by_id.at(*s.parent)] : -1;
        n.branch_prob = s.branch_prob;
        n.payout = s.payout;
        n.value = s.value;
        n.child_begin = n.child_end = 0;
    }
    root_count_ = static_cast<int>(roots.size());

    // children are contiguous by construction of the BFS order
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& kids = children[order[k]];
        if (kids.empty()) {
            if (nodes_[k].depth != horizon)
                throw DomainError("tree: leaf " + node_label(nodes_[k].id) + " is not at depth T");
            continue;
        }
        nodes_[k].child_begin = new_index[kids.front()];
        nodes_[k].child_end = nodes_[k].child_begin + static_cast<int>(kids.size());
    }

    auto check_siblings = [&](int begin, int end, const std::string& where) {
        double total = 0.0;
        for (int c = begin; c < end; ++c) total += nodes_[c].branch_prob;
        if (std::abs(total - 1.0) > kProbabilityTolerance)
            throw DomainError("tree: branch probabilities under " + where + " sum to " + std::to_string(total));
        for (int a = begin; a < end; ++a)
            for (int b = a + 1; b < end; ++b)
                if (nodes_[a].value == nodes_[b].value)
                    throw DomainError("tree: siblings " + node_label(nodes_[a].id) + " and " + node_label(nodes_[b].id) +
                                      " share the same state value");
    };
    check_siblings(0, root_count_, "the root");
    for (auto& n : nodes_)
        if (n.child_end > n.child_begin) check_siblings(n.child_begin, n.child_end, node_label(n.id));

    for (auto& n : nodes_) n.path_prob = n.branch_prob * (n.parent < 0 ? 1.0 : nodes_[n.parent].path_prob);
}

FiniteTreeProcess FiniteTreeProcess::from_json(const nlohmann::json& j)
{
    try {
        const int dim = j.at("D").get<int>();
        const int horizon = j.at("T").get<int>();
        std::vector<TreeNodeSpec> specs;
        for (const auto& jn : j.at("nodes")) {
            TreeNodeSpec s;
            s.id = jn.at("id").get<std::int64_t>();
            if (jn.contains("parent") && !jn.at("parent").is_null()) s.parent = jn.at("parent").get<std::int64_t>();
            s.branch_prob = jn.at("branch_prob").get<double>();
            s.payout = jn.at("payout").get<double>();
            if (jn.contains("value")) {
                const auto& v = jn.at("value");
                if (v.is_array())
                    s.value = v.get<std::vector<double>>();
                else
                    s.value.assign(static_cast<std::size_t>(dim), v.get<double>());
            }
            specs.push_back(std::move(s));
        }
        return FiniteTreeProcess(dim, horizon, std::move(specs));
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("tree file: ") + e.what());
    }
}

FiniteTreeProcess FiniteTreeProcess::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DomainError("tree file: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("tree file " + path + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json FiniteTreeProcess::to_json() const
{
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_) {
        nlohmann::json jn{{"id", n.id}, {"branch_prob", n.branch_prob}, {"payout", n.payout}, {"value", n.value}};
        jn["parent"] = n.parent < 0 ? nlohmann::json(nullptr) : nlohmann::json(nodes_[n.parent].id);
        nodes.push_back(std::move(jn));
    }
    return {{"D", dim_}, {"T", horizon_}, {"nodes", std::move(nodes)}};
}

void FiniteTreeProcess::save(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw DomainError("tree file: cannot write " + path);
    out << to_json().dump(2) << '\n';
}

double FiniteTreeProcess::max_payout() const
{
    double m = 0.0;
    for (const auto& n : nodes_) m = std::max(m, n.payout);
    return m;
}

int FiniteTreeProcess::locate(std::span<const double> path, int t) const
{
    if (t < 0 || t > horizon_) throw DomainError("tree: prefix length outside [0,T]");
    const auto d = static_cast<std::size_t>(dim_);
    int cur = -1;
    int begin = 0;
    int end = root_count_;
    for (int s = 1; s <= t; ++s) {
        const auto col = path.subspan(static_cast<std::size_t>(s - 1) * d, d);
        int found = -1;
        for (int c = begin; c < end; ++c) {
            if (std::equal(col.begin(), col.end(), nodes_[c].value.begin())) {
                found = c;
                break;
            }
        }
        if (found < 0) throw DomainError("tree: prefix leaves the support at t=" + std::to_string(s));
        cur = found;
        begin = nodes_[cur].child_begin;
        end = nodes_[cur].child_end;
    }
    return cur;
}

std::vector<int> FiniteTreeProcess::ancestry(int i) const
{
    std::vector<int> chain;
    for (int cur = i; cur >= 0; cur = nodes_[cur].parent) chain.push_back(cur);
    std::reverse(chain.begin(), chain.end());
    return chain;
}

FiniteTreeProcess FiniteTreeProcess::map_payouts(const std::function<double(const TreeNode&)>& f) const
{
    std::vector<TreeNodeSpec> specs;
    specs.reserve(nodes_.size());
    for (const auto& n : nodes_) {
        TreeNodeSpec s;
        s.id = n.id;
        if (n.parent >= 0) s.parent = nodes_[n.parent].id;
        s.branch_prob = n.branch_prob;
        s.payout = f(n);
        s.value = n.value;
        specs.push_back(std::move(s));
    }
    return FiniteTreeProcess(dim_, horizon_, std::move(specs));
}

double count_stopping_rules(const FiniteTreeProcess& tree)
{
    // rules(node) = 1 (stop) + prod over children (continue); leaves must stop.
    std::vector<double> rules(static_cast<std::size_t>(tree.size()), 1.0);
    for (int i = tree.size() - 1; i >= 0; --i) {
        const auto& n = tree.node(i);
        if (n.child_end == n.child_begin) continue;
        double prod = 1.0;
        for (int c = n.child_begin; c < n.child_end; ++c) prod *= rules[c];
        rules[i] = 1.0 + prod;
    }
    double total = 1.0;
    for (int r = 0; r < tree.root_count(); ++r) total *= rules[r];
    return total;
}

FiniteTreeProcess random_tree(const RandomTreeOptions& o, RandomStream rng)
{
    if (o.horizon < 1 || o.min_branching < 1 || o.max_branching < o.min_branching || o.max_roots < 1)
        throw DomainError("random_tree: invalid options");
    for (std::uint64_t attempt = 0;; ++attempt) {
        auto draw = rng.child(attempt);
        auto branching = [&](int hi) {
            return o.min_branching + static_cast<int>(draw.next() % static_cast<std::uint64_t>(hi - o.min_branching + 1));
        };
        auto probabilities = [&](int n) {
            std::vector<double> w(static_cast<std::size_t>(n));
            for (auto& x : w) x = 0.05 + draw.uniform();
            const double total = std::accumulate(w.begin(), w.end(), 0.0);
            for (auto& x : w) x /= total;
            // absorb rounding so the sum is 1 to machine precision
            w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
            return w;
        };

        std::vector<TreeNodeSpec> specs;
        std::deque<std::pair<std::int64_t, int>> frontier;  // (id, depth)
        std::int64_t next_id = 0;
        auto add_children = [&](std::optional<std::int64_t> parent, int count, int depth) {
            const auto probs = probabilities(count);
            for (int c = 0; c < count; ++c) {
                TreeNodeSpec s;
                s.id = next_id++;
                s.parent = parent;
                s.branch_prob = probs[static_cast<std::size_t>(c)];
                s.payout = o.payout_scale * draw.uniform();
                s.value = {static_cast<double>(c)};
                frontier.emplace_back(s.id, depth);
                specs.push_back(std::move(s));
            }
        };
        add_children(std::nullopt, std::max(1, std::min(o.max_roots, branching(std::max(o.max_roots, o.min_branching)))), 1);
        while (!frontier.empty()) {
            auto [id, depth] = frontier.front();
            frontier.pop_front();
            if (depth < o.horizon) add_children(id, branching(o.max_branching), depth + 1);
        }
        FiniteTreeProcess tree(1, o.horizon, std::move(specs));
        if (!o.max_stopping_rules || count_stopping_rules(tree) <= *o.max_stopping_rules) return tree;
    }
}

namespace {

class TreeSimulator final : public PathSimulator {
public:
    explicit TreeSimulator(std::shared_ptr<const FiniteTreeProcess> tree) : tree_(std::move(tree)) {}

    int dim() const override { return tree_->dim(); }
    int horizon() const override { return tree_->horizon(); }

    void extend(std::span<double> path, int t, int upto, RandomStream& rng) const override
    {
        const auto d = static_cast<std::size_t>(tree_->dim());
        int cur = tree_->locate(path, t);
        for (int s = t + 1; s <= upto; ++s) {
            const int begin = cur < 0 ? 0 : tree_->node(cur).child_begin;
            const int end = cur < 0 ? tree_->root_count() : tree_->node(cur).child_end;
            double u = rng.uniform();
            int pick = end - 1;
            for (int c = begin; c < end; ++c) {
                u -= tree_->node(c).branch_prob;
                if (u < 0.0) {
                    pick = c;
                    break;
                }
            }
            const auto& v = tree_->node(pick).value;
            std::copy(v.begin(), v.end(), path.begin() + static_cast<std::ptrdiff_t>((s - 1) * d));
            cur = pick;
        }
    }

    void validate_prefix(std::span<const double> path, int t) const override { (void)tree_->locate(path, t); }

    const FiniteTreeProcess& tree() const { return *tree_; }

private:
    std::shared_ptr<const FiniteTreeProcess> tree_;
};

class TreePayout final : public PayoutFunction {
public:
    explicit TreePayout(std::shared_ptr<const FiniteTreeProcess> tree) : tree_(std::move(tree)) {}

    double operator()(int t, std::span<const double> path) const override
    {
        return tree_->node(tree_->locate(path, t)).payout;
    }

private:
    std::shared_ptr<const FiniteTreeProcess> tree_;
};

}  // namespace

StoppingProblem tree_problem(std::shared_ptr<const FiniteTreeProcess> tree, Framework framework, std::string name)
{
    ProblemTraits traits;
    traits.name = std::move(name);
    traits.framework = framework;
    traits.bound = tree->max_payout();
    traits.normalized = tree->max_payout() <= 1.0;
    return StoppingProblem(std::make_shared<TreeSimulator>(tree), std::make_shared<TreePayout>(tree), traits);
}

std::vector<FiniteTreeProcess> random_tree_suite(int count, std::uint64_t seed, int max_horizon)
{
    if (count < 0 || max_horizon < 1) throw DomainError("random_tree_suite: bad size");
    std::vector<FiniteTreeProcess> trees;
    const RandomStream master(seed);
    for (int i = 0; i < count; ++i) {
        auto rng = master.child(static_cast<std::uint64_t>(i));
        RandomTreeOptions o;
        o.horizon = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_horizon));
        o.max_branching = 3;
        o.max_roots = 3;
        trees.push_back(random_tree(o, rng.child(1)));
    }
    return trees;
}

std::vector<FiniteTreeProcess> tiny_tree_suite(int count, std::uint64_t seed)
{
    if (count < 0) throw DomainError("tiny_tree_suite: bad size");
    std::vector<FiniteTreeProcess> trees;
    const RandomStream master(seed);
    for (int i = 0; i < count; ++i) {
        auto rng = master.child(static_cast<std::uint64_t>(i));
        RandomTreeOptions o;
        o.horizon = 1 + static_cast<int>(rng.next() % 4);
        o.max_branching = 3;
        o.max_roots = 2;
        o.max_stopping_rules = 1e5;
        trees.push_back(random_tree(o, rng.child(1)));
    }
    return trees;
}

}  // namespace dualstop
