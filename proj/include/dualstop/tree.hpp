#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dualstop/problem.hpp"

namespace dualstop {

/// Node as written in a tree file. `parent` is empty for time-1 nodes.
struct TreeNodeSpec {
    std::int64_t id = 0;
    std::optional<std::int64_t> parent;
    double branch_prob = 1.0;
    double payout = 0.0;
    /// State Y_t at this node; defaults to D copies of the id.
    std::vector<double> value;
};

struct TreeNode {
    std::int64_t id = 0;
    int parent = -1;       ///< index into nodes(), -1 at t = 1
    int depth = 1;         ///< time t in [1, T]
    double branch_prob = 1.0;
    double path_prob = 1.0;  ///< P(Y_[t] = gamma)
    double payout = 0.0;
    std::vector<double> value;
    int child_begin = 0;
    int child_end = 0;
};

/// Explicit probability-weighted scenario tree with per-node payouts.
///
/// Nodes are stored breadth-first: every parent precedes its children and
/// siblings are contiguous, so passes over levels are plain index loops.
class FiniteTreeProcess {
public:
    static constexpr double kProbabilityTolerance = 1e-12;

    FiniteTreeProcess(int dim, int horizon, std::vector<TreeNodeSpec> nodes);

    static FiniteTreeProcess from_json(const nlohmann::json& j);
    static FiniteTreeProcess load(const std::string& path);
    [[nodiscard]] nlohmann::json to_json() const;
    void save(const std::string& path) const;

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(nodes_.size()); }
    [[nodiscard]] const TreeNode& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] std::span<const TreeNode> nodes() const noexcept { return nodes_; }
    [[nodiscard]] int root_count() const noexcept { return root_count_; }  ///< roots are indices [0, root_count)
    [[nodiscard]] bool is_leaf(int i) const { return node(i).depth == horizon_; }
    [[nodiscard]] double max_payout() const;

    /// Node index reached by the first t columns of `path`; -1 for t = 0.
    /// Throws DomainError when the prefix leaves the support.
    [[nodiscard]] int locate(std::span<const double> path, int t) const;

    /// Root-to-node index chain (length = depth).
    [[nodiscard]] std::vector<int> ancestry(int i) const;

    /// Same tree with payouts transformed node by node.
    [[nodiscard]] FiniteTreeProcess map_payouts(const std::function<double(const TreeNode&)>& f) const;

private:
    int dim_;
    int horizon_;
    int root_count_ = 0;
    std::vector<TreeNode> nodes_;
};

struct RandomTreeOptions {
    int horizon = 3;
    int max_branching = 3;
    int min_branching = 1;
    int max_roots = 1;
    double payout_scale = 1.0;  ///< payouts uniform on [0, payout_scale]
    /// Reject draws whose brute-force enumeration would exceed this many rules.
    std::optional<double> max_stopping_rules;
};

/// Random tree for property tests; deterministic in the stream.
FiniteTreeProcess random_tree(const RandomTreeOptions& options, RandomStream rng);

/// Seeded suite of random normalized trees: T in [1, max_horizon],
/// branching in [1,3], up to 3 roots.
std::vector<FiniteTreeProcess> random_tree_suite(int count, std::uint64_t seed, int max_horizon = 5);

/// Trees small enough to enumerate every stopping rule (at most 1e5).
std::vector<FiniteTreeProcess> tiny_tree_suite(int count, std::uint64_t seed);

/// Number of distinct adapted stopping rules on the tree (as a double).
double count_stopping_rules(const FiniteTreeProcess& tree);

/// Simulator/payout pair backed by a tree; payouts read from the nodes.
StoppingProblem tree_problem(std::shared_ptr<const FiniteTreeProcess> tree, Framework framework, std::string name = "tree");

}  // namespace dualstop
