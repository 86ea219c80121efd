#pragma once

#include <iosfwd>
#include <vector>

#include "dualstop/exact.hpp"
#include "dualstop/tree.hpp"

namespace dualstop {

struct ValueFunction {
    double opt = 0.0;
    std::vector<double> value;        ///< Snell envelope per node
    std::vector<double> continuation;  ///< E[V_{t+1} | F_t], payout at leaves
    std::vector<char> stop;           ///< optimal action per node (ties stop)
};

/// Snell envelope by backward induction; min or max per framework.
ValueFunction backward_induction(const FiniteTreeProcess& tree, Framework framework = Framework::Minimize);

/// Optimum over an explicit list of every adapted stopping rule.
/// Throws DomainError when the tree has more than `max_rules` rules.
double brute_force_opt(const FiniteTreeProcess& tree, Framework framework = Framework::Minimize, double max_rules = 1e6);

/// Source -> roots, parent -> child, leaves -> sink. Tree node i owns the
/// edge entering it, with capacity Z_t(node) P(node). Leaf -> sink edges are
/// unbounded and carry no capacity value.
struct FlowNetwork {
    const FiniteTreeProcess* tree = nullptr;
    std::vector<double> capacity;
};

struct Flow {
    double value = 0.0;
    std::vector<double> edge;  ///< flow on the edge entering each node
};

FlowNetwork build_flow_network(const FiniteTreeProcess& tree);

/// Maximum (blocking) flow by one bottom-up and one top-down pass.
Flow max_flow(const FlowNetwork& network);

/// M_t = F_t / P(Y_[t]). Validates capacity feasibility, conservation and
/// the blocking property; throws DomainError otherwise.
std::vector<double> flow_to_martingale(const FlowNetwork& network, const Flow& flow);

/// Flow pushed in round k of the expansion: edge into a node carries
/// E[min_i Z^k_i | F_t](node) P(node).
Flow round_flow(const FiniteTreeProcess& tree, const ExactExpansion& run, int k);

/// Node flags of the stopping rule read off the flow: on every path, stop at
/// the first saturated edge.
std::vector<char> min_cut_stopping(const FlowNetwork& network, const Flow& flow);

/// One line per edge: "from to capacity flow", with s/t for source and sink,
/// node ids elsewhere, and "inf" for the unbounded sink edges.
void write_edge_list(std::ostream& out, const FlowNetwork& network, const Flow& flow);

/// E[Z_tau] for a rule given by per-node stop flags (forced stop at leaves).
double rule_value(const FiniteTreeProcess& tree, const std::vector<char>& stop);

}  // namespace dualstop
