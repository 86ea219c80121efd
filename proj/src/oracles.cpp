#include "dualstop/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

namespace dualstop {
namespace {

constexpr double kFlowTolerance = 1e-12;

bool better(Framework fw, double a, double b)
{
    return fw == Framework::Minimize ? a < b : a > b;
}

bool saturated(double flow, double cap)
{
    return flow >= cap - kFlowTolerance * std::max(1.0, cap);
}

}  // namespace

ValueFunction backward_induction(const FiniteTreeProcess& tree, Framework framework)
{
    const auto n = static_cast<std::size_t>(tree.size());
    ValueFunction vf;
    vf.value.resize(n);
    vf.continuation.resize(n);
    vf.stop.resize(n);
    for (int i = tree.size() - 1; i >= 0; --i) {
        const auto& node = tree.node(i);
        if (node.child_end == node.child_begin) {
            vf.continuation[i] = node.payout;
            vf.value[i] = node.payout;
            vf.stop[i] = 1;
            continue;
        }
        double c = 0.0;
        for (int k = node.child_begin; k < node.child_end; ++k) c += tree.node(k).branch_prob * vf.value[k];
        vf.continuation[i] = c;
        vf.stop[i] = better(framework, c, node.payout) ? 0 : 1;
        vf.value[i] = vf.stop[i] ? node.payout : c;
    }
    for (int r = 0; r < tree.root_count(); ++r) vf.opt += tree.node(r).branch_prob * vf.value[r];
    return vf;
}

double brute_force_opt(const FiniteTreeProcess& tree, Framework framework, double max_rules)
{
    const double rules = count_stopping_rules(tree);
    if (rules > max_rules) {
        std::ostringstream os;
        os << "brute_force_opt: " << rules << " stopping rules exceed the limit " << max_rules;
        throw DomainError(os.str());
    }

    // Every rule on the subtree below `first..last` siblings, as the list of
    // conditional values it achieves; combinations are formed explicitly.
    std::function<std::vector<double>(int)> rules_at;
    auto combine = [&](int begin, int end) {
        std::vector<double> acc{0.0};
        for (int c = begin; c < end; ++c) {
            const double p = tree.node(c).branch_prob;
            const auto sub = rules_at(c);
            std::vector<double> next;
            next.reserve(acc.size() * sub.size());
            for (double a : acc)
                for (double v : sub) next.push_back(a + p * v);
            acc = std::move(next);
        }
        return acc;
    };
    rules_at = [&](int i) {
        const auto& node = tree.node(i);
        std::vector<double> out{node.payout};
        if (node.child_end > node.child_begin) {
            auto cont = combine(node.child_begin, node.child_end);
            out.insert(out.end(), cont.begin(), cont.end());
        }
        return out;
    };
    const auto all = combine(0, tree.root_count());
    return framework == Framework::Minimize ? *std::min_element(all.begin(), all.end())
                                            : *std::max_element(all.begin(), all.end());
}

FlowNetwork build_flow_network(const FiniteTreeProcess& tree)
{
    FlowNetwork net;
    net.tree = &tree;
    net.capacity.resize(static_cast<std::size_t>(tree.size()));
    for (int i = 0; i < tree.size(); ++i) net.capacity[i] = tree.node(i).payout * tree.node(i).path_prob;
    return net;
}

Flow max_flow(const FlowNetwork& net)
{
    const auto& tree = *net.tree;
    const auto n = static_cast<std::size_t>(tree.size());
    std::vector<double> inflow(n);
    for (int i = tree.size() - 1; i >= 0; --i) {
        const auto& node = tree.node(i);
        if (node.child_end == node.child_begin) {
            inflow[i] = net.capacity[i];
            continue;
        }
        double below = 0.0;
        for (int c = node.child_begin; c < node.child_end; ++c) below += inflow[c];
        inflow[i] = std::min(net.capacity[i], below);
    }

    Flow f;
    f.edge.assign(n, 0.0);
    for (int r = 0; r < tree.root_count(); ++r) {
        f.edge[r] = inflow[r];
        f.value += inflow[r];
    }
    for (int i = 0; i < tree.size(); ++i) {
        const auto& node = tree.node(i);
        if (node.child_end == node.child_begin) continue;
        double below = 0.0;
        for (int c = node.child_begin; c < node.child_end; ++c) below += inflow[c];
        // below >= f.edge[i]; scale only when the edge into i is the bottleneck
        const double scale = below > 0.0 ? f.edge[i] / below : 0.0;
        for (int c = node.child_begin; c < node.child_end; ++c) f.edge[c] = std::min(inflow[c], inflow[c] * scale);
    }
    return f;
}

std::vector<double> flow_to_martingale(const FlowNetwork& net, const Flow& flow)
{
    const auto& tree = *net.tree;
    if (flow.edge.size() != net.capacity.size()) throw DomainError("flow_to_martingale: flow has the wrong size");

    for (int i = 0; i < tree.size(); ++i) {
        const double f = flow.edge[i];
        const double cap = net.capacity[i];
        if (f < -kFlowTolerance || f > cap + kFlowTolerance * std::max(1.0, cap))
            throw DomainError("flow_to_martingale: flow violates capacity at node " + std::to_string(tree.node(i).id));
        const auto& node = tree.node(i);
        if (node.child_end == node.child_begin) continue;
        double below = 0.0;
        for (int c = node.child_begin; c < node.child_end; ++c) below += flow.edge[c];
        if (std::abs(below - f) > kFlowTolerance * std::max(1.0, f))
            throw DomainError("flow_to_martingale: flow not conserved at node " + std::to_string(tree.node(i).id));
    }

    // blocking: each source-sink path crosses a saturated edge
    std::vector<char> blocked(static_cast<std::size_t>(tree.size()));
    for (int i = 0; i < tree.size(); ++i) {
        const auto& node = tree.node(i);
        const bool above = node.parent >= 0 && blocked[node.parent];
        blocked[i] = above || saturated(flow.edge[i], net.capacity[i]);
        if (node.child_end == node.child_begin && !blocked[i])
            throw DomainError("flow_to_martingale: flow is not blocking on the path to node " + std::to_string(node.id));
    }

    std::vector<double> m(static_cast<std::size_t>(tree.size()));
    for (int i = 0; i < tree.size(); ++i) m[i] = flow.edge[i] / tree.node(i).path_prob;
    return m;
}

Flow round_flow(const FiniteTreeProcess& tree, const ExactExpansion& run, int k)
{
    if (k < 1 || k > run.depth()) throw DomainError("round_flow: level out of range");
    const auto& lv = run.levels[static_cast<std::size_t>(k - 1)];
    Flow f;
    f.edge.resize(static_cast<std::size_t>(tree.size()));
    for (int i = 0; i < tree.size(); ++i) f.edge[i] = lv.cond_min[i] * tree.node(i).path_prob;
    for (int r = 0; r < tree.root_count(); ++r) f.value += f.edge[r];
    return f;
}

std::vector<char> min_cut_stopping(const FlowNetwork& net, const Flow& flow)
{
    const auto& tree = *net.tree;
    std::vector<char> stop(static_cast<std::size_t>(tree.size()), 0);
    std::vector<char> cut_above(static_cast<std::size_t>(tree.size()), 0);
    for (int i = 0; i < tree.size(); ++i) {
        const auto& node = tree.node(i);
        const bool above = node.parent >= 0 && cut_above[node.parent];
        if (!above && (saturated(flow.edge[i], net.capacity[i]) || tree.is_leaf(i))) stop[i] = 1;
        cut_above[i] = above || stop[i];
    }
    return stop;
}

void write_edge_list(std::ostream& out, const FlowNetwork& net, const Flow& flow)
{
    const auto& tree = *net.tree;
    auto name = [&](int i) { return std::to_string(tree.node(i).id); };
    const auto old = out.precision(17);
    for (int i = 0; i < tree.size(); ++i) {
        const auto& node = tree.node(i);
        out << (node.parent < 0 ? std::string("s") : name(node.parent)) << ' ' << name(i) << ' ' << net.capacity[i] << ' '
            << flow.edge[i] << '\n';
    }
    for (int i = 0; i < tree.size(); ++i)
        if (tree.is_leaf(i)) out << name(i) << " t inf " << flow.edge[i] << '\n';
    out.precision(old);
}

double rule_value(const FiniteTreeProcess& tree, const std::vector<char>& stop)
{
    if (stop.size() != static_cast<std::size_t>(tree.size())) throw DomainError("rule_value: wrong flag count");
    std::vector<char> reached(stop.size(), 0);
    double value = 0.0;
    for (int i = 0; i < tree.size(); ++i) {
        const auto& node = tree.node(i);
        const bool live = node.parent < 0 || (reached[node.parent] && !stop[node.parent]);
        reached[i] = live;
        if (live && (stop[i] || tree.is_leaf(i))) value += node.payout * node.path_prob;
    }
    return value;
}

}  // namespace dualstop
