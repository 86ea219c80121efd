#include "dualstop/policy.hpp"

#include <cmath>
#include <limits>

#include "dualstop/exact.hpp"
#include "dualstop/oracles.hpp"
#include "dualstop/parallel.hpp"

namespace dualstop {

TreeRule tau_k_exact(const FiniteTreeProcess& tree, int k)
{
    if (k < 1) throw DomainError("tau_k_exact: k must be at least 1");
    if (tree.max_payout() > 1.0) throw DomainError("tau_k_exact: payouts must lie in [0,1]");
    const auto run = exact_levels(tree, k);
    const auto& z = run.levels.back().z;
    TreeRule rule;
    rule.stop.resize(static_cast<std::size_t>(tree.size()));
    for (int i = 0; i < tree.size(); ++i) rule.stop[i] = z[i] <= 1.0 / k || tree.is_leaf(i);
    rule.value = rule_value(tree, rule.stop);
    return rule;
}

TreeRule tau_star_exact(const FiniteTreeProcess& tree, int K, double tol)
{
    const auto mar = exact_mar(tree, K, tol);
    TreeRule rule;
    rule.stop.resize(static_cast<std::size_t>(tree.size()));
    for (int i = 0; i < tree.size(); ++i) rule.stop[i] = mar.slack[i] <= tol || tree.is_leaf(i);
    rule.value = rule_value(tree, rule.stop);
    return rule;
}

TauEpsPolicy::TauEpsPolicy(const StoppingProblem& problem, double eps, SampleBudget budget)
    : problem_(problem), eps_(eps), budget_(std::move(budget))
{
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("tau_eps: eps must lie in (0,1)");
    if (!problem.normalized()) throw DomainError("tau_eps: the problem must be normalized");
    level_ = static_cast<int>(std::ceil(4.0 / eps));
    if (budget_.mode == BudgetMode::PaperStrict) {
        budget_.eps = eps / 4.0;
        budget_.delta = eps / (4.0 * problem.horizon());
    }
    budget_.workers = 1;
}

PolicyDecision TauEpsPolicy::decide(const PathPrefix& prefix, std::uint64_t seed) const
{
    PolicyDecision d;
    d.t = prefix.t();
    d.payout = problem_.payout(d.t, prefix);
    if (d.t == problem_.horizon()) {
        d.stop = true;
        d.statistic = std::numeric_limits<double>::quiet_NaN();
        d.threshold = std::numeric_limits<double>::quiet_NaN();
        return d;
    }
    const auto e = estimate_Zk(problem_, level_, prefix, budget_, seed);
    d.statistic = e.value;
    d.threshold = eps_ / 2.0;
    d.stop = d.statistic <= d.threshold;
    d.calls = e.calls;
    return d;
}

TreeRulePolicy::TreeRulePolicy(std::shared_ptr<const FiniteTreeProcess> tree, std::vector<char> stop)
    : tree_(std::move(tree)), stop_(std::move(stop))
{
    if (stop_.size() != static_cast<std::size_t>(tree_->size())) throw DomainError("tree rule: wrong flag count");
}

PolicyDecision TreeRulePolicy::decide(const PathPrefix& prefix, std::uint64_t) const
{
    const int node = tree_->locate(prefix.values(), prefix.t());
    PolicyDecision d;
    d.t = prefix.t();
    d.payout = tree_->node(node).payout;
    d.stop = stop_[static_cast<std::size_t>(node)] || tree_->is_leaf(node);
    d.statistic = d.stop ? 1.0 : 0.0;
    d.threshold = 0.5;
    return d;
}

PolicyDecision FixedTimePolicy::decide(const PathPrefix& prefix, std::uint64_t) const
{
    PolicyDecision d;
    d.t = prefix.t();
    d.stop = d.t >= time_;
    d.statistic = d.t;
    d.threshold = time_;
    return d;
}

EpisodeResult run_episode(const StoppingProblem& problem, const OnlinePolicy& policy, std::uint64_t episode_seed)
{
    const RandomStream master(episode_seed);
    auto path_stream = master.child(0);
    const int T = problem.horizon();
    const auto D = static_cast<std::size_t>(problem.dim());
    std::vector<double> path(D * static_cast<std::size_t>(T));
    EpisodeResult out;
    for (int t = 1; t <= T; ++t) {
        problem.simulator().extend(path, t - 1, t, path_stream);
        PathPrefix prefix(problem.dim(), t, std::vector<double>(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(D * t)));
        PolicyDecision d;
        try {
            d = policy.decide(prefix, master.child(static_cast<std::uint64_t>(t)).key());
        } catch (const BudgetExceeded& e) {
            throw PolicyAborted(e, out);
        }
        d.payout = problem.payout(t, prefix);
        if (t == T) d.stop = true;
        out.calls += d.calls;
        out.trace.push_back(d);
        if (d.stop) {
            out.stop_time = t;
            out.payout = d.payout;
            break;
        }
    }
    return out;
}

PolicyEvaluation evaluate_policy(const StoppingProblem& problem, const OnlinePolicy& policy, std::int64_t episodes,
                                 std::uint64_t seed, int workers, bool keep_traces)
{
    if (episodes < 1) throw DomainError("evaluate_policy: episodes must be at least 1");
    std::vector<EpisodeResult> results(static_cast<std::size_t>(episodes));
    const RandomStream master(seed);
    parallel_for(results.size(), workers,
                 [&](std::size_t i) { results[i] = run_episode(problem, policy, master.child(i).key()); });

    PolicyEvaluation ev;
    ev.episodes = episodes;
    std::vector<double> payouts(results.size());
    std::vector<double> times(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        payouts[i] = results[i].payout;
        times[i] = results[i].stop_time;
        ev.calls += results[i].calls;
    }
    const auto me = mean_and_error(payouts);
    ev.mean = me.mean;
    ev.std_error = me.std_error;
    ev.mean_stop_time = mean_and_error(times).mean;
    if (keep_traces) ev.traces = std::move(results);
    return ev;
}

}  // namespace dualstop
