#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dualstop/nested_mc.hpp"
#include "dualstop/tree.hpp"

namespace dualstop {

/// A stopping rule on a tree: per-node stop flags (leaves always stop) and
/// its exact value E[Z_tau].
struct TreeRule {
    std::vector<char> stop;
    double value = 0.0;
};

/// Stop the first time Z^k_t <= 1/k. Needs payouts in [0,1].
TreeRule tau_k_exact(const FiniteTreeProcess& tree, int k);

/// Stop the first time Z_t - MAR_t <= tol (MAR from K levels).
TreeRule tau_star_exact(const FiniteTreeProcess& tree, int K, double tol);

struct PolicyDecision {
    int t = 1;
    bool stop = false;
    double statistic = 0.0;  ///< NaN when no statistic is computed (forced stop)
    double threshold = 0.0;
    double payout = 0.0;
    std::uint64_t calls = 0;
};

/// Online stopping rule. decide() sees only the first t columns of the path;
/// `seed` identifies the randomness of this decision.
class OnlinePolicy {
public:
    virtual ~OnlinePolicy() = default;
    [[nodiscard]] virtual PolicyDecision decide(const PathPrefix& prefix, std::uint64_t seed) const = 0;
};

/// tau_eps: at t < T estimate Z^{ceil(4/eps)}_t and stop when it is at most
/// eps/2. Strict mode estimates at (eps/4, eps/(4T)); practical mode uses the
/// given counts and carries no guarantee.
class TauEpsPolicy final : public OnlinePolicy {
public:
    TauEpsPolicy(const StoppingProblem& problem, double eps, SampleBudget budget);
    [[nodiscard]] PolicyDecision decide(const PathPrefix& prefix, std::uint64_t seed) const override;
    [[nodiscard]] int level() const noexcept { return level_; }

private:
    const StoppingProblem& problem_;
    double eps_;
    int level_;
    SampleBudget budget_;
};

/// Replays per-node stop flags of a tree rule.
class TreeRulePolicy final : public OnlinePolicy {
public:
    TreeRulePolicy(std::shared_ptr<const FiniteTreeProcess> tree, std::vector<char> stop);
    [[nodiscard]] PolicyDecision decide(const PathPrefix& prefix, std::uint64_t seed) const override;

private:
    std::shared_ptr<const FiniteTreeProcess> tree_;
    std::vector<char> stop_;
};

/// Stops at a fixed time (or at T if that comes first).
class FixedTimePolicy final : public OnlinePolicy {
public:
    explicit FixedTimePolicy(int time) : time_(time) {}
    [[nodiscard]] PolicyDecision decide(const PathPrefix& prefix, std::uint64_t seed) const override;

private:
    int time_;
};

struct EpisodeResult {
    int stop_time = 1;
    double payout = 0.0;
    std::uint64_t calls = 0;
    std::vector<PolicyDecision> trace;
};

/// Raised when a decision runs out of budget; carries the trace so far.
class PolicyAborted : public BudgetExceeded {
public:
    PolicyAborted(const BudgetExceeded& cause, EpisodeResult partial)
        : BudgetExceeded(std::string("policy aborted: ") + cause.what(), cause.predicted_calls(), cause.ceiling()),
          partial_(std::move(partial))
    {
    }
    [[nodiscard]] const EpisodeResult& partial() const noexcept { return partial_; }

private:
    EpisodeResult partial_;
};

/// One episode: columns are revealed one at a time from the path stream and
/// the policy decides after each; stopping is forced at T.
EpisodeResult run_episode(const StoppingProblem& problem, const OnlinePolicy& policy, std::uint64_t episode_seed);

struct PolicyEvaluation {
    double mean = 0.0;
    double std_error = 0.0;
    double mean_stop_time = 0.0;
    std::uint64_t calls = 0;
    std::int64_t episodes = 0;
    std::vector<EpisodeResult> traces;  ///< kept only on request
};

PolicyEvaluation evaluate_policy(const StoppingProblem& problem, const OnlinePolicy& policy, std::int64_t episodes,
                                 std::uint64_t seed, int workers = 1, bool keep_traces = false);

}  // namespace dualstop
