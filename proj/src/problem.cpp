#include "dualstop/problem.hpp"

#include <algorithm>
#include <sstream>

namespace dualstop {

PathPrefix::PathPrefix(int dim, int t, std::vector<double> values) : dim_(dim), t_(t), values_(std::move(values))
{
    if (dim < 1) throw DomainError("path prefix: dimension must be positive");
    if (t < 0) throw DomainError("path prefix: negative length");
    if (values_.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(t))
        throw DomainError("path prefix: expected D*t values");
}

std::span<const double> PathPrefix::column(int s) const
{
    if (s < 1 || s > t_) throw DomainError("path prefix: column out of range");
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(s - 1) * dim_, static_cast<std::size_t>(dim_));
}

PathPrefix PathPrefix::truncated(int s) const
{
    if (s < 0 || s > t_) throw DomainError("path prefix: cannot truncate beyond length");
    return PathPrefix(dim_, s, std::vector<double>(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(s) * dim_));
}

void PathSimulator::validate_prefix(std::span<const double> /*path*/, int /*t*/) const {}

StoppingProblem::StoppingProblem(std::shared_ptr<const PathSimulator> simulator,
                                 std::shared_ptr<const PayoutFunction> payout, ProblemTraits traits)
    : simulator_(std::move(simulator)), payout_(std::move(payout)), traits_(std::move(traits))
{
    if (!simulator_ || !payout_) throw DomainError("stopping problem: simulator and payout are required");
    horizon_ = simulator_->horizon();
    dim_ = simulator_->dim();
    if (horizon_ < 1) throw DomainError("stopping problem: horizon must be at least 1");
    if (dim_ < 1) throw DomainError("stopping problem: dimension must be at least 1");
    if (traits_.normalized && !traits_.bound) traits_.bound = 1.0;
}

PathPrefix StoppingProblem::sample_path(const PathPrefix& prefix, RandomStream& rng) const
{
    if (prefix.dim() != dim_) throw DomainError("sample_path: prefix dimension mismatch");
    if (prefix.t() > horizon_) throw DomainError("sample_path: prefix longer than horizon");
    std::vector<double> path(static_cast<std::size_t>(dim_) * horizon_);
    std::copy(prefix.values().begin(), prefix.values().end(), path.begin());
    simulator_->validate_prefix(path, prefix.t());
    if (prefix.t() < horizon_) simulator_->extend(path, prefix.t(), horizon_, rng);
    return PathPrefix(dim_, horizon_, std::move(path));
}

double StoppingProblem::payout(int t, const PathPrefix& prefix) const
{
    if (t < 1 || t > horizon_) throw DomainError("payout: time outside [1,T]");
    if (prefix.t() < t) throw DomainError("payout: prefix shorter than t");
    return payout(t, prefix.values());
}

void StoppingProblem::report_bad_payout(int t, double z) const
{
    std::ostringstream os;
    os << "payout of '" << traits_.name << "' at t=" << t << " is " << z;
    os << (traits_.normalized ? ", outside [0,1]" : ", negative");
    throw InvariantViolation(os.str());
}

StoppingProblem StoppingProblem::with_payout(std::shared_ptr<const PayoutFunction> payout, ProblemTraits traits) const
{
    return StoppingProblem(simulator_, std::move(payout), std::move(traits));
}

TruncatedComplementPayout::TruncatedComplementPayout(std::shared_ptr<const PayoutFunction> base, double cap)
    : base_(std::move(base)), cap_(cap)
{
    if (!(cap > 0.0)) throw DomainError("truncation level U must be positive");
}

double TruncatedComplementPayout::operator()(int t, std::span<const double> path) const
{
    return 1.0 - std::min(cap_, (*base_)(t, path)) / cap_;
}

StoppingProblem truncated_complement(const StoppingProblem& problem, double cap)
{
    ProblemTraits traits;
    traits.name = problem.name() + "/complement";
    traits.framework = Framework::Minimize;
    traits.bound = 1.0;
    traits.normalized = true;
    return problem.with_payout(std::make_shared<TruncatedComplementPayout>(problem.payout_ptr(), cap), traits);
}

}  // namespace dualstop
