#include "dualstop/budget.hpp"

#include <cmath>
#include <limits>

#include "dualstop/errors.hpp"

namespace dualstop {
namespace {

void check_unit(double x, const char* what)
{
    if (!(x > 0.0 && x < 1.0)) throw DomainError(std::string(what) + " must lie in (0,1)");
}

// N for derived parameters, which may underflow to 0 deep in a recursion.
double derived_N(double eps, double delta)
{
    if (!(delta > 0.0) || !(eps > 0.0)) return std::numeric_limits<double>::infinity();
    return std::ceil(std::log(2.0 / delta) / (2.0 * eps * eps));
}

}  // namespace

std::string to_string(BudgetMode mode)
{
    return mode == BudgetMode::PaperStrict ? "strict" : "practical";
}

BudgetMode parse_budget_mode(const std::string& text)
{
    if (text == "strict") return BudgetMode::PaperStrict;
    if (text == "practical") return BudgetMode::Practical;
    throw DomainError("budget mode must be 'strict' or 'practical', got '" + text + "'");
}

int SampleBudget::inner_at(int g) const
{
    if (inner.empty()) return 1;
    return inner[static_cast<std::size_t>(std::min<int>(g, static_cast<int>(inner.size()) - 1))];
}

void SampleBudget::validate() const
{
    if (mode == BudgetMode::PaperStrict) {
        check_unit(eps, "eps");
        check_unit(delta, "delta");
    }
    for (auto n : outer)
        if (n < 1) throw DomainError("practical outer counts must be at least 1");
    for (auto m : inner)
        if (m < 1) throw DomainError("practical inner counts must be at least 1");
    if (max_calls && !(*max_calls >= 0.0)) throw DomainError("max_calls must be nonnegative");
    if (workers < 1) throw DomainError("workers must be at least 1");
}

double budget_N_real(double eps, double delta)
{
    check_unit(eps, "eps");
    check_unit(delta, "delta");
    return std::ceil(std::log(2.0 / delta) / (2.0 * eps * eps));
}

std::int64_t budget_N(double eps, double delta)
{
    const double n = budget_N_real(eps, delta);
    if (n > 4.0e18) throw BudgetExceeded("N(eps, delta) does not fit in a 64-bit count", n, 4.0e18);
    return static_cast<std::int64_t>(n);
}

double budget_f(int k, double eps, double delta, int horizon)
{
    if (k < 1) throw DomainError("budget_f: k must be at least 1");
    if (horizon < 1) throw DomainError("budget_f: T must be at least 1");
    check_unit(eps, "eps");
    check_unit(delta, "delta");
    const double m = k - 1;
    const double log_f = 2.0 * m * m * std::log(10.0) - 2.0 * m * std::log(eps) + m * std::log(horizon + 2.0) +
                         m * std::log(1.0 + std::log(1.0 / delta) + std::log(1.0 / eps) + std::log(horizon));
    return std::exp(log_f);
}

double strict_calls_Zk(int k, double eps, double delta, int horizon)
{
    if (k < 1) throw DomainError("strict calls: k must be at least 1");
    if (k == 1) return 0.0;
    const double n = derived_N(eps / 4.0, delta / 4.0);
    if (!std::isfinite(n)) return n;
    const double outer = n * (1.0 + horizon * strict_calls_Zk(k - 1, eps / 4.0, delta / (4.0 * n * horizon), horizon));
    // deep levels overflow long before the second branch matters; skip its 2^k evaluation
    if (!std::isfinite(outer)) return outer;
    return outer + strict_calls_Zk(k - 1, eps / 2.0, delta / 2.0, horizon);
}

double strict_calls_Hk(int k, double eps, double delta, int horizon)
{
    if (k < 1) throw DomainError("strict calls: k must be at least 1");
    const double n = derived_N(eps / 2.0, delta / 2.0);
    if (k == 1 || !std::isfinite(n)) return n;
    return n * (1.0 + horizon * strict_calls_Zk(k, eps / 2.0, delta / (2.0 * n * horizon), horizon));
}

int strict_opt_levels(double eps)
{
    check_unit(eps, "eps");
    return static_cast<int>(std::ceil(2.0 / eps));
}

double strict_calls_OPT(double eps, double delta, int horizon)
{
    const int levels = strict_opt_levels(eps);
    double total = 0.0;
    for (int k = 1; k <= levels; ++k) total += strict_calls_Hk(k, eps / (2.0 * levels), delta / levels, horizon);
    return total;
}

}  // namespace dualstop
