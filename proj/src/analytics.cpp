#include "dualstop/analytics.hpp"

#include <cmath>

#include "dualstop/errors.hpp"

namespace dualstop {
namespace {

void require_levels(int K)
{
    if (K < 1) throw DomainError("recursion: K must be at least 1");
}

}  // namespace

double two_point_gap(int n, int k)
{
    if (n < 2) throw DomainError("two_point_gap: n must be at least 2");
    if (k < 1) throw DomainError("two_point_gap: k must be at least 1");
    return std::pow(1.0 - 1.0 / n, k) / n;
}

RecursionTrace expo_balanced_seq(int K)
{
    require_levels(K);
    RecursionTrace r{"expo_balanced", {}, {}};
    double c = 1.0;
    for (int k = 1; k <= K + 1; ++k) {
        r.values.push_back(c);
        c *= std::exp(-c);
    }
    r.gap.assign(r.values.begin() + 1, r.values.end());
    r.values.pop_back();
    return r;
}

RecursionTrace expo_unbalanced_seq(int K)
{
    require_levels(K);
    RecursionTrace r{"expo_unbalanced", {}, {}};
    double z = 0.5;
    for (int k = 1; k <= K + 1; ++k) {
        r.values.push_back(z);
        z = z * std::exp(-z) + 0.5 * std::expm1(-z);
    }
    r.gap.assign(r.values.begin() + 1, r.values.end());
    r.values.pop_back();
    return r;
}

RecursionTrace uniform_balanced_seq(int K)
{
    require_levels(K);
    RecursionTrace r{"uniform_balanced", {}, {}};
    double b = 1.0;
    for (int k = 1; k <= K + 1; ++k) {
        r.values.push_back(b);
        b *= 1.0 - b / 2.0;
    }
    for (int k = 1; k <= K; ++k) r.gap.push_back(r.values[k] * r.values[k]);
    r.values.pop_back();
    return r;
}

std::vector<double> iid_uniform_opt_trace(int horizon)
{
    if (horizon < 1) throw DomainError("iid_uniform_opt: T must be at least 1");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    double v = 0.5;
    for (int t = 1; t <= horizon; ++t) {
        out.push_back(v);
        v -= 0.5 * v * v;
    }
    return out;
}

double iid_uniform_opt(int horizon)
{
    return iid_uniform_opt_trace(horizon).back();
}

std::vector<double> iid_uniform_sq_opt_trace(int t)
{
    if (t < 1) throw DomainError("iid_uniform_sq_opt: t must be at least 1");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(t));
    double y = 1.0 / 3.0;
    for (int s = 1; s <= t; ++s) {
        out.push_back(y);
        y -= (2.0 / 3.0) * y * std::sqrt(y);
    }
    return out;
}

double iid_uniform_sq_opt(int t)
{
    return iid_uniform_sq_opt_trace(t).back();
}

}  // namespace dualstop
