#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace dualstop {

/// Runs body(i) for i in [0, n) on up to `workers` threads using a static
/// contiguous partition. Bodies must only write to per-index slots; the
/// exception thrown at the lowest index wins.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body)
{
    const std::size_t nw = std::clamp<std::size_t>(workers < 1 ? 1 : static_cast<std::size_t>(workers), 1, std::max<std::size_t>(n, 1));
    if (nw == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::mutex mu;
    std::exception_ptr first_error;
    std::size_t first_index = n;

    auto run_block = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < first_index) {
                    first_index = i;
                    first_error = std::current_exception();
                }
                return;
            }
        }
    };

    std::vector<std::jthread> threads;
    threads.reserve(nw);
    const std::size_t chunk = (n + nw - 1) / nw;
    for (std::size_t w = 0; w < nw; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back(run_block, lo, hi);
    }
    threads.clear();  // joins
    if (first_error) std::rethrow_exception(first_error);
}

/// Pairwise (tree) summation in index order. Result depends only on the data.
inline double pairwise_sum(std::span<const double> xs)
{
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanAndError {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and standard error (n-1 variance) with a fixed reduction order.
inline MeanAndError mean_and_error(std::span<const double> xs)
{
    MeanAndError r;
    if (xs.empty()) return r;
    const double n = static_cast<double>(xs.size());
    r.mean = pairwise_sum(xs) / n;
    if (xs.size() < 2) return r;
    std::vector<double> sq(xs.size());
    std::transform(xs.begin(), xs.end(), sq.begin(), [&](double x) { return (x - r.mean) * (x - r.mean); });
    r.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
    return r;
}

}  // namespace dualstop
