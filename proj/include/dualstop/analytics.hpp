#pragma once

#include <string>
#include <vector>

namespace dualstop {

/// A closed-form sequence, indexed from 1: values[i] is the (i+1)-th term.
/// `gap[k-1]` is OPT - E_k for the matching example where one exists.
struct RecursionTrace {
    std::string name;
    std::vector<double> values;
    std::vector<double> gap;
};

/// (1/n)(1 - 1/n)^k.
double two_point_gap(int n, int k);

/// c_1 = 1, c_{k+1} = c_k exp(-c_k); gap_k = c_{k+1}. Y_1 = 1, Y_2 ~ Exp(1).
RecursionTrace expo_balanced_seq(int K);
/// z_1 = 1/2, z_{k+1} = (z_k + 1/2) exp(-z_k) - 1/2; gap_k = z_{k+1}. Y_1 = 1/2.
RecursionTrace expo_unbalanced_seq(int K);
/// b_1 = 1, b_{k+1} = b_k (1 - b_k/2), a_k = 2 b_k; gap_k = b_{k+1}^2.
RecursionTrace uniform_balanced_seq(int K);

/// OPT(1) = 1/2, OPT(T+1) = OPT(T) - OPT(T)^2 / 2: min of T iid uniforms.
double iid_uniform_opt(int horizon);
/// Whole trace OPT(1..T).
std::vector<double> iid_uniform_opt_trace(int horizon);
/// y_1 = 1/3, y_{t+1} = y_t - (2/3) y_t^{3/2}: squared uniforms.
double iid_uniform_sq_opt(int t);
std::vector<double> iid_uniform_sq_opt_trace(int t);

}  // namespace dualstop
