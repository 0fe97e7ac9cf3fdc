#pragma once

// Reference implementations written from the definitions with plain loops.
// They share no code with the library.

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace sci::oracle {

/// Pair-counting AUC: P(score+ > score-) + 0.5 P(tie).
double auc_pairs(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels);

double persistence_loops(const std::vector<double>& path, int t, int w);

double hhi_loops(const std::vector<double>& flows);

/// Modularity from a dense symmetric adjacency matrix (A_ii already holds
/// twice the self-loop weight).
double modularity_dense(const Eigen::MatrixXd& a, const std::vector<int>& part);

/// Best modularity over every set partition of the nodes (n <= 8).
std::pair<double, std::vector<int>> best_partition(const Eigen::MatrixXd& a);

/// Newton's method with explicit loops and Gaussian elimination. Returns
/// (intercept, coefficients...). Sets `converged` false if the iterates blow
/// up or the gradient does not vanish.
std::vector<double> logistic_newton(const std::vector<std::vector<double>>& x,
                                    const std::vector<int>& y, bool& converged);

/// Tick rule from its textual definition.
std::vector<int> tick_signs(const std::vector<double>& prices);

}  // namespace sci::oracle
