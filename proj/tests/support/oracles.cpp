#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace sci::oracle {

double auc_pairs(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

double persistence_loops(const std::vector<double>& path, int t, int w) {
  double gross = 0.0;
  for (int tau = t - w + 1; tau <= t; ++tau) gross += std::fabs(path[tau] - path[tau - 1]);
  return std::fabs(path[t] - path[t - w]) / gross;
}

double hhi_loops(const std::vector<double>& flows) {
  double total = 0.0;
  for (double f : flows) total += std::fabs(f);
  double h = 0.0;
  for (double f : flows) h += (std::fabs(f) / total) * (std::fabs(f) / total);
  return h;
}

double modularity_dense(const Eigen::MatrixXd& a, const std::vector<int>& part) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      k[i] += a(i, j);
      two_m += a(i, j);
    }
  if (two_m == 0.0) return 0.0;
  double q = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (part[i] == part[j]) q += a(i, j) - k[i] * k[j] / two_m;
  return q / two_m;
}

std::pair<double, std::vector<int>> best_partition(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> rgs(n, 0), best(n, 0);
  double best_q = -std::numeric_limits<double>::infinity();
  // Restricted growth strings enumerate each set partition exactly once.
  std::function<void(int, int)> rec = [&](int i, int max_label) {
    if (i == n) {
      const double q = modularity_dense(a, rgs);
      if (q > best_q) {
        best_q = q;
        best = rgs;
      }
      return;
    }
    for (int c = 0; c <= max_label + 1; ++c) {
      rgs[i] = c;
      rec(i + 1, std::max(max_label, c));
    }
  };
  if (n == 0) return {0.0, {}};
  rgs[0] = 0;
  rec(1, 0);
  return {best_q, best};
}

namespace {

std::vector<double> solve(std::vector<std::vector<double>> m, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    std::swap(m[c], m[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[i][k] * x[k];
    x[i] = s / m[i][i];
  }
  return x;
}

}  // namespace

std::vector<double> logistic_newton(const std::vector<std::vector<double>>& x,
                                    const std::vector<int>& y, bool& converged) {
  const std::size_t n = x.size();
  const std::size_t p = x.empty() ? 1 : x[0].size() + 1;
  std::vector<double> beta(p, 0.0);
  auto row = [&](std::size_t i, std::size_t j) { return j == 0 ? 1.0 : x[i][j - 1]; };
  converged = false;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> grad(p, 0.0);
    std::vector<std::vector<double>> hess(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      double eta = 0.0;
      for (std::size_t j = 0; j < p; ++j) eta += beta[j] * row(i, j);
      const double mu = 1.0 / (1.0 + std::exp(-eta));
      for (std::size_t j = 0; j < p; ++j) {
        grad[j] += (y[i] - mu) * row(i, j);
        for (std::size_t k = 0; k < p; ++k) hess[j][k] += mu * (1.0 - mu) * row(i, j) * row(i, k);
      }
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    if (std::sqrt(gnorm) < 1e-11) {
      converged = true;
      return beta;
    }
    const auto step = solve(hess, grad);
    for (std::size_t j = 0; j < p; ++j) beta[j] += step[j];
    for (double b : beta)
      if (!std::isfinite(b) || std::fabs(b) > 60.0) return beta;
  }
  return beta;
}

std::vector<int> tick_signs(const std::vector<double>& prices) {
  std::vector<int> out(prices.size(), 0);
  for (std::size_t i = 1; i < prices.size(); ++i) {
    // Walk back to the last price that differs from this one.
    int sign = 0;
    for (std::size_t j = i; j-- > 0;) {
      if (prices[j] != prices[i]) {
        sign = prices[i] > prices[j] ? 1 : -1;
        break;
      }
    }
    out[i] = sign;
  }
  return out;
}

}  // namespace sci::oracle
