#pragma once

// Reference implementations used only by the tests. None of them calls into
// the library's numerical code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "thmm/hmm_mle.hpp"

namespace thmm::oracle {

inline double mixture_pdf(const GaussianMixture& g, double u) {
  double s = 0.0;
  for (std::size_t d = 0; d < g.weights.size(); ++d) {
    const double z = (u - g.means[d]) / g.stds[d];
    s += g.weights[d] * std::exp(-0.5 * z * z) / (g.stds[d] * std::sqrt(2.0 * std::numbers::pi));
  }
  return s;
}

// Left null vector of (Q - I) normalized to sum one, by Householder QR.
inline Eigen::VectorXd stationary(const Eigen::MatrixXd& q) {
  const Eigen::Index r = q.rows();
  Eigen::MatrixXd a(r + 1, r);
  a.topRows(r) = q.transpose() - Eigen::MatrixXd::Identity(r, r);
  a.row(r).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(r + 1);
  b[r] = 1.0;
  return a.colPivHouseholderQr().solve(b);
}

// Visits every state path z_1..z_n; f(path, log_weight).
template <class F>
void for_each_path(const HmmParams& p, std::span<const double> y, F&& f) {
  const std::size_t r = p.states();
  const std::size_t n = y.size();
  const Eigen::VectorXd mu = stationary(p.transition);
  std::vector<std::size_t> z(n, 0);
  while (true) {
    double lw = std::log(mu[static_cast<Eigen::Index>(z[0])]) +
                std::log(mixture_pdf(p.noise, y[0] - p.support[z[0]]));
    for (std::size_t k = 1; k < n; ++k) {
      lw += std::log(p.transition(static_cast<Eigen::Index>(z[k - 1]), static_cast<Eigen::Index>(z[k])));
      lw += std::log(mixture_pdf(p.noise, y[k] - p.support[z[k]]));
    }
    f(z, lw);
    std::size_t k = 0;
    while (k < n && ++z[k] == r) z[k++] = 0;
    if (k == n) break;
  }
}

inline double path_sum_loglik(const HmmParams& p, std::span<const double> y) {
  std::vector<double> lws;
  for_each_path(p, y, [&](const std::vector<std::size_t>&, double lw) { lws.push_back(lw); });
  const double top = *std::max_element(lws.begin(), lws.end());
  double s = 0.0;
  for (double lw : lws) s += std::exp(lw - top);
  return top + std::log(s);
}

// n x r matrix of P(Z_k = z | Y) by exhaustive enumeration.
inline Eigen::MatrixXd path_sum_posteriors(const HmmParams& p, std::span<const double> y) {
  const double ll = path_sum_loglik(p, y);
  Eigen::MatrixXd post = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()),
                                               static_cast<Eigen::Index>(p.states()));
  for_each_path(p, y, [&](const std::vector<std::size_t>& z, double lw) {
    const double w = std::exp(lw - ll);
    for (std::size_t k = 0; k < z.size(); ++k) {
      post(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(z[k])) += w;
    }
  });
  return post;
}

inline HmmParams random_params(std::mt19937_64& gen, std::size_t r, std::size_t components,
                               double q_min = 0.05) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HmmParams p;
  p.support.resize(r);
  double x = -1.0 + 0.3 * u(gen);
  for (std::size_t i = 0; i < r; ++i) {
    p.support[i] = x;
    x += 0.2 + 0.6 * u(gen);
  }
  p.transition.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(r); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(r); ++j) {
      p.transition(i, j) = q_min + u(gen);
      s += p.transition(i, j);
    }
    p.transition.row(i) /= s;
  }
  GaussianMixture g;
  double ws = 0.0;
  for (std::size_t d = 0; d < components; ++d) {
    g.weights.push_back(0.2 + u(gen));
    ws += g.weights.back();
    g.means.push_back(0.6 * (u(gen) - 0.5));
    g.stds.push_back(0.08 + 0.3 * u(gen));
  }
  double center = 0.0;
  for (std::size_t d = 0; d < components; ++d) {
    g.weights[d] /= ws;
    center += g.weights[d] * g.means[d];
  }
  for (double& m : g.means) m -= center;
  p.noise = g;
  return p;
}

// Observations drawn from the parameters with std::mt19937_64.
inline std::vector<double> random_series(std::mt19937_64& gen, const HmmParams& p, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  auto pick = [&](auto&& prob, std::size_t size) {
    double v = u(gen), acc = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      acc += prob(i);
      if (v < acc) return i;
    }
    return size - 1;
  };
  const Eigen::VectorXd mu = stationary(p.transition);
  const std::size_t r = p.states();
  std::vector<double> y(n);
  std::size_t state = pick([&](std::size_t i) { return mu[static_cast<Eigen::Index>(i)]; }, r);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      state = pick([&](std::size_t j) {
        return p.transition(static_cast<Eigen::Index>(state), static_cast<Eigen::Index>(j));
      }, r);
    }
    const std::size_t d = pick([&](std::size_t i) { return p.noise.weights[i]; }, p.noise.components());
    y[k] = p.support[state] + p.noise.means[d] + p.noise.stds[d] * z(gen);
  }
  return y;
}

/**
 * min c.x subject to A x = b, x >= 0, by the two-phase dense tableau simplex
 * with Bland's rule. Meant for a few dozen variables.
 */
inline double dense_lp_min(Eigen::MatrixXd a, Eigen::VectorXd b, const Eigen::VectorXd& c) {
  constexpr double eps = 1e-12;
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      a.row(i) *= -1.0;
      b[i] = -b[i];
    }
  }
  const Eigen::Index cols = n + m;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, cols + 1);
  t.block(0, 0, m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(cols).head(m) = b;
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  auto pivot = [&](Eigen::Index row, Eigen::Index col) {
    t.row(row) /= t(row, col);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != row && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(row);
    }
    basis[static_cast<std::size_t>(row)] = col;
  };
  auto run = [&](Eigen::Index allowed) {
    for (int iter = 0; iter < 100000; ++iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t(m, j) < -eps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (t(i, enter) > eps) {
          const double ratio = t(i, cols) / t(i, enter);
          if (ratio < best - eps ||
              (std::abs(ratio - best) <= eps && basis[static_cast<std::size_t>(i)] <
                                                    basis[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) throw std::runtime_error("dense_lp_min: unbounded");
      pivot(leave, enter);
    }
    throw std::runtime_error("dense_lp_min: iteration limit");
  };

  // Phase I: minimize the sum of artificials.
  t.row(m).setZero();
  for (Eigen::Index i = 0; i < m; ++i) {
    t.row(m).head(n) -= t.row(i).head(n);
    t(m, cols) -= t(i, cols);
  }
  run(cols);
  if (-t(m, cols) > 1e-9) throw std::runtime_error("dense_lp_min: infeasible");
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(t(i, j)) > 1e-9) {
        pivot(i, j);
        break;
      }
    }
  }

  // Phase II over the original columns.
  t.row(m).setZero();
  t.row(m).head(n) = c.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bi = basis[static_cast<std::size_t>(i)];
    const double cb = bi < n ? c[bi] : 0.0;
    if (cb != 0.0) t.row(m) -= cb * t.row(i);
  }
  run(n);
  double value = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bi = basis[static_cast<std::size_t>(i)];
    if (bi < n) value += c[bi] * t(i, cols);
  }
  return value;
}

// Optimal transport cost between two weight vectors through dense_lp_min.
inline double lp_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                           const std::vector<double>& cost) {
  const auto m = static_cast<Eigen::Index>(supply.size());
  const auto n = static_cast<Eigen::Index>(demand.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + n, m * n);
  Eigen::VectorXd b(m + n);
  Eigen::VectorXd c(m * n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, i * n + j) = 1.0;
      a(m + j, i * n + j) = 1.0;
      c[i * n + j] = cost[static_cast<std::size_t>(i * n + j)];
    }
    b[i] = supply[static_cast<std::size_t>(i)];
  }
  for (Eigen::Index j = 0; j < n; ++j) b[m + j] = demand[static_cast<std::size_t>(j)];
  return dense_lp_min(a, b, c);
}

}  // namespace thmm::oracle
