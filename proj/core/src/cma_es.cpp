#include "thmm/cma_es.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include <Eigen/Eigenvalues>

#include "thmm/rng.hpp"

namespace thmm {

namespace {

constexpr double kEigenFloor = 1e-14;
constexpr std::uint64_t kInitStream = 0x494e4954ULL;

struct Candidate {
  double value;
  std::size_t index;
};

// Evaluates points[0..count) into values; exceptions become OptimizerFailure
// for the lowest failing index.
void evaluate_batch(const Objective& objective, const std::vector<Eigen::VectorXd>& points,
                    std::size_t count, std::vector<double>& values, std::size_t workers) {
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      try {
        values[k] = objective(std::span<const double>(points[k].data(),
                                                      static_cast<std::size_t>(points[k].size())));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  if (workers <= 1 || count <= 1) {
    run(0, count);
  } else {
    const std::size_t threads = std::min(workers, count);
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(run, count * t / threads, count * (t + 1) / threads);
    }
  }

  for (std::size_t k = 0; k < count; ++k) {
    if (!errors[k]) continue;
    std::string what = "objective failed";
    try {
      std::rethrow_exception(errors[k]);
    } catch (const std::exception& e) {
      what += ": ";
      what += e.what();
    } catch (...) {
    }
    throw OptimizerFailure(what, std::vector<double>(points[k].data(),
                                                     points[k].data() + points[k].size()));
  }
}

}  // namespace

CmaConfig CmaConfig::resolved() const {
  CmaConfig c = *this;
  if (c.dim == 0) throw std::invalid_argument("CmaConfig: dim must be positive");
  if (c.lambda == 0) {
    c.lambda = 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(c.dim))));
  }
  if (c.mu == 0) c.mu = std::max<std::size_t>(1, c.lambda / 2);
  if (c.mu > c.lambda) throw std::invalid_argument("CmaConfig: mu must not exceed lambda");
  if (c.max_evaluations < c.lambda) {
    throw std::invalid_argument("CmaConfig: max_evaluations must be at least lambda");
  }
  if (!(c.sigma0 > 0.0)) throw std::invalid_argument("CmaConfig: sigma0 must be positive");
  if (c.initial_mean && c.initial_mean->size() != c.dim) {
    throw std::invalid_argument("CmaConfig: initial_mean has wrong dimension");
  }
  if (c.workers == 0) c.workers = 1;
  return c;
}

CmaResult cma_minimize(const Objective& objective, const CmaConfig& config) {
  const CmaConfig cfg = config.resolved();
  const auto n = static_cast<Eigen::Index>(cfg.dim);
  const double nd = static_cast<double>(cfg.dim);
  const std::size_t lambda = cfg.lambda;
  const std::size_t mu = cfg.mu;

  Eigen::VectorXd weights(static_cast<Eigen::Index>(mu));
  for (std::size_t i = 0; i < mu; ++i) {
    weights[static_cast<Eigen::Index>(i)] =
        std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
  }
  weights /= weights.sum();
  const double mueff = 1.0 / weights.squaredNorm();

  const double cc = (4.0 + mueff / nd) / (nd + 4.0 + 2.0 * mueff / nd);
  const double cs = (mueff + 2.0) / (nd + mueff + 5.0);
  const double c1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mueff);
  const double cmu =
      std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nd + 2.0) * (nd + 2.0) + mueff));
  const double damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (nd + 1.0)) - 1.0) + cs;
  const double chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));
  const double eigen_period = static_cast<double>(lambda) / (c1 + cmu) / nd / 10.0;

  Eigen::VectorXd mean(n);
  if (cfg.initial_mean) {
    for (Eigen::Index i = 0; i < n; ++i) mean[i] = (*cfg.initial_mean)[static_cast<std::size_t>(i)];
  } else {
    CounterRng init(cfg.seed, kInitStream);
    for (Eigen::Index i = 0; i < n; ++i) mean[i] = init.normal();
  }
  double sigma = cfg.sigma0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd scales = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd inv_sqrt = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd path_c = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd path_s = Eigen::VectorXd::Zero(n);
  std::size_t eigen_evals = 0;

  CmaResult result;
  result.best_value = std::numeric_limits<double>::infinity();

  std::vector<Eigen::VectorXd> points(lambda, Eigen::VectorXd(n));
  std::vector<Eigen::VectorXd> steps(lambda, Eigen::VectorXd(n));
  std::vector<double> values(lambda);
  Eigen::VectorXd z(n);

  for (std::size_t gen = 0;; ++gen) {
    const std::size_t remaining = cfg.max_evaluations - result.evaluations;
    if (remaining == 0) break;
    const std::size_t count = std::min(lambda, remaining);

    CounterRng rng(derive_seed({cfg.seed, gen}), 1);
    for (std::size_t k = 0; k < count; ++k) {
      for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
      steps[k].noalias() = basis * scales.cwiseProduct(z);
      points[k] = mean + sigma * steps[k];
    }
    evaluate_batch(objective, points, count, values, cfg.workers);
    result.evaluations += count;

    std::vector<Candidate> ranked(count);
    for (std::size_t k = 0; k < count; ++k) ranked[k] = {values[k], k};
    std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
      // NaN sorts last.
      const bool an = std::isnan(a.value), bn = std::isnan(b.value);
      if (an != bn) return bn;
      if (a.value != b.value && !an) return a.value < b.value;
      return a.index < b.index;
    });

    const Candidate& top = ranked.front();
    if (result.best_point.empty() || std::isnan(result.best_value) ||
        top.value < result.best_value) {
      result.best_value = top.value;
      const auto& p = points[top.index];
      result.best_point.assign(p.data(), p.data() + p.size());
    }
    result.trace.push_back({gen, result.evaluations, result.best_value});

    if (cfg.target_value && result.best_value <= *cfg.target_value) break;
    if (count < lambda) break;

    // Recombination.
    const Eigen::VectorXd old_mean = mean;
    Eigen::VectorXd step_mean = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < mu; ++i) {
      step_mean += weights[static_cast<Eigen::Index>(i)] * steps[ranked[i].index];
    }
    mean = old_mean + sigma * step_mean;

    // Evolution paths.
    path_s = (1.0 - cs) * path_s + std::sqrt(cs * (2.0 - cs) * mueff) * (inv_sqrt * step_mean);
    const double ps_norm = path_s.norm();
    const double decay = 1.0 - std::pow(1.0 - cs, 2.0 * static_cast<double>(gen + 1));
    const bool hsig = ps_norm / std::sqrt(decay) / chi_n < 1.4 + 2.0 / (nd + 1.0);
    path_c = (1.0 - cc) * path_c;
    if (hsig) path_c += std::sqrt(cc * (2.0 - cc) * mueff) * step_mean;

    // Covariance.
    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < mu; ++i) {
      const auto& s = steps[ranked[i].index];
      rank_mu.noalias() += weights[static_cast<Eigen::Index>(i)] * (s * s.transpose());
    }
    const double hsig_correction = hsig ? 0.0 : cc * (2.0 - cc);
    cov = (1.0 - c1 - cmu) * cov + c1 * (path_c * path_c.transpose() + hsig_correction * cov) +
          cmu * rank_mu;

    sigma *= std::exp((cs / damps) * (ps_norm / chi_n - 1.0));
    if (!std::isfinite(sigma) || sigma <= 0.0 || !cov.allFinite()) break;

    if (static_cast<double>(result.evaluations - eigen_evals) > eigen_period) {
      eigen_evals = result.evaluations;
      cov = 0.5 * (cov + cov.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
      if (eig.info() != Eigen::Success) break;
      Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(kEigenFloor);
      basis = eig.eigenvectors();
      scales = ev.cwiseSqrt();
      cov = basis * ev.asDiagonal() * basis.transpose();
      inv_sqrt = basis * scales.cwiseInverse().asDiagonal() * basis.transpose();
    }
  }
  return result;
}

GridDensity2D simplex_reparam(std::span<const double> theta) {
  const std::size_t m = theta.size();
  const auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(m))));
  if (m == 0 || r * r != m) {
    throw std::invalid_argument("simplex_reparam: length must be a nonzero perfect square");
  }
  const double top = *std::max_element(theta.begin(), theta.end());
  GridDensity2D out;
  out.r = r;
  out.p.resize(m);
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    out.p[k] = std::exp(theta[k] - top);
    total += out.p[k];
  }
  for (double& v : out.p) v /= total;
  return out;
}

}  // namespace thmm
