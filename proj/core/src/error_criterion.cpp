#include "thmm/error_criterion.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <stdexcept>
#include <thread>

#include "thmm/rng.hpp"
#include "thmm/wasserstein.hpp"

namespace thmm {

ErrorCriterionResult error_criterion(const DiscreteMeasure2D& fitted, const PairSampler& truth,
                                     const ErrorCriterionConfig& cfg) {
  if (cfg.n_x == 0 || cfg.n_w == 0) {
    throw std::invalid_argument("error_criterion: n_x and n_w must be positive");
  }
  fitted.validate();
  const DiscreteMeasure2D source = fitted.merged();
  W1Options opts;
  opts.max_arcs = cfg.max_arcs;

  ErrorCriterionResult out;
  out.per_replicate.assign(cfg.n_w, 0.0);
  std::vector<std::exception_ptr> errors(cfg.n_w);

  auto replicate = [&](std::size_t j) {
    try {
      std::vector<Point2> pairs = truth(derive_seed({cfg.seed, j}), cfg.n_x);
      if (pairs.size() != cfg.n_x) throw std::runtime_error("error_criterion: sampler returned wrong count");
      out.per_replicate[j] = w1_2d(source, DiscreteMeasure2D::empirical(std::move(pairs)), opts).value;
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, cfg.n_w);
  if (workers == 1) {
    for (std::size_t j = 0; j < cfg.n_w; ++j) replicate(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < cfg.n_w; j = next++) replicate(j);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  double total = 0.0;
  for (double v : out.per_replicate) total += v;
  out.error = total / static_cast<double>(cfg.n_w);
  return out;
}

ErrorCriterionResult error_criterion(const HmmParams& fit, const PairSampler& truth,
                                     const ErrorCriterionConfig& cfg) {
  return error_criterion(pair_law(fit), truth, cfg);
}

PairSampler cosine_pair_sampler(double sigma_x) {
  return [sigma_x](std::uint64_t seed, std::size_t count) {
    return sample_cosine_pairs(sigma_x, count, seed);
  };
}

PairSampler finite_pair_sampler(FiniteHmmTruth truth) {
  return [truth = std::move(truth)](std::uint64_t seed, std::size_t count) {
    return sample_finite_pairs(truth, count, seed);
  };
}

}  // namespace thmm
