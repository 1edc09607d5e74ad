#include "thmm/ls_estimator.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "thmm/rng.hpp"

namespace thmm {

namespace {
constexpr std::uint64_t kNodeTag = 0x6e6f646573ULL;
constexpr std::uint64_t kOptimizerTag = 0x636d61ULL;
}  // namespace

void LsFitConfig::validate() const {
  if (r == 0) throw std::invalid_argument("LsFitConfig: r must be >= 1");
  if (nodes == 0) throw std::invalid_argument("LsFitConfig: need at least one node");
  if (!(sigma_w > 0.0)) throw std::invalid_argument("LsFitConfig: sigma_w must be positive");
  if (budget == 0) throw std::invalid_argument("LsFitConfig: budget must be positive");
}

WeightNodes ls_weight_nodes(const LsFitConfig& cfg) {
  cfg.validate();
  return WeightNodes::draw(derive_seed({cfg.seed, kNodeTag}), cfg.nodes, cfg.sigma_w);
}

LsFitResult fit_ls(const TimeSeries& series, const LsFitConfig& cfg) {
  cfg.validate();
  if (series.size() < 2) throw std::invalid_argument("fit_ls: series needs length >= 2");
  const auto start = std::chrono::steady_clock::now();

  const EmpCharFn phi_hat(series);
  const MnCriterion criterion(phi_hat, ls_weight_nodes(cfg), cfg.r);

  CmaConfig cma;
  cma.dim = cfg.r * cfg.r;
  cma.sigma0 = cfg.sigma0;
  cma.seed = derive_seed({cfg.seed, kOptimizerTag});
  cma.workers = cfg.workers;
  cma = cma.resolved();
  cma.max_evaluations = std::max(cfg.budget, cma.lambda);
  if (cfg.budget < cma.lambda) {
    // A budget below one generation still evaluates a truncated first generation.
    cma.lambda = cfg.budget;
    cma.mu = std::max<std::size_t>(1, cma.lambda / 2);
    cma.max_evaluations = cfg.budget;
  }

  const auto objective = [&criterion](std::span<const double> theta) {
    return criterion(simplex_reparam(theta));
  };
  const CmaResult opt = cma_minimize(objective, cma);

  LsFitResult out;
  out.density = simplex_reparam(opt.best_point);
  out.criterion_value = criterion(out.density);
  out.trace = opt.trace;
  out.evaluations = opt.evaluations;
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<double> empirical_pair_frequencies(const std::vector<double>& latent,
                                               const GridDensity2D& geometry) {
  const std::size_t n = latent.size();
  if (n < 2) throw std::invalid_argument("empirical_pair_frequencies: need n >= 2");
  const std::size_t r = geometry.r;
  std::vector<std::size_t> counts(r * r, 0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t i = geometry.cell_of(latent[k]);
    const std::size_t j = geometry.cell_of(latent[k + 1]);
    ++counts[i * r + j];
  }
  std::vector<double> freq(r * r);
  for (std::size_t c = 0; c < freq.size(); ++c) {
    freq[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
  }
  return freq;
}

double l1_score(const GridDensity2D& fit, const TimeSeries& latent) {
  if (!latent.has_latent()) throw std::invalid_argument("l1_score: series has no latent path");
  if (fit.r == 0 || fit.p.size() != fit.r * fit.r) {
    throw std::invalid_argument("l1_score: malformed grid density");
  }
  const auto emp = empirical_pair_frequencies(*latent.x, fit);
  double total = 0.0;
  for (std::size_t k = 0; k < emp.size(); ++k) total += std::abs(fit.p[k] - emp[k]);
  return total / static_cast<double>(fit.r * fit.r);
}

}  // namespace thmm
