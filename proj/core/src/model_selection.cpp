#include "thmm/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace thmm {

namespace {

double model_complexity(std::size_t r, std::size_t dim_noise) {
  const double rd = static_cast<double>(r);
  return static_cast<double>(dim_noise) + rd + rd * rd - 1.0;
}

// Slope heuristic: least-squares slope of l_n / n against complexity / n over
// the more complex half of the fitted models; the penalty constant is twice it.
double slope_constant(const std::vector<SelectionRow>& rows, std::size_t n) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : rows) {
    if (!row.fitted) continue;
    pts.emplace_back(model_complexity(row.r, mixture_dimension(row.components)) / static_cast<double>(n),
                     row.loglik / static_cast<double>(n));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(pts.size() / 2));
  if (pts.size() < 2) return 1.0;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (!(sxx > 0.0)) return 1.0;
  const double slope = sxy / sxx;
  return slope > 0.0 ? 2.0 * slope : 1.0;
}

}  // namespace

double penalty(std::size_t n, std::size_t r, std::size_t components, std::size_t dim_noise,
               const PenaltySpec& spec) {
  if (n < 3) throw std::invalid_argument("penalty: n must be >= 3");
  const double nd = static_cast<double>(n);
  const double logn = std::log(nd);
  const double rd = static_cast<double>(r);
  switch (spec.form) {
    case PenaltyForm::Simple:
      return (static_cast<double>(components) + rd * rd) * std::pow(logn, 15) / nd;
    case PenaltyForm::LogLog:
      return spec.constant * model_complexity(r, dim_noise) * std::pow(logn, 14) * std::log(logn) / nd;
    case PenaltyForm::SlopeHeuristic:
      return spec.constant * model_complexity(r, dim_noise) / nd;
  }
  throw std::invalid_argument("penalty: unknown form");
}

SelectionResult select_model(std::span<const double> y, std::span<const std::size_t> r_grid,
                             std::span<const std::size_t> d_grid, const EmConfig& em,
                             const PenaltySpec& pen) {
  if (r_grid.empty() || d_grid.empty()) {
    throw std::invalid_argument("select_model: grids must be nonempty");
  }
  const std::size_t n = y.size();
  const double log_n = std::log(static_cast<double>(n));

  SelectionResult out;
  std::vector<FitReport> fits;
  std::vector<std::size_t> fit_row;
  for (std::size_t r : r_grid) {
    for (std::size_t d : d_grid) {
      SelectionRow row;
      row.r = r;
      row.components = d;
      if (static_cast<double>(r) > log_n) {
        row.skipped = true;
        row.message = "r exceeds log n";
        out.warnings.push_back("skipping r=" + std::to_string(r) + ": r > log n = " +
                               std::to_string(log_n));
        out.table.push_back(row);
        continue;
      }
      try {
        FitReport fit = fit_mle(y, r, d, em, pen);
        row.fitted = true;
        row.loglik = fit.loglik;
        row.iterations = fit.iterations;
        row.converged = fit.converged;
        fits.push_back(std::move(fit));
        fit_row.push_back(out.table.size());
      } catch (const std::exception& e) {
        row.message = e.what();
      }
      out.table.push_back(row);
    }
  }
  if (fits.empty()) {
    std::string msg = "select_model: every fit failed";
    for (const auto& row : out.table) {
      msg += "; (r=" + std::to_string(row.r) + ", D=" + std::to_string(row.components) + "): " +
             (row.message.empty() ? "no fit" : row.message);
    }
    throw std::runtime_error(msg);
  }

  out.penalty = pen;
  if (pen.form == PenaltyForm::SlopeHeuristic && !(pen.constant > 0.0)) {
    out.penalty.constant = slope_constant(out.table, n);
  }

  std::size_t best = fits.size();
  for (std::size_t f = 0; f < fits.size(); ++f) {
    SelectionRow& row = out.table[fit_row[f]];
    row.penalty = penalty(n, row.r, row.components, mixture_dimension(row.components), out.penalty);
    row.penalized = row.loglik / static_cast<double>(n) - row.penalty;
    fits[f].penalized = row.penalized;
    if (best == fits.size()) {
      best = f;
      continue;
    }
    const SelectionRow& cur = out.table[fit_row[best]];
    const bool better = row.penalized > cur.penalized ||
                        (row.penalized == cur.penalized &&
                         (row.r < cur.r || (row.r == cur.r && row.components < cur.components)));
    if (better) best = f;
  }
  out.best = std::move(fits[best]);
  return out;
}

PenaltyForm parse_penalty_form(const std::string& name) {
  if (name == "paper-simple") return PenaltyForm::Simple;
  if (name == "appendix") return PenaltyForm::LogLog;
  if (name == "slope-heuristic") return PenaltyForm::SlopeHeuristic;
  throw std::invalid_argument("unknown penalty form '" + name + "'");
}

std::string to_string(PenaltyForm form) {
  switch (form) {
    case PenaltyForm::Simple:
      return "paper-simple";
    case PenaltyForm::LogLog:
      return "appendix";
    case PenaltyForm::SlopeHeuristic:
      return "slope-heuristic";
  }
  return "unknown";
}

}  // namespace thmm
