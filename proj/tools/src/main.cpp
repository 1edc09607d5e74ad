#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "experiment_config.hpp"
#include "thmm/error_criterion.hpp"
#include "thmm/harness.hpp"
#include "thmm/json_io.hpp"
#include "thmm/ls_estimator.hpp"
#include "thmm/model_selection.hpp"
#include "thmm/series_io.hpp"
#include "thmm/simulator.hpp"

using nlohmann::json;

namespace {

thmm::FiniteHmmTruth load_truth(const std::string& path) {
  const json j = thmm::read_json_file(path);
  thmm::FiniteHmmTruth truth;
  truth.support = j.at("support").get<std::vector<double>>();
  const auto q = j.at("Q").get<std::vector<double>>();
  const auto r = static_cast<Eigen::Index>(truth.support.size());
  if (q.size() != truth.support.size() * truth.support.size()) {
    throw std::invalid_argument(path + ": Q must have r*r entries");
  }
  truth.transition.resize(r, r);
  for (Eigen::Index a = 0; a < r; ++a) {
    for (Eigen::Index b = 0; b < r; ++b) truth.transition(a, b) = q[static_cast<std::size_t>(a * r + b)];
  }
  if (j.contains("initial")) {
    const auto init = j.at("initial").get<std::vector<double>>();
    truth.initial = Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(init.size()));
  } else {
    truth.initial = thmm::stationary_distribution(truth.transition);
  }
  truth.validate();
  return truth;
}

// Accepts a bare HmmParams object or any fit-mle / select-model / harness output.
thmm::HmmParams load_hmm_params(const std::string& path) {
  const json j = thmm::read_json_file(path);
  for (const json* node : {&j, j.contains("fit") ? &j.at("fit") : nullptr,
                           j.contains("best") ? &j.at("best") : nullptr}) {
    if (!node) continue;
    if (node->contains("support")) return node->get<thmm::HmmParams>();
    if (node->contains("params")) return node->at("params").get<thmm::HmmParams>();
  }
  throw std::invalid_argument(path + ": no HMM parameters found (LS fits cannot be evaluated in W1)");
}

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    thmm::write_json_file(out, j);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Translation hidden Markov model estimation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "thmm 0.1.0");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate an observed series");
  std::string sim_model = "cosine", sim_truth, sim_out;
  thmm::CosineModelConfig cos_cfg;
  bool sim_no_latent = false;
  sim->add_option("--model", sim_model, "cosine or finite")->check(CLI::IsMember({"cosine", "finite"}));
  sim->add_option("--sigma-x", cos_cfg.sigma_x, "Random-walk step std (cosine)");
  sim->add_option("--sigma-y", cos_cfg.sigma_y, "Observation noise std");
  sim->add_option("--n", cos_cfg.n, "Series length");
  sim->add_option("--seed", cos_cfg.seed, "Seed");
  sim->add_option("--truth", sim_truth, "JSON {support, Q[, initial]} for --model finite");
  sim->add_flag("--no-latent", sim_no_latent, "Do not store the latent chain");
  sim->add_option("--out", sim_out, "Output .csv or .bin")->required();

  // fit-ls
  auto* fls = app.add_subcommand("fit-ls", "Least-squares characteristic-function fit");
  std::string fls_in, fls_out, fls_trace;
  thmm::LsFitConfig ls_cfg;
  fls->add_option("--input", fls_in, "Series file")->required();
  fls->add_option("--r", ls_cfg.r, "Grid order");
  fls->add_option("--budget", ls_cfg.budget, "Criterion evaluations");
  fls->add_option("--seed", ls_cfg.seed, "Seed");
  fls->add_option("--nodes", ls_cfg.nodes, "Monte Carlo weight nodes");
  fls->add_option("--sigma-w", ls_cfg.sigma_w, "Weight node std");
  fls->add_option("--sigma0", ls_cfg.sigma0, "Initial CMA-ES step size");
  fls->add_option("--trace", fls_trace, "Optimizer trace CSV");
  fls->add_option("--out", fls_out, "Output JSON (stdout if omitted)");

  // fit-mle
  auto* fmle = app.add_subcommand("fit-mle", "Maximum-likelihood fit by EM");
  std::string fmle_in, fmle_out, fmle_pen = "paper-simple";
  std::size_t fmle_r = 10, fmle_d = 2;
  std::optional<double> fmle_c;
  thmm::EmConfig em_cfg;
  fmle->add_option("--input", fmle_in, "Series file")->required();
  fmle->add_option("--r", fmle_r, "Support size");
  fmle->add_option("--D", fmle_d, "Mixture components");
  fmle->add_option("--seed", em_cfg.seed, "Seed");
  fmle->add_option("--n-starts", em_cfg.n_starts, "EM restarts");
  fmle->add_option("--max-iters", em_cfg.max_iters, "EM iterations per start");
  fmle->add_option("--tol", em_cfg.tol, "Relative log-likelihood tolerance");
  fmle->add_flag("--update-support", em_cfg.update_support, "Also update support points");
  fmle->add_option("--penalty", fmle_pen, "Penalty form for the reported penalized value");
  fmle->add_option("--penalty-constant", fmle_c, "Penalty constant");
  fmle->add_option("--out", fmle_out, "Output JSON (stdout if omitted)");

  // select-model
  auto* sel = app.add_subcommand("select-model", "Penalized-likelihood choice of (r, D)");
  std::string sel_in, sel_out, sel_rgrid = "2:10", sel_dgrid = "1:2", sel_pen = "paper-simple";
  std::optional<double> sel_c;
  thmm::EmConfig sel_em;
  sel->add_option("--input", sel_in, "Series file")->required();
  sel->add_option("--r-grid", sel_rgrid, "e.g. 2:30 or 2,3,5");
  sel->add_option("--D-grid", sel_dgrid, "e.g. 1:4");
  sel->add_option("--penalty", sel_pen, "paper-simple, appendix or slope-heuristic");
  sel->add_option("--penalty-constant", sel_c,
                  "Constant (appendix defaults to the calibrated value; slope-heuristic <= 0 fits it)");
  sel->add_option("--seed", sel_em.seed, "Seed");
  sel->add_option("--n-starts", sel_em.n_starts, "EM restarts");
  sel->add_option("--max-iters", sel_em.max_iters, "EM iterations per start");
  sel->add_flag("--update-support", sel_em.update_support, "Also update support points");
  sel->add_option("--out", sel_out, "Output JSON (stdout if omitted)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "W1 error of a fitted pair law against the truth");
  std::string ev_fit, ev_model = "cosine", ev_truth, ev_out;
  double ev_sigma_x = 0.1;
  thmm::ErrorCriterionConfig ev_cfg;
  ev->add_option("--fit", ev_fit, "fit-mle / select-model JSON")->required();
  ev->add_option("--model", ev_model, "cosine or finite")->check(CLI::IsMember({"cosine", "finite"}));
  ev->add_option("--sigma-x", ev_sigma_x, "Random-walk step std (cosine)");
  ev->add_option("--sigma-y", cos_cfg.sigma_y, "Accepted for symmetry; the pair law does not depend on it");
  ev->add_option("--truth", ev_truth, "JSON {support, Q[, initial]} for --model finite");
  ev->add_option("--nx", ev_cfg.n_x, "Pairs per replicate");
  ev->add_option("--nw", ev_cfg.n_w, "Replicates");
  ev->add_option("--seed", ev_cfg.seed, "Seed");
  ev->add_option("--out", ev_out, "Output JSON (stdout if omitted)");

  // reproduce
  auto* rep = app.add_subcommand("reproduce", "Run a preset sweep");
  std::string rep_fig, rep_config, rep_out;
  bool rep_full = false;
  std::optional<std::size_t> rep_seeds;
  rep->add_option("preset", rep_fig, "Preset: fig-mle or fig-ls")
      ->required()
      ->check(CLI::IsMember({"fig-mle", "fig-ls"}));
  rep->add_option("--config", rep_config, "TOML overrides");
  rep->add_flag("--full", rep_full, "Full grid instead of desk scale");
  rep->add_option("--out", rep_out, "Output directory");
  rep->add_option("--seeds", rep_seeds, "Replicates per cell");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::size_t workers = thmm::cli::workers_from_env();

    if (sim->parsed()) {
      thmm::TimeSeries series;
      if (sim_model == "cosine") {
        series = thmm::simulate_cosine(cos_cfg);
      } else {
        if (sim_truth.empty()) throw std::invalid_argument("--model finite needs --truth");
        series = thmm::simulate_finite_hmm(load_truth(sim_truth), cos_cfg.sigma_y, cos_cfg.n, cos_cfg.seed);
      }
      if (sim_no_latent) series.x.reset();
      thmm::save_series(sim_out, series);
      return 0;
    }

    if (fls->parsed()) {
      ls_cfg.workers = workers;
      const thmm::TimeSeries series = thmm::load_series(fls_in);
      const thmm::LsFitResult fit = thmm::fit_ls(series, ls_cfg);
      json out = {{"config", ls_cfg}, {"fit", fit}};
      if (series.has_latent()) out["l1_score"] = thmm::l1_score(fit.density, series);
      if (!fls_trace.empty()) {
        std::ofstream tr(fls_trace);
        if (!tr) throw std::runtime_error("cannot write " + fls_trace);
        tr << std::setprecision(17) << "generation,evals,best_value\n";
        for (const auto& row : fit.trace) {
          tr << row.generation << ',' << row.evaluations << ',' << row.best_value << '\n';
        }
      }
      emit(out, fls_out);
      return 0;
    }

    if (fmle->parsed()) {
      thmm::PenaltySpec pen{thmm::parse_penalty_form(fmle_pen), 1.0};
      if (pen.form == thmm::PenaltyForm::LogLog) pen.constant = thmm::kCalibratedLogLogConstant;
      if (fmle_c) pen.constant = *fmle_c;
      const thmm::TimeSeries series = thmm::load_series(fmle_in);
      const thmm::FitReport fit = thmm::fit_mle(series.y, fmle_r, fmle_d, em_cfg, pen);
      emit({{"config", em_cfg}, {"r", fmle_r}, {"D", fmle_d}, {"fit", fit}}, fmle_out);
      return 0;
    }

    if (sel->parsed()) {
      thmm::PenaltySpec pen{thmm::parse_penalty_form(sel_pen), 1.0};
      if (pen.form == thmm::PenaltyForm::LogLog) pen.constant = thmm::kCalibratedLogLogConstant;
      if (pen.form == thmm::PenaltyForm::SlopeHeuristic) pen.constant = 0.0;
      if (sel_c) pen.constant = *sel_c;
      const thmm::TimeSeries series = thmm::load_series(sel_in);
      const auto rg = thmm::cli::parse_grid(sel_rgrid);
      const auto dg = thmm::cli::parse_grid(sel_dgrid);
      const thmm::SelectionResult res = thmm::select_model(series.y, rg, dg, sel_em, pen);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
      emit({{"best", res.best},
            {"table", res.table},
            {"warnings", res.warnings},
            {"penalty", {{"form", thmm::to_string(res.penalty.form)}, {"constant", res.penalty.constant}}}},
           sel_out);
      return 0;
    }

    if (ev->parsed()) {
      ev_cfg.workers = workers;
      const thmm::HmmParams params = load_hmm_params(ev_fit);
      thmm::PairSampler sampler;
      if (ev_model == "cosine") {
        sampler = thmm::cosine_pair_sampler(ev_sigma_x);
      } else {
        if (ev_truth.empty()) throw std::invalid_argument("--model finite needs --truth");
        sampler = thmm::finite_pair_sampler(load_truth(ev_truth));
      }
      emit(thmm::error_criterion(params, sampler, ev_cfg), ev_out);
      return 0;
    }

    if (rep->parsed()) {
      thmm::ExperimentSpec spec =
          rep_fig == "fig-mle" ? thmm::cli::fig_mle_preset(rep_full) : thmm::cli::fig_ls_preset(rep_full);
      spec.workers = workers;
      if (!rep_config.empty()) {
        thmm::cli::apply_config(thmm::cli::TomlDocument::parse_file(rep_config), spec);
      }
      if (rep_seeds) spec.n_seeds = *rep_seeds;
      if (!rep_out.empty()) spec.output_dir = rep_out;

      thmm::RunStats stats;
      const auto records = thmm::run_experiment(spec, &stats);
      for (const auto& rec : records) {
        if (!rec.ok) {
          std::cerr << "failed: n=" << rec.n << " r=" << rec.r << " D=" << rec.components
                    << " replicate=" << rec.replicate << ": " << rec.message << '\n';
        }
      }
      std::cout << "cells: " << records.size() << " computed: " << stats.computed
                << " skipped: " << stats.skipped << " failed: " << stats.failed << '\n';
      std::cout << "summary: " << (spec.output_dir / "summary.csv").string() << '\n';
      for (const auto& row : thmm::summarize(records)) {
        std::cout << "  " << row.estimator << " n=" << row.n << " r=" << row.r << " D=" << row.components
                  << "  min " << row.min << "  median " << row.median << "  max " << row.max << '\n';
      }
      bool all_ok = true;
      for (const auto& rec : records) all_ok = all_ok && rec.ok;
      return all_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "thmm: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
