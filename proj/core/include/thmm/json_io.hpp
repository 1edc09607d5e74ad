#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "thmm/charfn.hpp"
#include "thmm/error_criterion.hpp"
#include "thmm/gaussian_mixture.hpp"
#include "thmm/hmm_mle.hpp"
#include "thmm/ls_estimator.hpp"
#include "thmm/model_selection.hpp"

namespace thmm {

// GridDensity2D: {"r", "p" (row-major), "shift"}
void to_json(nlohmann::json& j, const GridDensity2D& d);
void from_json(const nlohmann::json& j, GridDensity2D& d);

// GaussianMixture: {"weights", "means", "stds"}
void to_json(nlohmann::json& j, const GaussianMixture& g);
void from_json(const nlohmann::json& j, GaussianMixture& g);

// HmmParams: {"support", "Q" (row-major, r*r), "mixture"}
void to_json(nlohmann::json& j, const HmmParams& p);
void from_json(const nlohmann::json& j, HmmParams& p);

void to_json(nlohmann::json& j, const CmaTraceRow& row);
void to_json(nlohmann::json& j, const LsFitConfig& cfg);
void to_json(nlohmann::json& j, const LsFitResult& fit);
void to_json(nlohmann::json& j, const EmConfig& cfg);
void to_json(nlohmann::json& j, const FitReport& fit);
void to_json(nlohmann::json& j, const SelectionRow& row);
void to_json(nlohmann::json& j, const ErrorCriterionResult& res);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes through a temporary file and a rename.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace thmm
