#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "thmm/harness.hpp"
#include "toml_lite.hpp"

namespace thmm::cli {

/// Preset sweeps for `reproduce`. Desk scale caps n at 20000 and uses 5
/// replicates; the full preset runs the complete grid.
ExperimentSpec fig_mle_preset(bool full);
ExperimentSpec fig_ls_preset(bool full);

/// Overrides spec fields from a config document. Unknown keys are rejected.
void apply_config(const TomlDocument& doc, ExperimentSpec& spec);

/// "2:30" (inclusive range), "2:30:4" (with step) or "10,20,30".
std::vector<std::size_t> parse_grid(const std::string& text);

/// Worker count from THMM_WORKERS, defaulting to 1.
std::size_t workers_from_env();

}  // namespace thmm::cli
