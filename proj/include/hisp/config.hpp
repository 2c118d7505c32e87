#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hisp/filter.hpp"
#include "hisp/ospa.hpp"
#include "hisp/scenario.hpp"

namespace hisp {

enum class FilterSelection { hisp, phd, both };

FilterSelection parse_filter_selection(const std::string& name);

/// "tail" or "any"; throws std::invalid_argument otherwise.
MergeScope parse_merge_scope(const std::string& name);

struct RunConfig {
    std::optional<int> case_id;
    std::string scenario_path;
    int runs = 50;
    std::uint64_t seed = 7;
    FilterSelection filter = FilterSelection::both;
    std::string out_dir;
    OspaParams ospa;
    FilterConfig filter_config;

    /// Throws std::invalid_argument with a readable message.
    void validate() const;
};

/// Output directory used when none is given: $HISP_OUT_DIR, else "results".
std::string default_output_dir();

/// Scenario from JSON text. Keys (all optional): case, dt, duration, r_min,
/// r_max, cell_dr, cell_dtheta, sigma_r, sigma_theta, p_d, p_fa, p_b,
/// sigma_v, q_var, truth_q_var, p_s, initial_states. The case preset (default
/// 1) is applied first and the other keys override it. Run keys with the same
/// names as the command-line flags (runs, seed, filter, out, ospa_c, ospa_p,
/// tau, dm, merge_scope, tau_c, tau_uc, gate) are copied into `run` when
/// given. Unknown keys are rejected.
Scenario parse_scenario(const std::string& json_text, RunConfig* run = nullptr);

/// Reads and parses a scenario file.
Scenario load_scenario(const std::string& path, RunConfig* run = nullptr);

}  // namespace hisp
