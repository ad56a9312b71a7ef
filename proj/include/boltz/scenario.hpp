#pragma once

#include <string>
#include <vector>

#include "boltz/config.hpp"
#include "boltz/moments.hpp"

namespace boltz {

/**
 * Scenario driver: builds the model/grid/tables from a RunConfig, runs the
 * configured scenario and writes the output set into `config.out_dir`:
 *   relaxation → history.csv   (t, rho_1..rho_Ns, rho, Vx, T, Tint, T1..TNs)
 *   shock      → profile.csv   (x, rho_i…, Vx_i…, Vdiff_i…, Tx, Ty, Tz, T,
 *                               Tint, p, tau_xx, q_x)
 * plus run_manifest.json (config echo, versions, wall time).  Every CSV
 * starts with a `#`-prefixed units comment line followed by the header row;
 * numbers are shortest-round-trip formatted, so identical configurations and
 * thread counts reproduce outputs bit-for-bit.
 */
int run_scenario(const RunConfig& config);

/** Compute-or-load the weight tables for a config, then save to the cache path. */
int precompute_weights(const RunConfig& config);

/**
 * Shift a shock profile so the normalized mixture-density 0.5-crossing sits
 * at x = 0 (linear interpolation between bracketing samples); writes
 * `<stem>_aligned.csv` next to the input and returns its path.
 */
std::string align_shock_profile(const std::string& csv_path);

/** Two-column CSV (v_axis, f) through the grid-center line along `axis`. */
void emit_slice(const VelocityGrid& grid, const std::vector<double>& f, int axis,
                const std::string& path);

/** Shortest-round-trip decimal formatting used by every writer. */
std::string format_double(double x);

/** Library version string recorded in manifests. */
const char* solver_version();

}  // namespace boltz
