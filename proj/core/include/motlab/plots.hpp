#pragma once

#include <filesystem>
#include <vector>

namespace motlab {

/// Renders SVG plots from the artifacts of one run directory:
///   - time series of mass_u, sup_v, stab_u (log scale) and entropy_u,
///   - the five sliding-window curves (|grad v|^2, |Lap v|^2, |grad v|^4,
///     v_t^2 and u^2 integrals over a unit window),
///   - the u and v fields of up to four snapshots (line plots in 1D, heat
///     maps in 2D, mid-slice heat maps in 3D).
/// Rendering is deterministic: re-running on the same directory reproduces
/// every file byte for byte.  Throws std::runtime_error when diagnostics.csv
/// is missing or corrupt.  Returns the files written.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& run_dir);

}  // namespace motlab
