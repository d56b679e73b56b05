#ifndef MINNAERT_PIPELINE_HPP
#define MINNAERT_PIPELINE_HPP

#include "minnaert/config.hpp"

#include <functional>
#include <string>

namespace minnaert {

// exit codes shared with the CLI
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDetection = 3;
inline constexpr int kExitFit = 4;
inline constexpr int kExitInversion = 5;

/// Bounded parallel map; jobs <= 1 runs inline. Work items write to
/// preallocated slots, so results do not depend on scheduling.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

/// Synthesizes the measurement set for the configured bubble scan and writes
/// one CSV per position plus metadata and a hashed manifest.
int run_synth(const RunConfig& cfg, const std::string& out_dir);

/// Runs reconstruction Steps 1-4 against a measurement set (from
/// cfg.data_dir, or synthesized on the fly when absent) and writes the
/// report directory.
int run_reconstruct(const RunConfig& cfg, const std::string& out_dir);

/// Module invariant battery at desk scale; one PASS/FAIL line per check.
int run_validate(const RunConfig& cfg, const std::string& out_dir);

/// Bubble-size scaling and quadrature-convergence tables with SVG plots.
int run_sweep(const RunConfig& cfg, const std::string& out_dir);

}  // namespace minnaert

#endif
