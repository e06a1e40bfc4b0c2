#ifndef LHSJA_JOBS_HPP
#define LHSJA_JOBS_HPP

// Executes a run manifest against a synthetic suite. Shared by the CLI's
// `attack` and `baseline` subcommands.

#include <string>

#include "lhsja/latent_attack.hpp"
#include "lhsja/synthetic.hpp"

namespace lhsja {

struct JobOutput {
  /// The input manifest completed with normalization, oracle ids, terminal
  /// reason and metrics.
  RunManifest manifest;
  AttackTrace trace;
};

/// Runs `m` on `suite`. A nonzero manifest fingerprint must match the suite.
/// Without a stored normalization the latent box is calibrated from the
/// manifest's calibration settings, so replays are exact either way.
JobOutput run_manifest(const RunManifest& m, const SyntheticSuite& suite);

}  // namespace lhsja

#endif  // LHSJA_JOBS_HPP
