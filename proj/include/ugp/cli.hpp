#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ugp/attacks.hpp"
#include "ugp/gcn.hpp"
#include "ugp/pipeline.hpp"

namespace ugp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for the `ugp` tool: purify, attack, eval, experiment, scores.
/// args[0] is the program name. Data goes to files / stdout, logs to stderr.
int run(const std::vector<std::string>& args);

/// One purification variant of an experiment grid. An unset scorer means
/// no purification.
struct PurifyVariant {
  bool enabled{false};
  PurifyConfig config;

  /// Scorer column value: "none", "kld", "i-kld", "ri-entropy", ...
  std::string label() const;
};

/// Experiment manifest (JSON):
///   {"datasets": [dir, ...], "attacks": ["none", "dice", ...], "rates": [0.25, ...],
///    "purify": [{"scorer": "kld", "judge": "p:0.02", "filter": "s", "iterate": true, ...}],
///    "seeds": [0, 1, ...], "output_dir": dir,
///    "train": {...}, "surrogate": {...}, "resplit": true}
/// "none" attacks ignore the rate list; "train" configures the final GCN and
/// "surrogate" (defaulting to "train") the purification surrogate.
struct RunManifest {
  std::vector<std::filesystem::path> datasets;
  std::vector<std::string> attacks;
  std::vector<double> rates;
  std::vector<PurifyVariant> purify;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;
  TrainConfig train;
  bool resplit{true};
  int recompute_every{20};
  double dice_remove_fraction{0.5};
};

/// Throws InvalidConfig / ParseError. Relative dataset and output paths are
/// resolved against the manifest's directory.
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace ugp::cli
