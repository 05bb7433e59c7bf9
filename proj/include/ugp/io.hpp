#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ugp/attacks.hpp"
#include "ugp/dataset.hpp"
#include "ugp/pipeline.hpp"

namespace ugp {

inline constexpr int kDatasetFormatVersion = 1;

/// Reads a dataset directory:
///   meta.json     {"name", "num_nodes", "num_features", "num_classes", "format_version"}
///   edges.tsv     "u<TAB>v" per line, u < v, sorted, no duplicates
///   features.tsv  one tab-separated row of decimals per node
///   labels.tsv    one class id per line
///   split.json    {"train": [...], "val": [...], "test": [...]}
/// Throws MissingFile, ParseError (with file and line) or DimensionMismatch.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes the format above; byte output is a function of the dataset
/// (sorted edges, %.9g decimals). Throws IoError.
void save_dataset(const Dataset& d, const std::filesystem::path& dir);

/// Edges added/removed by an attack, written next to the perturbed dataset.
struct PerturbationSidecar {
  std::string method;
  double rate{0.0};
  std::uint64_t seed{0};
  EdgeList injected;
  EdgeList removed;
};

inline constexpr const char* kSidecarFile = "perturbations.json";

void save_sidecar(const PerturbationSidecar& s, const std::filesystem::path& path);
PerturbationSidecar load_sidecar(const std::filesystem::path& path);

/// Report schema:
///   {"initial_edges", "final_edges", "stopping_reason",
///    "iterations": [{"iteration", "deleted": [[u, v], ...], "edges_after",
///                    "val_accuracy" (number or null), "wall_time_ms" (timings only)}]}
/// Wall time is left out unless `include_timings`, so reports are reproducible.
nlohmann::json report_to_json(const PurifyReport& r, bool include_timings = false);

struct ResultRow {
  std::string dataset;
  std::string attack{"none"};
  double rate{0.0};
  std::string scorer{"none"};
  std::string judge{"none"};
  std::string filter{"none"};
  bool residual{false};
  std::uint64_t seed{0};
  std::string phase{"clean"};
  double accuracy{0.0};
  std::int64_t edges_deleted{0};

  /// Identity of the row without its measurements.
  std::string key() const;
};

inline constexpr const char* kResultsHeader =
    "dataset,attack,rate,scorer,judge,filter,residual,seed,phase,accuracy,edges_deleted";
inline constexpr const char* kAggregateHeader =
    "dataset,attack,rate,scorer,judge,filter,residual,phase,n,mean_accuracy,stderr_accuracy,mean_edges_deleted";

std::string format_row(const ResultRow& r);
ResultRow parse_row(const std::string& line);

/// Reads a results CSV; a missing file yields no rows.
std::vector<ResultRow> read_results(const std::filesystem::path& path);

/// Per-row CSV at `path` plus "<stem>_aggregate.csv" next to it with the
/// mean and standard error (sample std / sqrt(n)) per configuration.
void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

std::filesystem::path aggregate_path(const std::filesystem::path& results);

std::string format_double(double x);

}  // namespace ugp
