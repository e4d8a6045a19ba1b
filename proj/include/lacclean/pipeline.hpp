#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lacclean/cluster.hpp"
#include "lacclean/ingest.hpp"
#include "lacclean/resolver.hpp"
#include "lacclean/synth.hpp"

namespace lacclean {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int
{
  kExitOk = 0,
  kExitBadConfig = 1,
  kExitMissingInput = 2,
  kExitFormatError = 3
};

struct SynthSpec
{
  TopologyConfig topology;
  OutlierSpec outliers;
  std::uint64_t seed = 42;
  std::optional<std::size_t> events;  ///< default: 10 events per cell
  bool strip_operator = false;
};

struct PipelineConfig
{
  std::optional<std::filesystem::path> trace;
  std::optional<std::filesystem::path> cell_db;
  std::optional<SynthSpec> synth;  ///< used when trace and cell_db are absent
  std::filesystem::path out;
  ClusterParams params;
  MatchPolicy policy = MatchPolicy::allow_wildcard;
  Strictness strictness = Strictness::strict;
  std::size_t window = 100;
  std::size_t threads = 1;
  bool record_timings = false;
};

/// Default cutoff for a metric: 35 km, expressed in that metric's units.
double default_cutoff(DistanceMetric metric);

/// Files written by `clean`, relative to the output directory.
inline constexpr std::string_view kCleanArtifacts[] = {"cleaned.geojson", "cleaned.csv",       "retention.json",
                                                       "coverage.json",   "scatter_before.svg", "scatter_after.svg"};

/// Runs ingest, resolution, cleaning and reporting, writing every artifact
/// plus scatter_roles.svg, diagnostics.json and manifest.json into
/// config.out. Throws on error; see run_cli for the exit code mapping.
void run_pipeline(const PipelineConfig& config, std::ostream& log);

/// Command-line entry point: synth | clean | score | report.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace lacclean
