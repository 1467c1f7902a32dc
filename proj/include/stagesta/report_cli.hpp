#ifndef STAGESTA_REPORT_CLI_HPP
#define STAGESTA_REPORT_CLI_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stagesta/serialization.hpp"
#include "stagesta/sta_engine.hpp"
#include "stagesta/stats_analysis.hpp"

namespace stagesta {

// One line of the path-record interchange format (JSON Lines).
struct PathRecord {
  std::string launch_name;
  std::string capture_name;
  Transition transition = Transition::kIfId;
  PathClass path_class = PathClass::kRegToAlu;
  double logic_ps = 0.0;
  double routing_ps = 0.0;
  double clocking_ps = 0.0;
  double setup_slack_ps = 0.0;
  double hold_slack_ps = 0.0;
  int logic_levels = 0;
  std::optional<int> hop_count;
  // Provenance label of the realization, e.g. "fpga:seed=3".
  std::string provenance;
  // Written by this tool, optional on input.
  std::optional<double> clock_period_ps;
  std::optional<double> congestion_mean;
  // Fields this version does not know, kept verbatim for re-export.
  Json extra = Json::object();

  friend bool operator==(const PathRecord&, const PathRecord&) = default;
};

PathRecord to_record(const PathSample& sample, const std::string& provenance);
std::vector<PathRecord> export_paths(std::span<const TimingPath> paths, const RealizedDesign& design);
std::vector<PathRecord> export_sweep(const SweepResult& sweep);

Json to_json(const PathRecord& record);
// Throws ParseError(line, reason) naming the offending field.
PathRecord record_from_json(const Json& j, std::size_t line);

void write_jsonl(std::ostream& out, std::span<const PathRecord> records);

// Blank lines are skipped. A malformed line throws ParseError unless lenient,
// in which case it is skipped and described in diagnostics. Throws
// Error(kEmptyInput) when no record survives.
std::vector<PathRecord> read_jsonl(std::istream& in, bool lenient = false,
                                   std::vector<std::string>* diagnostics = nullptr);

// Realizations are numbered by first appearance of their provenance label;
// the ASIC corner in the label becomes the realization group. Samples are
// stably ordered by (realization, transition, slack). Consumption uses
// clock_period_ps when present and the decomposition total otherwise.
SweepResult sweep_from_records(std::span<const PathRecord> records);
SweepResult import_paths(std::istream& in, bool lenient = false,
                         std::vector<std::string>* diagnostics = nullptr);

struct HistogramRow {
  Transition transition = Transition::kIfId;
  double bin_lo_ps = 0.0;
  double bin_hi_ps = 0.0;
  std::size_t count = 0;

  friend bool operator==(const HistogramRow&, const HistogramRow&) = default;
};

inline constexpr const char* kHistogramCsvHeader = "transition,bin_lo_ps,bin_hi_ps,count";

void write_histogram_csv(std::ostream& out, std::span<const StageStatistics> stats);
// Throws ParseError(line, reason) on a bad header or row.
std::vector<HistogramRow> read_histogram_csv(std::istream& in);

// {"schema_version", "kind": "stats", ...} summary of one sweep.
Json stats_document(const SweepResult& sweep);

// Command-line entry point: 0 on success, 1 on a domain error, 2 on a usage
// error. Results go to out; diagnostics and the provenance header to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stagesta

#endif  // STAGESTA_REPORT_CLI_HPP
