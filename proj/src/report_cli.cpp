#include "stagesta/report_cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "stagesta/error.hpp"
#include "stagesta/fabric_models.hpp"
#include "stagesta/pipeline_gen.hpp"
#include "stagesta/random.hpp"

#ifndef STAGESTA_VERSION
#define STAGESTA_VERSION "0.0.0"
#endif

namespace stagesta {

namespace {

const std::set<std::string> kRecordFields{
    "schema_version", "launch_name",    "capture_name",  "transition",    "path_class",
    "logic_ps",       "routing_ps",     "clocking_ps",   "setup_slack_ps", "hold_slack_ps",
    "logic_levels",   "hop_count",      "provenance",    "clock_period_ps", "congestion_mean"};

struct RecordReader {
  const Json& j;
  std::size_t line;

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    throw ParseError(line, "field '" + field + "': " + why);
  }

  const Json& at(const char* field) const {
    auto it = j.find(field);
    if (it == j.end()) fail(field, "missing");
    return *it;
  }

  std::string text(const char* field) const {
    const Json& v = at(field);
    if (!v.is_string()) fail(field, "expected a string");
    if (v.get_ref<const std::string&>().empty()) fail(field, "empty");
    return v.get<std::string>();
  }

  double real(const Json& v, const char* field) const {
    if (!v.is_number()) fail(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(field, "not finite");
    return d;
  }

  double real(const char* field) const { return real(at(field), field); }

  double nonneg(const char* field) const {
    const double d = real(field);
    if (d < 0) fail(field, "must be non-negative, got " + at(field).dump());
    return d;
  }

  int count(const Json& v, const char* field) const {
    if (!v.is_number_integer()) fail(field, "expected an integer");
    const auto n = v.get<std::int64_t>();
    if (n < 0) fail(field, "must be non-negative, got " + v.dump());
    if (n > std::numeric_limits<int>::max()) fail(field, "out of range");
    return static_cast<int>(n);
  }
};

std::string fabric_of_label(const std::string& label) {
  return label.substr(0, label.find(':'));
}

// "asic:corner=SS:sample=3" -> "SS"; empty for labels without a corner.
std::string group_of_label(const std::string& label) {
  const std::string key = "corner=";
  const auto pos = label.find(key);
  if (pos == std::string::npos) return "";
  const auto start = pos + key.size();
  return label.substr(start, label.find(':', start) - start);
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::to_string(v);
}

std::string fixed(double v, int digits = 1) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json spread_doc(const std::vector<double>& values) {
  if (values.empty()) return nullptr;
  if (values.size() == 1) {
    return Json{{"mean", values[0]}, {"std", 0.0}, {"min", values[0]}, {"max", values[0]}};
  }
  const Moments m = moments(values);
  return Json{{"mean", m.mean}, {"std", m.std}, {"min", m.min}, {"max", m.max}};
}

}  // namespace

PathRecord to_record(const PathSample& s, const std::string& provenance) {
  PathRecord r;
  r.launch_name = s.launch_name;
  r.capture_name = s.capture_name;
  r.transition = s.transition;
  r.path_class = s.path_class;
  r.logic_ps = s.decomposition.logic_ps;
  r.routing_ps = s.decomposition.routing_ps;
  r.clocking_ps = s.decomposition.clocking_ps;
  r.setup_slack_ps = s.setup_slack_ps;
  r.hold_slack_ps = s.hold_slack_ps;
  r.logic_levels = s.logic_levels;
  r.hop_count = s.hop_count;
  r.provenance = provenance;
  r.clock_period_ps = s.clock_period_ps;
  r.congestion_mean = s.congestion_mean;
  return r;
}

std::vector<PathRecord> export_paths(std::span<const TimingPath> paths, const RealizedDesign& design) {
  const TimingGraph& g = design.graph();
  const std::string label = design.provenance().label();
  std::vector<PathRecord> out;
  for (const TimingPath& p : paths) {
    PathSample s;
    s.launch_name = g.node(*g.index_of(p.launch)).name;
    s.capture_name = g.node(*g.index_of(p.capture)).name;
    s.transition = p.transition;
    s.path_class = p.path_class;
    s.decomposition = p.decomposition;
    s.setup_slack_ps = p.setup_slack_ps;
    s.hold_slack_ps = p.hold_slack_ps;
    s.logic_levels = p.logic_levels;
    if (design.provenance().fabric == Fabric::kFpga) s.hop_count = p.hop_count;
    s.congestion_mean = p.congestion_mean;
    s.clock_period_ps = design.clock().period_ps;
    out.push_back(to_record(s, label));
  }
  return out;
}

std::vector<PathRecord> export_sweep(const SweepResult& sweep) {
  std::vector<PathRecord> out;
  out.reserve(sweep.samples.size());
  for (const PathSample& s : sweep.samples) {
    out.push_back(to_record(s, sweep.realizations.at(s.realization).provenance));
  }
  return out;
}

Json to_json(const PathRecord& r) {
  Json j{{"schema_version", kSchemaVersion},
         {"launch_name", r.launch_name},
         {"capture_name", r.capture_name},
         {"transition", to_string(r.transition)},
         {"path_class", to_string(r.path_class)},
         {"logic_ps", r.logic_ps},
         {"routing_ps", r.routing_ps},
         {"clocking_ps", r.clocking_ps},
         {"setup_slack_ps", r.setup_slack_ps},
         {"hold_slack_ps", r.hold_slack_ps},
         {"logic_levels", r.logic_levels}};
  if (r.hop_count) j["hop_count"] = *r.hop_count;
  j["provenance"] = r.provenance;
  if (r.clock_period_ps) j["clock_period_ps"] = *r.clock_period_ps;
  if (r.congestion_mean) j["congestion_mean"] = *r.congestion_mean;
  for (const auto& [key, value] : r.extra.items()) {
    if (!j.contains(key)) j[key] = value;
  }
  return j;
}

PathRecord record_from_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "record is not a JSON object");
  const RecordReader in{j, line};
  if (j.contains("schema_version")) {
    const Json& v = j["schema_version"];
    if (!v.is_number_integer() || v.get<std::int64_t>() != kSchemaVersion) {
      in.fail("schema_version", "unsupported version " + v.dump());
    }
  }
  PathRecord r;
  r.launch_name = in.text("launch_name");
  r.capture_name = in.text("capture_name");
  const std::string t = in.text("transition");
  auto transition = transition_from_string(t);
  if (!transition) in.fail("transition", "unknown transition '" + t + "'");
  r.transition = *transition;
  const std::string c = in.text("path_class");
  auto path_class = path_class_from_string(c);
  if (!path_class) in.fail("path_class", "unknown path class '" + c + "'");
  r.path_class = *path_class;
  r.logic_ps = in.nonneg("logic_ps");
  r.routing_ps = in.nonneg("routing_ps");
  r.clocking_ps = in.nonneg("clocking_ps");
  r.setup_slack_ps = in.real("setup_slack_ps");
  r.hold_slack_ps = in.real("hold_slack_ps");
  r.logic_levels = in.count(in.at("logic_levels"), "logic_levels");
  if (j.contains("hop_count") && !j["hop_count"].is_null()) {
    r.hop_count = in.count(j["hop_count"], "hop_count");
  }
  r.provenance = in.text("provenance");
  if (j.contains("clock_period_ps") && !j["clock_period_ps"].is_null()) {
    r.clock_period_ps = in.real("clock_period_ps");
    if (*r.clock_period_ps <= 0) in.fail("clock_period_ps", "must be positive");
  }
  if (j.contains("congestion_mean") && !j["congestion_mean"].is_null()) {
    r.congestion_mean = in.nonneg("congestion_mean");
  }
  for (const auto& [key, value] : j.items()) {
    if (!kRecordFields.contains(key)) r.extra[key] = value;
  }
  return r;
}

void write_jsonl(std::ostream& out, std::span<const PathRecord> records) {
  for (const PathRecord& r : records) out << to_json(r).dump() << '\n';
}

std::vector<PathRecord> read_jsonl(std::istream& in, bool lenient,
                                   std::vector<std::string>* diagnostics) {
  std::vector<PathRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      Json j;
      try {
        j = Json::parse(text);
      } catch (const Json::parse_error& e) {
        throw ParseError(line, std::string("malformed JSON: ") + e.what());
      }
      out.push_back(record_from_json(j, line));
    } catch (const ParseError& e) {
      if (!lenient) throw;
      if (diagnostics) diagnostics->push_back(std::string("skipped ") + e.what());
    }
  }
  if (out.empty()) throw Error(ErrorKind::kEmptyInput, "no path records");
  return out;
}

SweepResult sweep_from_records(std::span<const PathRecord> records) {
  if (records.empty()) throw Error(ErrorKind::kEmptyInput, "no path records");
  SweepResult sweep;
  sweep.fabric = fabric_of_label(records.front().provenance);
  std::map<std::string, std::size_t> index;
  std::vector<std::string> labels;
  for (const PathRecord& r : records) {
    const std::string fabric = fabric_of_label(r.provenance);
    if (fabric != sweep.fabric) {
      throw ParseError(0, "records mix fabrics '" + sweep.fabric + "' and '" + fabric + "'");
    }
    auto [it, fresh] = index.try_emplace(r.provenance, labels.size());
    if (fresh) labels.push_back(r.provenance);
    PathSample s;
    s.realization = it->second;
    s.launch_name = r.launch_name;
    s.capture_name = r.capture_name;
    s.transition = r.transition;
    s.path_class = r.path_class;
    s.decomposition = {r.logic_ps, r.routing_ps, r.clocking_ps};
    s.setup_slack_ps = r.setup_slack_ps;
    s.hold_slack_ps = r.hold_slack_ps;
    s.logic_levels = r.logic_levels;
    s.hop_count = r.hop_count;
    s.congestion_mean = r.congestion_mean.value_or(0.0);
    s.clock_period_ps =
        r.clock_period_ps.value_or(s.decomposition.total_ps() + r.setup_slack_ps);
    sweep.samples.push_back(std::move(s));
  }
  std::stable_sort(sweep.samples.begin(), sweep.samples.end(),
                   [](const PathSample& a, const PathSample& b) {
                     if (a.realization != b.realization) return a.realization < b.realization;
                     if (a.transition != b.transition) return a.transition < b.transition;
                     return a.setup_slack_ps < b.setup_slack_ps;
                   });
  std::size_t k = 0;
  auto begin = sweep.samples.begin();
  for (std::size_t r = 0; r < labels.size(); ++r) {
    auto end = std::find_if(begin, sweep.samples.end(),
                            [r](const PathSample& s) { return s.realization != r; });
    std::map<Transition, std::size_t> per_transition;
    for (auto it = begin; it != end; ++it) k = std::max(k, ++per_transition[it->transition]);
    sweep.realizations.push_back(summarize_realization(
        labels[r], group_of_label(labels[r]), std::span<const PathSample>(&*begin, end - begin)));
    begin = end;
  }
  sweep.paths_per_transition = k;
  return sweep;
}

SweepResult import_paths(std::istream& in, bool lenient, std::vector<std::string>* diagnostics) {
  const auto records = read_jsonl(in, lenient, diagnostics);
  return sweep_from_records(records);
}

void write_histogram_csv(std::ostream& out, std::span<const StageStatistics> stats) {
  out << kHistogramCsvHeader << '\n';
  for (const StageStatistics& s : stats) {
    for (std::size_t i = 0; i < s.histogram.counts.size(); ++i) {
      out << to_string(s.transition) << ',' << shortest(s.histogram.edges[i]) << ','
          << shortest(s.histogram.edges[i + 1]) << ',' << s.histogram.counts[i] << '\n';
    }
  }
}

std::vector<HistogramRow> read_histogram_csv(std::istream& in) {
  std::vector<HistogramRow> rows;
  std::string text;
  std::size_t line = 0;
  bool header = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    if (!header) {
      if (text != kHistogramCsvHeader) {
        throw ParseError(line, std::string("expected header '") + kHistogramCsvHeader + "'");
      }
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(text);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4) throw ParseError(line, "expected 4 columns");
    HistogramRow row;
    auto t = transition_from_string(cells[0]);
    if (!t) throw ParseError(line, "field 'transition': unknown transition '" + cells[0] + "'");
    row.transition = *t;
    auto number = [&](const std::string& cell, const char* field, double& v) {
      auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || end != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(line, std::string("field '") + field + "': expected a number");
      }
    };
    number(cells[1], "bin_lo_ps", row.bin_lo_ps);
    number(cells[2], "bin_hi_ps", row.bin_hi_ps);
    if (row.bin_hi_ps < row.bin_lo_ps) throw ParseError(line, "field 'bin_hi_ps': below bin_lo_ps");
    auto [end, ec] = std::from_chars(cells[3].data(), cells[3].data() + cells[3].size(), row.count);
    if (ec != std::errc() || end != cells[3].data() + cells[3].size()) {
      throw ParseError(line, "field 'count': expected a non-negative integer");
    }
    rows.push_back(row);
  }
  if (!header) throw Error(ErrorKind::kEmptyInput, "empty histogram file");
  return rows;
}

Json stats_document(const SweepResult& sweep) {
  Json doc = file_header("stats");
  doc["fabric"] = sweep.fabric;
  doc["realizations"] = sweep.realizations.size();
  doc["paths_per_transition"] = sweep.paths_per_transition;
  doc["groups"] = sweep.groups();
  doc["fmax_mhz"] = spread_doc(sweep.fmax_values());
  Json transitions = Json::array();
  for (Transition t : kAllTransitions) {
    if (sweep.slacks(t).size() < 2) continue;
    transitions.push_back(to_json(stage_statistics(sweep, t)));
  }
  doc["transitions"] = transitions;
  std::size_t with_hops = 0;
  for (const PathSample& s : sweep.samples) with_hops += s.hop_count.has_value();
  doc["sensitivity"] = with_hops >= 2 ? to_json(interconnect_sensitivity(sweep)) : Json(nullptr);
  return doc;
}

namespace {

struct Input {
  std::string path;
  std::string bytes;
};

Input load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return {path, buffer.str()};
}

Json parse(const Input& input) {
  try {
    return Json::parse(input.bytes);
  } catch (const Json::parse_error& e) {
    throw ParseError(0, input.path + ": " + e.what());
  }
}

struct Session {
  std::ostream& out;
  std::ostream& err;
  std::string command;
  std::string config_path;
  bool deterministic = true;
  std::size_t jobs = 0;

  PipelineConfig pipeline;
  Calibration calibration = default_calibration();
  std::vector<std::pair<std::string, std::uint64_t>> digests;
  std::vector<std::string> notes;

  Input read(const std::string& path) {
    Input in = load(path);
    digests.emplace_back(path, fnv1a64(in.bytes));
    return in;
  }

  void load_config() {
    if (config_path.empty()) return;
    const Json doc = parse(read(config_path));
    // A bare object without a header is a PipelineConfig overlay.
    if (doc.is_object() && !doc.contains("kind")) {
      pipeline = pipeline_config_from_json(doc, pipeline);
      check_config(pipeline);
      return;
    }
    check_header(doc, "config");
    if (doc.contains("pipeline")) pipeline = pipeline_config_from_json(doc["pipeline"], pipeline);
    if (doc.contains("calibration")) {
      calibration = calibration_from_json(doc["calibration"], calibration);
    }
    check_config(pipeline);
    check_model(calibration.fpga);
    check_model(calibration.asic);
  }

  std::shared_ptr<const TimingGraph> graph(const std::string& path) {
    if (path.empty()) return std::make_shared<const TimingGraph>(build_rv32i_graph(pipeline));
    const Json doc = parse(read(path));
    check_header(doc, "graph");
    auto g = std::make_shared<const TimingGraph>(graph_from_json(doc));
    const auto violations = validate(*g);
    if (!violations.empty()) {
      throw ParseError(0, path + ": graph invariant broken: " + violations.front().detail);
    }
    return g;
  }

  // Provenance header: tool version, input digests, seeds.
  void header() const {
    err << "# stagesta " << STAGESTA_VERSION << ' ' << command << '\n';
    if (!config_path.empty()) err << "# config " << config_path << '\n';
    for (const auto& [path, digest] : digests) {
      err << "# input " << path << " fnv1a64:" << hex64(digest) << '\n';
    }
    for (const auto& note : notes) err << "# " << note << '\n';
  }

  Json document(const std::string& kind) const {
    Json doc = file_header(kind);
    doc["tool_version"] = STAGESTA_VERSION;
    if (!deterministic) {
      const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      doc["generated_at"] = buf;
    }
    return doc;
  }

  void emit(const std::string& path, const Json& doc) const {
    if (path.empty() || path == "-") {
      out << doc.dump(2) << '\n';
    } else {
      write_json_file(path, doc);
    }
  }

  void emit_records(const std::string& path, std::span<const PathRecord> records) const {
    if (path.empty() || path == "-") {
      write_jsonl(out, records);
      return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorKind::kIoFailure, "cannot write '" + path + "'");
    write_jsonl(file, records);
    if (!file) throw Error(ErrorKind::kIoFailure, "write failed for '" + path + "'");
  }

  // Summaries go to stdout only when stdout is not carrying the data.
  std::ostream& summary(const std::string& out_path) const {
    return out_path.empty() || out_path == "-" ? err : out;
  }
};

std::vector<PathRecord> read_records(Session& s, const std::string& path, bool lenient) {
  const Input in = s.read(path);
  std::istringstream stream(in.bytes);
  std::vector<std::string> diagnostics;
  auto records = read_jsonl(stream, lenient, &diagnostics);
  for (const auto& d : diagnostics) s.err << path << ": " << d << '\n';
  return records;
}

void print_sweep_summary(std::ostream& os, const SweepResult& sweep) {
  for (const std::string& group : sweep.groups()) {
    const SweepResult part = sweep.subset(group);
    const auto fmax = part.fmax_values();
    const Json spread = spread_doc(fmax);
    os << sweep.fabric << (group.empty() ? "" : " " + group) << ": " << fmax.size()
       << " realizations, fmax mean " << fixed(spread["mean"].get<double>()) << " MHz, min "
       << fixed(spread["min"].get<double>()) << ", max " << fixed(spread["max"].get<double>())
       << '\n';
  }
}

void print_signature(std::ostream& os, const FabricSignature& f) {
  os << f.fabric << ": fmax " << fixed(f.fmax_mhz.mean) << " MHz (sd " << fixed(f.fmax_mhz.std)
     << "), bottleneck " << to_string(f.bottleneck) << " (" << fixed(100 * f.dominance, 0)
     << "%), routing " << fixed(f.routing_fraction.mean, 3) << ", logic "
     << fixed(f.logic_fraction.mean, 3) << ", clocking " << fixed(f.clocking_fraction.mean, 3)
     << ", " << to_string(f.variability) << '\n';
  for (const auto& [t, ts] : f.transitions) {
    os << "  " << to_string(t) << ": sigma " << fixed(ts.sigma_ps) << " ps, skewness "
       << fixed(ts.skewness, 2) << ", levels " << fixed(ts.mean_logic_levels) << ", "
       << to_string(ts.shape) << '\n';
  }
}

void ingest(Session& s, const std::string& path) {
  const Input in = s.read(path);
  s.header();
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  if (csv) {
    std::istringstream stream(in.bytes);
    const auto rows = read_histogram_csv(stream);
    std::map<Transition, std::size_t> totals;
    for (const auto& r : rows) totals[r.transition] += r.count;
    s.out << "histogram: " << rows.size() << " bins";
    for (const auto& [t, n] : totals) s.out << ", " << to_string(t) << " " << n;
    s.out << '\n';
    return;
  }
  Json doc;
  bool single = true;
  try {
    doc = Json::parse(in.bytes);
  } catch (const Json::parse_error&) {
    single = false;
  }
  if (!single || !doc.is_object() || !doc.contains("kind")) {
    std::istringstream stream(in.bytes);
    const SweepResult sweep = import_paths(stream);
    s.out << "paths: " << sweep.samples.size() << " records, " << sweep.realizations.size()
          << " realizations (" << sweep.fabric << ")\n";
    return;
  }
  const std::string kind = doc["kind"].is_string() ? doc["kind"].get<std::string>() : "";
  if (kind == "graph") {
    check_header(doc, kind);
    const TimingGraph g = graph_from_json(doc);
    const auto violations = validate(g);
    if (!violations.empty()) throw ParseError(0, "graph invariant broken: " + violations.front().detail);
    s.out << "graph: " << g.node_count() << " nodes, " << g.edges().size() << " edges\n";
  } else if (kind == "design") {
    check_header(doc, kind);
    const RealizedDesign d = design_from_json(doc);
    const auto violations = validate(d.graph());
    if (!violations.empty()) throw ParseError(0, "graph invariant broken: " + violations.front().detail);
    s.out << "design: " << d.provenance().label() << ", fmax " << fixed(fmax(d), 2) << " MHz\n";
  } else if (kind == "config") {
    check_header(doc, kind);
    PipelineConfig p = pipeline_config_from_json(doc.value("pipeline", Json::object()));
    Calibration c = calibration_from_json(doc.value("calibration", Json::object()),
                                          default_calibration());
    check_config(p);
    check_model(c.fpga);
    check_model(c.asic);
    s.out << "config: ok\n";
  } else if (kind == "stats") {
    check_header(doc, kind);
    std::size_t bins = 0;
    for (const Json& t : doc.at("transitions")) {
      std::size_t total = 0;
      for (const Json& b : t.at("histogram")) {
        total += b.at("count").get<std::size_t>();
        ++bins;
      }
      if (total != t.at("n").get<std::size_t>()) {
        throw ParseError(0, "histogram of " + t.at("transition").get<std::string>() +
                                " does not sum to n");
      }
    }
    s.out << "stats: " << doc["transitions"].size() << " transitions, " << bins << " bins\n";
  } else if (kind == "signatures") {
    check_header(doc, kind);
    const SignatureReport r = signature_report_from_json(doc);
    s.out << "signatures: robustness " << fixed(r.mean_robustness_ratio, 2) << '\n';
  } else {
    throw ParseError(0, "field 'kind': unknown kind '" + kind + "'");
  }
}

std::vector<Corner> parse_corners(const std::string& list) {
  std::vector<Corner> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(corner_from_string(item));
  }
  if (out.empty()) throw Error(ErrorKind::kInvalidCorner, "empty corner list");
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pipeline-stage-resolved static timing analysis", "stagesta"};
  app.set_version_flag("--version", STAGESTA_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);

  Session s{out, err, "", "", true, 0, {}, default_calibration(), {}, {}};
  app.add_option("--config", s.config_path, "Config file (pipeline and calibration overrides)");
  app.add_flag("--deterministic-output,!--no-deterministic-output", s.deterministic,
               "Leave timestamps out of emitted files (default on)");
  app.add_option("--jobs", s.jobs, "Worker threads, 0 = all cores")->envname("STAGESTA_JOBS");

  std::string out_path, graph_path, design_path, fabric, corner = "TT", corners = "FF,TT,SS";
  std::string paths, fpga_paths, asic_paths, csv_path, group, input;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> sample;
  std::size_t k = kDefaultPathsPerTransition, sta_k = 100, seeds = 30, samples = 100;
  bool lenient = false;

  auto* gen = app.add_subcommand("gen", "Generate the pipeline timing graph");
  gen->add_option("--out", out_path, "Output graph file (default stdout)");

  auto* realize = app.add_subcommand("realize", "Realize a graph on one fabric");
  realize->add_option("--graph", graph_path, "Graph file (default: generate)");
  realize->add_option("--fabric", fabric, "fpga or asic")
      ->required()
      ->check(CLI::IsMember({"fpga", "asic"}));
  realize->add_option("--seed", seed, "FPGA placement seed");
  realize->add_option("--corner", corner, "ASIC corner (TT, FF, SS)");
  realize->add_option("--sample", sample, "ASIC LVF sample index");
  realize->add_option("--out", out_path, "Output design file (default stdout)");

  auto* sta = app.add_subcommand("sta", "Extract the worst paths of a realized design");
  sta->add_option("--design", design_path, "Design file")->required();
  sta->add_option("--k", sta_k, "Register pairs per transition")->check(CLI::PositiveNumber);
  sta->add_option("--out,--paths-out", out_path, "Output path records (default stdout)");

  auto* sweep_seeds = app.add_subcommand("sweep-seeds", "FPGA sweep over seeds 1..n");
  sweep_seeds->add_option("--graph", graph_path, "Graph file (default: generate)");
  sweep_seeds->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber);
  sweep_seeds->add_option("--k", k, "Register pairs per transition")->check(CLI::PositiveNumber);
  sweep_seeds->add_option("--out", out_path, "Output path records (default stdout)");

  auto* sweep_corners = app.add_subcommand("sweep-corners", "ASIC sweep over corners and LVF samples");
  sweep_corners->add_option("--graph", graph_path, "Graph file (default: generate)");
  sweep_corners->add_option("--corners", corners, "Comma-separated corners");
  sweep_corners->add_option("--samples", samples, "LVF samples per corner, 0 = deterministic");
  sweep_corners->add_option("--k", k, "Register pairs per transition")->check(CLI::PositiveNumber);
  sweep_corners->add_option("--out", out_path, "Output path records (default stdout)");

  auto* analyze = app.add_subcommand("analyze", "Per-transition statistics of a path-record file");
  analyze->add_option("--paths", paths, "Path records")->required();
  analyze->add_flag("--lenient", lenient, "Skip malformed records");
  analyze->add_option("--group", group, "Restrict to one corner");
  analyze->add_option("--out", out_path, "Output stats file (default stdout)");
  analyze->add_option("--histogram-csv", csv_path, "Output histogram CSV");

  auto* signatures = app.add_subcommand("signatures", "Cross-fabric signatures");
  signatures->add_option("--fpga", fpga_paths, "FPGA path records")->required();
  signatures->add_option("--asic", asic_paths, "ASIC path records")->required();
  signatures->add_flag("--lenient", lenient, "Skip malformed records");
  signatures->add_option("--out", out_path, "Output signature file (default stdout)");

  auto* ingest_cmd = app.add_subcommand("ingest", "Validate any file this tool emits");
  ingest_cmd->add_option("file", input, "File to ingest")->required();

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Refit the fabric models to the targets");
  CalibrationTargets targets;
  calibrate_cmd->add_option("--graph", graph_path, "Graph file (default: generate)");
  calibrate_cmd->add_option("--seeds", targets.fpga_seeds, "FPGA seeds")->check(CLI::PositiveNumber);
  calibrate_cmd->add_option("--fpga-fmax", targets.fpga_mean_fmax_mhz, "FPGA mean Fmax (MHz)");
  calibrate_cmd->add_option("--asic-tt-fmax", targets.asic_tt_fmax_mhz, "ASIC TT Fmax (MHz)");
  calibrate_cmd->add_option("--asic-ss-fmax", targets.asic_ss_fmax_mhz, "ASIC SS Fmax (MHz)");
  calibrate_cmd->add_option("--samples", targets.asic_samples, "ASIC LVF samples, 0 = deterministic");
  calibrate_cmd->add_option("--out", out_path, "Output config file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    s.command = app.get_subcommands().front()->get_name();
    s.load_config();
    if (gen->parsed()) {
      const TimingGraph g = build_rv32i_graph(s.pipeline);
      s.header();
      Json doc = s.document("graph");
      doc["pipeline"] = to_json(s.pipeline);
      doc.update(to_json(g));
      s.emit(out_path, doc);
      s.summary(out_path) << "graph: " << g.node_count() << " nodes, " << g.edges().size()
                          << " edges\n";
    } else if (realize->parsed()) {
      auto g = s.graph(graph_path);
      std::optional<RealizedDesign> d;
      if (fabric == "fpga") {
        s.notes.push_back("seed " + std::to_string(seed));
        d = realize_fpga(g, s.calibration.fpga, seed);
      } else {
        const Corner c = corner_from_string(corner);
        s.notes.push_back(std::string("corner ") + to_string(c) +
                          (sample ? " sample " + std::to_string(*sample) : ""));
        d = realize_asic(g, s.calibration.asic, c, sample);
      }
      s.header();
      Json doc = s.document("design");
      doc.update(to_json(*d));
      s.emit(out_path, doc);
      s.summary(out_path) << d->provenance().label() << ": fmax " << fixed(fmax(*d), 2)
                          << " MHz\n";
    } else if (sta->parsed()) {
      const Json doc = parse(s.read(design_path));
      check_header(doc, "design");
      const RealizedDesign d = design_from_json(doc);
      s.notes.push_back("provenance " + d.provenance().label());
      s.header();
      const auto samples_of = sample_design(d, sta_k);
      std::vector<PathRecord> records;
      for (const auto& p : samples_of) records.push_back(to_record(p, d.provenance().label()));
      s.emit_records(out_path, records);
      std::ostream& os = s.summary(out_path);
      os << d.provenance().label() << ": period " << fixed(d.clock().period_ps) << " ps, fmax "
         << fixed(fmax(d), 2) << " MHz\n";
      for (Transition t : kAllTransitions) {
        auto it = std::find_if(samples_of.begin(), samples_of.end(),
                               [t](const PathSample& p) { return p.transition == t; });
        if (it == samples_of.end()) continue;
        os << "  " << to_string(t) << ": worst slack " << fixed(it->setup_slack_ps) << " ps ("
           << it->launch_name << " -> " << it->capture_name << ", logic "
           << fixed(it->decomposition.logic_ps) << ", routing "
           << fixed(it->decomposition.routing_ps) << ", clocking "
           << fixed(it->decomposition.clocking_ps) << ")\n";
      }
    } else if (sweep_seeds->parsed()) {
      auto g = s.graph(graph_path);
      s.notes.push_back("seeds 1.." + std::to_string(seeds));
      s.header();
      const SweepResult sweep = seed_sweep(g, s.calibration.fpga, seeds, k, s.jobs);
      s.emit_records(out_path, export_sweep(sweep));
      print_sweep_summary(s.summary(out_path), sweep);
    } else if (sweep_corners->parsed()) {
      auto g = s.graph(graph_path);
      const auto list = parse_corners(corners);
      std::string names;
      for (Corner c : list) names += std::string(names.empty() ? "" : ",") + to_string(c);
      s.notes.push_back("corners " + names +
                        (samples ? " samples 1.." + std::to_string(samples) : " deterministic"));
      s.header();
      const SweepResult sweep = corner_sweep(g, s.calibration.asic, list, samples, k, s.jobs);
      s.emit_records(out_path, export_sweep(sweep));
      print_sweep_summary(s.summary(out_path), sweep);
    } else if (analyze->parsed()) {
      const auto records = read_records(s, paths, lenient);
      s.header();
      SweepResult sweep = sweep_from_records(records);
      if (!group.empty()) {
        sweep = sweep.subset(group);
        if (sweep.realizations.empty()) {
          throw Error(ErrorKind::kInsufficientSamples, "no realizations in group '" + group + "'");
        }
      }
      Json doc = s.document("stats");
      doc.update(stats_document(sweep));
      s.emit(out_path, doc);
      if (!csv_path.empty()) {
        std::vector<StageStatistics> stats;
        for (Transition t : kAllTransitions) {
          if (sweep.slacks(t).size() >= 2) stats.push_back(stage_statistics(sweep, t));
        }
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) throw Error(ErrorKind::kIoFailure, "cannot write '" + csv_path + "'");
        write_histogram_csv(csv, stats);
      }
      print_sweep_summary(s.summary(out_path), sweep);
    } else if (signatures->parsed()) {
      const auto fpga = sweep_from_records(read_records(s, fpga_paths, lenient));
      const auto asic = sweep_from_records(read_records(s, asic_paths, lenient));
      s.header();
      const SignatureReport report = extract_signatures(fpga, asic);
      Json doc = s.document("signatures");
      doc.update(to_json(report));
      s.emit(out_path, doc);
      std::ostream& os = s.summary(out_path);
      print_signature(os, report.fpga);
      print_signature(os, report.asic);
      os << "robustness ratio mean " << fixed(report.mean_robustness_ratio, 2) << '\n';
    } else if (ingest_cmd->parsed()) {
      ingest(s, input);
    } else if (calibrate_cmd->parsed()) {
      auto g = s.graph(graph_path);
      s.notes.push_back("seeds 1.." + std::to_string(targets.fpga_seeds) + " samples 1.." +
                        std::to_string(targets.asic_samples));
      s.header();
      const CalibrationFit fit = calibrate(g, s.calibration, targets, s.jobs);
      Json doc = s.document("config");
      doc["pipeline"] = to_json(s.pipeline);
      doc["calibration"] = to_json(fit.calibration);
      s.emit(out_path, doc);
      std::ostream& os = s.summary(out_path);
      os << "fpga: scale " << fixed(fit.fpga_scale, 4) << ", mean fmax "
         << fixed(fit.fpga_mean_fmax_mhz, 2) << " MHz\n";
      os << "asic: scale " << fixed(fit.asic_scale, 4) << ", TT fmax "
         << fixed(fit.asic_tt_fmax_mhz, 2) << " MHz, SS fmax " << fixed(fit.asic_ss_fmax_mhz, 2)
         << " MHz, SS multiplier " << fixed(fit.calibration.asic.corner_multipliers.ss, 4)
         << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const Json::exception& e) {
    err << "error: parse_error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace stagesta
