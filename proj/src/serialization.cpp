#include "stagesta/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "stagesta/error.hpp"
#include "stagesta/sta_engine.hpp"

namespace stagesta {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw ParseError(0, "field '" + field + "': " + why);
}

const Json& at(const Json& j, const char* field) {
  if (!j.is_object()) bad(field, "enclosing value is not an object");
  auto it = j.find(field);
  if (it == j.end()) bad(field, "missing");
  return *it;
}

// Non-finite reals travel as the strings "inf", "-inf" and "nan".
Json real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double as_real(const Json& v, const char* field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  bad(field, "expected a number");
}

double get_real(const Json& j, const char* field) { return as_real(at(j, field), field); }

template <class Int>
Int get_int(const Json& j, const char* field) {
  const Json& v = at(j, field);
  if (!v.is_number_integer()) bad(field, "expected an integer");
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) bad(field, "out of range");
    return static_cast<Int>(u);
  }
  const auto s = v.get<std::int64_t>();
  if (s < static_cast<std::int64_t>(std::numeric_limits<Int>::min()) ||
      (s > 0 && static_cast<std::uint64_t>(s) >
                    static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))) {
    bad(field, "out of range");
  }
  return static_cast<Int>(s);
}

bool get_bool(const Json& j, const char* field) {
  const Json& v = at(j, field);
  if (!v.is_boolean()) bad(field, "expected a boolean");
  return v.get<bool>();
}

const std::string& get_string(const Json& j, const char* field) {
  const Json& v = at(j, field);
  if (!v.is_string()) bad(field, "expected a string");
  return v.get_ref<const std::string&>();
}

template <class Parse>
auto get_enum(const Json& j, const char* field, Parse parse) {
  const std::string& s = get_string(j, field);
  auto e = parse(s);
  if (!e) bad(field, "unknown tag '" + s + "'");
  return *e;
}

// Overlay helpers: only present fields replace the base value.
void opt_real(const Json& j, const char* field, double& out) {
  if (j.contains(field)) out = get_real(j, field);
}
template <class Int>
void opt_int(const Json& j, const char* field, Int& out) {
  if (j.contains(field)) out = get_int<Int>(j, field);
}

const Json& get_array(const Json& j, const char* field) {
  const Json& v = at(j, field);
  if (!v.is_array()) bad(field, "expected an array");
  return v;
}

Json minmax(const MinMax& m) { return Json::array({m.min, m.max}); }

MinMax get_minmax(const Json& j, const char* field) {
  const Json& v = at(j, field);
  if (!v.is_array() || v.size() != 2) bad(field, "expected [min, max]");
  return {as_real(v[0], field), as_real(v[1], field)};
}

Json register_timing_json(const RegisterTiming& t) {
  return Json{{"clk_to_q_late_ps", t.clk_to_q_late_ps},
              {"clk_to_q_early_ps", t.clk_to_q_early_ps},
              {"setup_ps", t.setup_ps},
              {"hold_ps", t.hold_ps}};
}

RegisterTiming register_timing_from(const Json& j, RegisterTiming t = {}) {
  opt_real(j, "clk_to_q_late_ps", t.clk_to_q_late_ps);
  opt_real(j, "clk_to_q_early_ps", t.clk_to_q_early_ps);
  opt_real(j, "setup_ps", t.setup_ps);
  opt_real(j, "hold_ps", t.hold_ps);
  return t;
}

Json edges_json(const std::vector<TimingEdge>& edges) {
  Json out = Json::array();
  for (const TimingEdge& e : edges) {
    out.push_back(Json{{"src", e.src.value},
                       {"dst", e.dst.value},
                       {"kind", to_string(e.kind)},
                       {"logic_ps", minmax(e.logic_ps)},
                       {"routing_ps", minmax(e.routing_ps)},
                       {"hop_count", e.hop_count},
                       {"congestion_weight", e.congestion_weight}});
  }
  return out;
}

std::vector<TimingEdge> edges_from(const Json& j) {
  std::vector<TimingEdge> out;
  for (const Json& e : get_array(j, "edges")) {
    TimingEdge edge;
    edge.src = NodeId{get_int<std::uint32_t>(e, "src")};
    edge.dst = NodeId{get_int<std::uint32_t>(e, "dst")};
    edge.kind = get_enum(e, "kind", edge_kind_from_string);
    edge.logic_ps = get_minmax(e, "logic_ps");
    edge.routing_ps = get_minmax(e, "routing_ps");
    edge.hop_count = get_int<int>(e, "hop_count");
    edge.congestion_weight = get_real(e, "congestion_weight");
    out.push_back(edge);
  }
  return out;
}

Json timing_map_json(const std::map<NodeId, RegisterTiming>& timing) {
  Json out = Json::array();
  for (const auto& [id, t] : timing) {
    Json r{{"node", id.value}};
    r.update(register_timing_json(t));
    out.push_back(r);
  }
  return out;
}

std::map<NodeId, RegisterTiming> timing_map_from(const Json& j) {
  std::map<NodeId, RegisterTiming> out;
  for (const Json& r : get_array(j, "register_timing")) {
    out[NodeId{get_int<std::uint32_t>(r, "node")}] = register_timing_from(r);
  }
  return out;
}

Json clock_json(const ClockSpec& c) {
  Json ins = Json::array();
  for (const auto& [id, ps] : c.insertion_delay_ps) ins.push_back(Json{{"node", id.value}, {"ps", ps}});
  return Json{{"period_ps", c.period_ps},
              {"uncertainty_ps", c.uncertainty_ps},
              {"source_latency_ps", c.source_latency_ps},
              {"insertion_delay_ps", ins}};
}

ClockSpec clock_from(const Json& j) {
  ClockSpec c;
  c.period_ps = get_real(j, "period_ps");
  c.uncertainty_ps = get_real(j, "uncertainty_ps");
  c.source_latency_ps = get_real(j, "source_latency_ps");
  for (const Json& r : get_array(j, "insertion_delay_ps")) {
    c.insertion_delay_ps[NodeId{get_int<std::uint32_t>(r, "node")}] = get_real(r, "ps");
  }
  return c;
}

Json spread_json(const SpreadSummary& s) {
  return Json{{"mean", real(s.mean)}, {"std", real(s.std)}, {"min", real(s.min)}, {"max", real(s.max)}};
}

SpreadSummary spread_from(const Json& j) {
  return {get_real(j, "mean"), get_real(j, "std"), get_real(j, "min"), get_real(j, "max")};
}

FabricSignature fabric_signature_from(const Json& j) {
  FabricSignature f;
  f.fabric = get_string(j, "fabric");
  f.realizations = get_int<std::size_t>(j, "realizations");
  f.fmax_mhz = spread_from(at(j, "fmax_mhz"));
  f.routing_fraction = spread_from(at(j, "routing_fraction"));
  f.logic_fraction = spread_from(at(j, "logic_fraction"));
  f.clocking_fraction = spread_from(at(j, "clocking_fraction"));
  f.routing_sigma_ps = get_real(j, "routing_sigma_ps");
  f.logic_sigma_ps = get_real(j, "logic_sigma_ps");
  f.bottleneck = get_enum(j, "bottleneck", transition_from_string);
  f.dominance = get_real(j, "dominance");
  f.variability = get_enum(j, "variability", variability_from_string);
  const Json& ts = at(j, "transitions");
  if (!ts.is_object()) bad("transitions", "expected an object");
  for (const auto& [name, v] : ts.items()) {
    auto t = transition_from_string(name);
    if (!t) bad("transitions", "unknown transition '" + name + "'");
    TransitionSignature s;
    s.n = get_int<std::size_t>(v, "n");
    s.sigma_ps = get_real(v, "sigma_ps");
    s.skewness = get_real(v, "skewness");
    s.mean_logic_levels = get_real(v, "mean_logic_levels");
    s.shape = get_enum(v, "shape", shape_from_string);
    f.transitions[*t] = s;
  }
  return f;
}

}  // namespace

Json file_header(const std::string& kind) {
  return Json{{"schema_version", kSchemaVersion}, {"kind", kind}};
}

void check_header(const Json& doc, const std::string& kind) {
  if (!doc.is_object()) throw ParseError(0, "document is not a JSON object");
  const int version = get_int<int>(doc, "schema_version");
  if (version != kSchemaVersion) {
    bad("schema_version", "unsupported version " + std::to_string(version));
  }
  const std::string& found = get_string(doc, "kind");
  if (found != kind) bad("kind", "expected '" + kind + "', found '" + found + "'");
}

Json to_json(const PipelineConfig& c) {
  Json bypass = Json::array();
  for (Stage s : c.bypass_sources) bypass.push_back(to_string(s));
  return Json{{"word_width", c.word_width},
              {"slice_bits", c.slice_bits},
              {"regfile_entries", c.regfile_entries},
              {"regfile_read_ports", c.regfile_read_ports},
              {"regfile_write_ports", c.regfile_write_ports},
              {"alu_depth_levels", c.alu_depth_levels},
              {"bypass_sources", bypass},
              {"mem_macro_access_ps_hint", c.mem_macro_access_ps_hint},
              {"include_control_paths", c.include_control_paths},
              {"fabric_grid", Json{{"width", c.fabric_grid.width}, {"height", c.fabric_grid.height}}},
              {"clock_period_ps", c.clock_period_ps},
              {"nominal_cell_ps", c.nominal_cell_ps}};
}

PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig c) {
  if (!j.is_object()) throw ParseError(0, "pipeline config is not a JSON object");
  opt_int(j, "word_width", c.word_width);
  opt_int(j, "slice_bits", c.slice_bits);
  opt_int(j, "regfile_entries", c.regfile_entries);
  opt_int(j, "regfile_read_ports", c.regfile_read_ports);
  opt_int(j, "regfile_write_ports", c.regfile_write_ports);
  opt_int(j, "alu_depth_levels", c.alu_depth_levels);
  if (j.contains("bypass_sources")) {
    c.bypass_sources.clear();
    for (const Json& s : get_array(j, "bypass_sources")) {
      if (!s.is_string()) bad("bypass_sources", "expected stage names");
      auto stage = stage_from_string(s.get<std::string>());
      if (!stage) bad("bypass_sources", "unknown stage '" + s.get<std::string>() + "'");
      c.bypass_sources.insert(*stage);
    }
  }
  opt_real(j, "mem_macro_access_ps_hint", c.mem_macro_access_ps_hint);
  if (j.contains("include_control_paths")) c.include_control_paths = get_bool(j, "include_control_paths");
  if (j.contains("fabric_grid")) {
    const Json& g = at(j, "fabric_grid");
    opt_int(g, "width", c.fabric_grid.width);
    opt_int(g, "height", c.fabric_grid.height);
  }
  opt_real(j, "clock_period_ps", c.clock_period_ps);
  opt_real(j, "nominal_cell_ps", c.nominal_cell_ps);
  return c;
}

Json to_json(const TimingGraph& g) {
  Json nodes = Json::array();
  for (const TimingNode& n : g.nodes()) {
    Json node{{"id", n.id.value}, {"name", n.name}, {"kind", to_string(n.kind)}};
    if (n.cell_class) node["cell_class"] = to_string(*n.cell_class);
    if (n.drive_strength) node["drive_strength"] = *n.drive_strength;
    if (n.vt_class) node["vt_class"] = to_string(*n.vt_class);
    node["stage"] = to_string(n.stage_tag);
    node["x"] = n.placement.x;
    node["y"] = n.placement.y;
    nodes.push_back(node);
  }
  return Json{{"fabric_grid", Json{{"width", g.fabric_grid().width}, {"height", g.fabric_grid().height}}},
              {"clock", clock_json(g.clock())},
              {"nodes", nodes},
              {"edges", edges_json(g.edges())},
              {"register_timing", timing_map_json(g.register_timing())}};
}

TimingGraph graph_from_json(const Json& j) {
  std::vector<TimingNode> nodes;
  for (const Json& n : get_array(j, "nodes")) {
    TimingNode node;
    node.id = NodeId{get_int<std::uint32_t>(n, "id")};
    node.name = get_string(n, "name");
    node.kind = get_enum(n, "kind", node_kind_from_string);
    if (n.contains("cell_class")) node.cell_class = get_enum(n, "cell_class", cell_class_from_string);
    if (n.contains("drive_strength")) node.drive_strength = get_int<int>(n, "drive_strength");
    if (n.contains("vt_class")) node.vt_class = get_enum(n, "vt_class", vt_class_from_string);
    node.stage_tag = get_enum(n, "stage", stage_from_string);
    node.placement = {get_int<int>(n, "x"), get_int<int>(n, "y")};
    nodes.push_back(std::move(node));
  }
  const Json& grid = at(j, "fabric_grid");
  return TimingGraph(std::move(nodes), edges_from(j), timing_map_from(j), clock_from(at(j, "clock")),
                     FabricGrid{get_int<int>(grid, "width"), get_int<int>(grid, "height")});
}

Json to_json(const FpgaFabricModel& m) {
  return Json{{"lut_delay_ps", m.lut_delay_ps},
              {"carry_delay_ps", m.carry_delay_ps},
              {"mux_delay_ps", m.mux_delay_ps},
              {"memmacro_access_ps", m.memmacro_access_ps},
              {"ff_timing", register_timing_json(m.ff_timing)},
              {"switch_delay_ps", m.switch_delay_ps},
              {"segment_delay_ps", m.segment_delay_ps},
              {"hop_model", Json{{"base_per_tile", m.hop_model.base_per_tile},
                                 {"dispersion", m.hop_model.dispersion},
                                 {"congestion_gain", m.hop_model.congestion_gain}}},
              {"congestion_field", Json{{"hotspots", m.congestion_field.hotspots},
                                        {"radius_tiles", m.congestion_field.radius_tiles},
                                        {"amplitude_max", m.congestion_field.amplitude_max}}},
              {"clock_insertion_ps", m.clock_insertion_ps},
              {"clock_skew_spread_ps", m.clock_skew_spread_ps},
              {"clock_uncertainty_ps", m.clock_uncertainty_ps},
              {"target_period_ps", m.target_period_ps}};
}

FpgaFabricModel fpga_model_from_json(const Json& j, FpgaFabricModel m) {
  if (!j.is_object()) throw ParseError(0, "FPGA model is not a JSON object");
  opt_real(j, "lut_delay_ps", m.lut_delay_ps);
  opt_real(j, "carry_delay_ps", m.carry_delay_ps);
  opt_real(j, "mux_delay_ps", m.mux_delay_ps);
  opt_real(j, "memmacro_access_ps", m.memmacro_access_ps);
  if (j.contains("ff_timing")) m.ff_timing = register_timing_from(at(j, "ff_timing"), m.ff_timing);
  opt_real(j, "switch_delay_ps", m.switch_delay_ps);
  opt_real(j, "segment_delay_ps", m.segment_delay_ps);
  if (j.contains("hop_model")) {
    const Json& h = at(j, "hop_model");
    opt_real(h, "base_per_tile", m.hop_model.base_per_tile);
    opt_real(h, "dispersion", m.hop_model.dispersion);
    opt_real(h, "congestion_gain", m.hop_model.congestion_gain);
  }
  if (j.contains("congestion_field")) {
    const Json& c = at(j, "congestion_field");
    opt_int(c, "hotspots", m.congestion_field.hotspots);
    opt_real(c, "radius_tiles", m.congestion_field.radius_tiles);
    opt_real(c, "amplitude_max", m.congestion_field.amplitude_max);
  }
  opt_real(j, "clock_insertion_ps", m.clock_insertion_ps);
  opt_real(j, "clock_skew_spread_ps", m.clock_skew_spread_ps);
  opt_real(j, "clock_uncertainty_ps", m.clock_uncertainty_ps);
  opt_real(j, "target_period_ps", m.target_period_ps);
  return m;
}

Json to_json(const AsicFabricModel& m) {
  Json cells = Json::array();
  for (const auto& [key, ps] : m.cell_base_ps) {
    cells.push_back(Json{{"cell_class", to_string(key.cell_class)},
                         {"drive_strength", key.drive_strength},
                         {"vt_class", to_string(key.vt_class)},
                         {"ps", ps}});
  }
  return Json{{"cell_base_ps", cells},
              {"memmacro_access_ps", m.memmacro_access_ps},
              {"ff_timing", register_timing_json(m.ff_timing)},
              {"wire_ps_per_tile", Json{{"local", m.wire_ps_per_tile.local},
                                        {"intermediate", m.wire_ps_per_tile.intermediate},
                                        {"global", m.wire_ps_per_tile.global}}},
              {"layer_assignment_rule",
               Json{{"local_max_span", m.layer_assignment_rule.local_max_span},
                    {"intermediate_max_span", m.layer_assignment_rule.intermediate_max_span}}},
              {"corner_multipliers", Json{{"TT", m.corner_multipliers.tt},
                                          {"FF", m.corner_multipliers.ff},
                                          {"SS", m.corner_multipliers.ss}}},
              {"lvf_sigma_fraction", m.lvf_sigma_fraction},
              {"clock_insertion_ps", m.clock_insertion_ps},
              {"clock_skew_budget_ps", m.clock_skew_budget_ps},
              {"clock_uncertainty_ps", m.clock_uncertainty_ps},
              {"target_period_ps", m.target_period_ps}};
}

AsicFabricModel asic_model_from_json(const Json& j, AsicFabricModel m) {
  if (!j.is_object()) throw ParseError(0, "ASIC model is not a JSON object");
  if (j.contains("cell_base_ps")) {
    m.cell_base_ps.clear();
    for (const Json& c : get_array(j, "cell_base_ps")) {
      CellKey key{get_enum(c, "cell_class", cell_class_from_string), get_int<int>(c, "drive_strength"),
                  get_enum(c, "vt_class", vt_class_from_string)};
      m.cell_base_ps[key] = get_real(c, "ps");
    }
  }
  opt_real(j, "memmacro_access_ps", m.memmacro_access_ps);
  if (j.contains("ff_timing")) m.ff_timing = register_timing_from(at(j, "ff_timing"), m.ff_timing);
  if (j.contains("wire_ps_per_tile")) {
    const Json& w = at(j, "wire_ps_per_tile");
    opt_real(w, "local", m.wire_ps_per_tile.local);
    opt_real(w, "intermediate", m.wire_ps_per_tile.intermediate);
    opt_real(w, "global", m.wire_ps_per_tile.global);
  }
  if (j.contains("layer_assignment_rule")) {
    const Json& r = at(j, "layer_assignment_rule");
    opt_int(r, "local_max_span", m.layer_assignment_rule.local_max_span);
    opt_int(r, "intermediate_max_span", m.layer_assignment_rule.intermediate_max_span);
  }
  if (j.contains("corner_multipliers")) {
    const Json& k = at(j, "corner_multipliers");
    opt_real(k, "TT", m.corner_multipliers.tt);
    opt_real(k, "FF", m.corner_multipliers.ff);
    opt_real(k, "SS", m.corner_multipliers.ss);
  }
  opt_real(j, "lvf_sigma_fraction", m.lvf_sigma_fraction);
  opt_real(j, "clock_insertion_ps", m.clock_insertion_ps);
  opt_real(j, "clock_skew_budget_ps", m.clock_skew_budget_ps);
  opt_real(j, "clock_uncertainty_ps", m.clock_uncertainty_ps);
  opt_real(j, "target_period_ps", m.target_period_ps);
  return m;
}

Json to_json(const Calibration& c) { return Json{{"fpga", to_json(c.fpga)}, {"asic", to_json(c.asic)}}; }

Calibration calibration_from_json(const Json& j, Calibration c) {
  if (!j.is_object()) throw ParseError(0, "calibration is not a JSON object");
  if (j.contains("fpga")) c.fpga = fpga_model_from_json(at(j, "fpga"), c.fpga);
  if (j.contains("asic")) c.asic = asic_model_from_json(at(j, "asic"), c.asic);
  return c;
}

Json to_json(const Provenance& p) {
  Json j{{"fabric", to_string(p.fabric)}, {"label", p.label()}};
  if (p.fabric == Fabric::kFpga) j["seed"] = p.seed;
  if (p.fabric == Fabric::kAsic) {
    j["corner"] = to_string(p.corner);
    j["lvf_sample"] = p.lvf_sample ? Json(*p.lvf_sample) : Json(nullptr);
  }
  return j;
}

Provenance provenance_from_json(const Json& j) {
  Provenance p;
  p.fabric = get_enum(j, "fabric", fabric_from_string);
  if (p.fabric == Fabric::kFpga) p.seed = get_int<std::uint64_t>(j, "seed");
  if (p.fabric == Fabric::kAsic) {
    try {
      p.corner = corner_from_string(get_string(j, "corner"));
    } catch (const Error&) {
      bad("corner", "unknown corner '" + get_string(j, "corner") + "'");
    }
    if (!at(j, "lvf_sample").is_null()) p.lvf_sample = get_int<std::uint64_t>(j, "lvf_sample");
  }
  return p;
}

Json to_json(const RealizedDesign& d) {
  Json model = nullptr;
  if (const auto* f = std::get_if<FpgaFabricModel>(&d.model())) {
    model = Json{{"fabric", "fpga"}};
    model.update(to_json(*f));
  } else if (const auto* a = std::get_if<AsicFabricModel>(&d.model())) {
    model = Json{{"fabric", "asic"}};
    model.update(to_json(*a));
  }
  return Json{{"provenance", to_json(d.provenance())},
              {"model", model},
              {"graph", to_json(d.graph())},
              {"clock", clock_json(d.clock())},
              {"edges", edges_json(d.edges())},
              {"register_timing", timing_map_json(d.register_timing())}};
}

RealizedDesign design_from_json(const Json& j) {
  auto graph = std::make_shared<const TimingGraph>(graph_from_json(at(j, "graph")));
  FabricModel model;
  const Json& m = at(j, "model");
  if (!m.is_null()) {
    const std::string& fabric = get_string(m, "fabric");
    if (fabric == "fpga") {
      model = fpga_model_from_json(m);
    } else if (fabric == "asic") {
      model = asic_model_from_json(m);
    } else {
      bad("model.fabric", "unknown fabric '" + fabric + "'");
    }
  }
  auto edges = edges_from(j);
  if (edges.size() != graph->edges().size()) bad("edges", "count differs from the graph");
  return RealizedDesign(graph, std::move(edges), timing_map_from(j), clock_from(at(j, "clock")),
                        provenance_from_json(at(j, "provenance")), std::move(model));
}

Json to_json(const StageStatistics& s) {
  Json bins = Json::array();
  for (std::size_t i = 0; i < s.histogram.counts.size(); ++i) {
    bins.push_back(Json{{"bin_lo_ps", s.histogram.edges[i]},
                        {"bin_hi_ps", s.histogram.edges[i + 1]},
                        {"count", s.histogram.counts[i]}});
  }
  return Json{{"transition", to_string(s.transition)},
              {"n", s.n},
              {"mean_ps", real(s.mean_ps)},
              {"std_ps", real(s.std_ps)},
              {"skewness", real(s.skewness)},
              {"excess_kurtosis", real(s.excess_kurtosis)},
              {"min_ps", real(s.min_ps)},
              {"max_ps", real(s.max_ps)},
              {"histogram", bins}};
}

Json to_json(const SensitivityReport& r) {
  auto corr = [](const Correlation& c) {
    return Json{{"n", c.n}, {"r", real(c.r)}, {"defined", c.defined}};
  };
  auto entry = [&](const SensitivityEntry& e) {
    return Json{{"hops_vs_routing", corr(e.hops_vs_routing)},
                {"congestion_vs_routing", corr(e.congestion_vs_routing)}};
  };
  Json by = Json::object();
  for (const auto& [t, e] : r.by_transition) by[to_string(t)] = entry(e);
  return Json{{"overall", entry(r.overall)}, {"by_transition", by}};
}

Json to_json(const FabricSignature& f) {
  Json ts = Json::object();
  for (const auto& [t, s] : f.transitions) {
    ts[to_string(t)] = Json{{"n", s.n},
                            {"sigma_ps", real(s.sigma_ps)},
                            {"skewness", real(s.skewness)},
                            {"mean_logic_levels", real(s.mean_logic_levels)},
                            {"shape", to_string(s.shape)}};
  }
  return Json{{"fabric", f.fabric},
              {"realizations", f.realizations},
              {"fmax_mhz", spread_json(f.fmax_mhz)},
              {"routing_fraction", spread_json(f.routing_fraction)},
              {"logic_fraction", spread_json(f.logic_fraction)},
              {"clocking_fraction", spread_json(f.clocking_fraction)},
              {"routing_sigma_ps", real(f.routing_sigma_ps)},
              {"logic_sigma_ps", real(f.logic_sigma_ps)},
              {"bottleneck", to_string(f.bottleneck)},
              {"dominance", real(f.dominance)},
              {"variability", to_string(f.variability)},
              {"transitions", ts}};
}

Json to_json(const SignatureReport& r) {
  Json ratios = Json::object();
  for (const auto& [t, v] : r.robustness_ratio) ratios[to_string(t)] = real(v);
  return Json{{"fpga", to_json(r.fpga)},
              {"asic", to_json(r.asic)},
              {"robustness_ratio", ratios},
              {"mean_robustness_ratio", real(r.mean_robustness_ratio)}};
}

SignatureReport signature_report_from_json(const Json& j) {
  SignatureReport r;
  r.fpga = fabric_signature_from(at(j, "fpga"));
  r.asic = fabric_signature_from(at(j, "asic"));
  const Json& ratios = at(j, "robustness_ratio");
  if (!ratios.is_object()) bad("robustness_ratio", "expected an object");
  for (const auto& [name, v] : ratios.items()) {
    auto t = transition_from_string(name);
    if (!t) bad("robustness_ratio", "unknown transition '" + name + "'");
    r.robustness_ratio[*t] = as_real(v, "robustness_ratio");
  }
  r.mean_robustness_ratio = get_real(j, "mean_robustness_ratio");
  return r;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw ParseError(0, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIoFailure, "write failed for '" + path + "'");
}

}  // namespace stagesta
