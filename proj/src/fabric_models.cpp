#include "stagesta/fabric_models.hpp"

#include <algorithm>
#include <cmath>

#include "stagesta/error.hpp"
#include "stagesta/random.hpp"

namespace stagesta {

const char* to_string(Fabric fabric) {
  switch (fabric) {
    case Fabric::kAnnotated: return "annotated";
    case Fabric::kFpga: return "fpga";
    case Fabric::kAsic: return "asic";
  }
  return "";
}

const char* to_string(Corner corner) {
  switch (corner) {
    case Corner::kFF: return "FF";
    case Corner::kTT: return "TT";
    case Corner::kSS: return "SS";
  }
  return "";
}

std::optional<Fabric> fabric_from_string(std::string_view text) {
  for (Fabric f : {Fabric::kAnnotated, Fabric::kFpga, Fabric::kAsic}) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

Corner corner_from_string(std::string_view text) {
  for (Corner c : {Corner::kFF, Corner::kTT, Corner::kSS}) {
    if (text == to_string(c)) return c;
  }
  throw Error(ErrorKind::kInvalidCorner, "unknown corner '" + std::string(text) + "'");
}

double WireDelays::at(MetalLayer layer) const {
  switch (layer) {
    case MetalLayer::kLocal: return local;
    case MetalLayer::kIntermediate: return intermediate;
    case MetalLayer::kGlobal: return global;
  }
  return global;
}

MetalLayer LayerAssignmentRule::layer(int span) const {
  if (span <= local_max_span) return MetalLayer::kLocal;
  if (span <= intermediate_max_span) return MetalLayer::kIntermediate;
  return MetalLayer::kGlobal;
}

double CornerMultipliers::at(Corner corner) const {
  switch (corner) {
    case Corner::kFF: return ff;
    case Corner::kTT: return tt;
    case Corner::kSS: return ss;
  }
  return tt;
}

double AsicFabricModel::cell_base(const CellKey& key) const {
  if (auto it = cell_base_ps.find(key); it != cell_base_ps.end()) return it->second;
  CellKey fallback{CellClass::kStdCell, key.drive_strength, key.vt_class};
  if (auto it = cell_base_ps.find(fallback); it != cell_base_ps.end()) return it->second;
  throw Error(ErrorKind::kInvalidModel,
              std::string("no cell delay for ") + to_string(key.cell_class) + " drive " +
                  std::to_string(key.drive_strength) + " " + to_string(key.vt_class));
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::kInvalidModel, what);
}

bool nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void check_ff(const RegisterTiming& t) {
  require(nonneg(t.clk_to_q_late_ps) && nonneg(t.clk_to_q_early_ps) && nonneg(t.setup_ps) &&
              nonneg(t.hold_ps),
          "ff_timing values must be >= 0");
  require(t.clk_to_q_early_ps <= t.clk_to_q_late_ps, "ff_timing early clk-to-q exceeds late");
}

}  // namespace

void check_model(const FpgaFabricModel& m) {
  require(nonneg(m.lut_delay_ps) && nonneg(m.carry_delay_ps) && nonneg(m.mux_delay_ps) &&
              nonneg(m.memmacro_access_ps) && nonneg(m.switch_delay_ps) &&
              nonneg(m.segment_delay_ps) && nonneg(m.clock_insertion_ps) &&
              nonneg(m.clock_skew_spread_ps) && nonneg(m.clock_uncertainty_ps) &&
              nonneg(m.target_period_ps),
          "FPGA delay parameters must be >= 0");
  check_ff(m.ff_timing);
  require(std::isfinite(m.hop_model.dispersion) && m.hop_model.dispersion > 0,
          "hop dispersion must be > 0");
  require(nonneg(m.hop_model.base_per_tile) && nonneg(m.hop_model.congestion_gain),
          "hop model parameters must be >= 0");
  require(m.congestion_field.hotspots >= 0 && m.congestion_field.radius_tiles > 0 &&
              m.congestion_field.amplitude_max >= 0 && m.congestion_field.amplitude_max <= 1,
          "congestion field: hotspots >= 0, radius > 0, amplitude in [0, 1]");
}

void check_model(const AsicFabricModel& m) {
  for (const auto& [key, v] : m.cell_base_ps) {
    require(nonneg(v), "cell delays must be >= 0");
    require(key.cell_class != CellClass::kMemMacro, "macros use memmacro_access_ps");
  }
  require(nonneg(m.memmacro_access_ps) && nonneg(m.clock_insertion_ps) &&
              nonneg(m.clock_skew_budget_ps) && nonneg(m.clock_uncertainty_ps) &&
              nonneg(m.target_period_ps),
          "ASIC delay parameters must be >= 0");
  check_ff(m.ff_timing);
  require(nonneg(m.wire_ps_per_tile.local) && nonneg(m.wire_ps_per_tile.intermediate) &&
              nonneg(m.wire_ps_per_tile.global),
          "wire delays must be >= 0");
  require(m.layer_assignment_rule.local_max_span >= 0 &&
              m.layer_assignment_rule.local_max_span <= m.layer_assignment_rule.intermediate_max_span,
          "layer thresholds must satisfy 0 <= local <= intermediate");
  const auto& c = m.corner_multipliers;
  require(c.tt == 1.0, "TT multiplier must be 1.0");
  require(c.ff > 0 && c.ff < 1.0 && c.ss > 1.0 && std::isfinite(c.ss),
          "corner multipliers must satisfy 0 < FF < 1 < SS");
  require(nonneg(m.lvf_sigma_fraction) && m.lvf_sigma_fraction < 0.2,
          "lvf_sigma_fraction must be in [0, 0.2)");
}

std::string Provenance::label() const {
  switch (fabric) {
    case Fabric::kFpga: return "fpga:seed=" + std::to_string(seed);
    case Fabric::kAsic:
      return std::string("asic:corner=") + to_string(corner) +
             (lvf_sample ? ":sample=" + std::to_string(*lvf_sample) : std::string());
    case Fabric::kAnnotated: return "annotated";
  }
  return "";
}

RealizedDesign::RealizedDesign(std::shared_ptr<const TimingGraph> graph,
                               std::vector<TimingEdge> edges,
                               std::map<NodeId, RegisterTiming> register_timing, ClockSpec clock,
                               Provenance provenance, FabricModel model)
    : graph_(std::move(graph)),
      edges_(std::move(edges)),
      register_timing_(std::move(register_timing)),
      clock_(std::move(clock)),
      provenance_(provenance),
      model_(std::move(model)) {}

RealizedDesign RealizedDesign::from_annotated(std::shared_ptr<const TimingGraph> graph) {
  auto edges = graph->edges();
  auto timing = graph->register_timing();
  auto clock = graph->clock();
  return RealizedDesign(std::move(graph), std::move(edges), std::move(timing), std::move(clock),
                        Provenance{});
}

RealizedDesign RealizedDesign::from_annotated(const TimingGraph& graph) {
  return from_annotated(std::make_shared<const TimingGraph>(graph));
}

RegisterTiming RealizedDesign::timing_of(NodeId reg) const {
  auto it = register_timing_.find(reg);
  return it == register_timing_.end() ? RegisterTiming{} : it->second;
}

RealizedDesign RealizedDesign::with_clock(ClockSpec clock) const {
  RealizedDesign copy = *this;
  copy.clock_ = std::move(clock);
  return copy;
}

bool operator==(const RealizedDesign& a, const RealizedDesign& b) {
  return (a.graph_ == b.graph_ || *a.graph_ == *b.graph_) && a.edges_ == b.edges_ &&
         a.register_timing_ == b.register_timing_ && a.clock_ == b.clock_ &&
         a.provenance_ == b.provenance_;
}

namespace {

CellClass arc_class(const TimingGraph& g, std::size_t e) {
  const auto& src = g.node(g.edge_src(e));
  if (src.cell_class) return *src.cell_class;
  const auto& dst = g.node(g.edge_dst(e));
  if (dst.cell_class) return *dst.cell_class;
  return CellClass::kStdCell;
}

CellKey arc_key(const TimingGraph& g, std::size_t e) {
  const auto& src = g.node(g.edge_src(e));
  const auto& cell = src.cell_class ? src : g.node(g.edge_dst(e));
  return {arc_class(g, e), cell.drive_strength.value_or(1), cell.vt_class.value_or(VtClass::kSvt)};
}

double period_for(const TimingGraph& g, double target) {
  return target > 0 ? target : g.clock().period_ps;
}

}  // namespace

double fpga_congestion(const FpgaFabricModel& model, const FabricGrid& grid, std::uint64_t seed,
                       double x, double y) {
  const auto& field = model.congestion_field;
  double sum = 0.0;
  for (int h = 0; h < field.hotspots; ++h) {
    CounterRng rng(stream_key(seed, "congestion", static_cast<std::uint64_t>(h)));
    const double cx = rng.uniform(0.0, grid.width - 1.0);
    const double cy = rng.uniform(0.0, grid.height - 1.0);
    const double amp = rng.uniform(0.0, field.amplitude_max);
    const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
    sum += amp * std::exp(-d2 / (2.0 * field.radius_tiles * field.radius_tiles));
  }
  return std::clamp(model.hop_model.congestion_gain * sum, 0.0, 10.0);
}

RealizedDesign realize_fpga(std::shared_ptr<const TimingGraph> graph, const FpgaFabricModel& model,
                            std::uint64_t seed) {
  check_model(model);
  const TimingGraph& g = *graph;
  const double hop_ps = model.switch_delay_ps + model.segment_delay_ps;
  const double sigma = model.hop_model.dispersion;

  std::vector<TimingEdge> edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    TimingEdge& edge = edges[e];
    if (!g.edge_resolved(e)) continue;
    if (edge.kind == EdgeKind::kCellArc) {
      double d = 0.0;
      switch (arc_class(g, e)) {
        case CellClass::kLut:
        case CellClass::kStdCell: d = model.lut_delay_ps; break;
        case CellClass::kCarryChain: d = model.carry_delay_ps; break;
        case CellClass::kMux: d = model.mux_delay_ps; break;
        case CellClass::kMemMacro: d = model.memmacro_access_ps; break;
      }
      edge.logic_ps = {d, d};
      edge.routing_ps = {};
      edge.hop_count = 0;
      edge.congestion_weight = 0.0;
      continue;
    }
    const Placement a = g.node(g.edge_src(e)).placement;
    const Placement b = g.node(g.edge_dst(e)).placement;
    const int dist = manhattan(a, b);
    const double congestion = fpga_congestion(model, g.fabric_grid(), seed, (a.x + b.x) / 2.0,
                                              (a.y + b.y) / 2.0);
    CounterRng rng(stream_key(seed, "hop", e));
    const double multiplier = std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
    const double raw = model.hop_model.base_per_tile * dist * (1.0 + congestion) * multiplier;
    const int hops = static_cast<int>(std::lround(raw));
    const double max = hops * hop_ps;
    edge.logic_ps = {};
    edge.routing_ps = {kFpgaMinRoutingFraction * max, max};
    edge.hop_count = hops;
    edge.congestion_weight = congestion;
  }

  std::map<NodeId, RegisterTiming> timing;
  ClockSpec clock;
  clock.period_ps = period_for(g, model.target_period_ps);
  clock.uncertainty_ps = model.clock_uncertainty_ps;
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (!g.is_register(v)) continue;
    const NodeId id = g.node(v).id;
    timing[id] = model.ff_timing;
    CounterRng rng(stream_key(seed, "clock", v));
    clock.insertion_delay_ps[id] =
        model.clock_insertion_ps +
        rng.uniform(-model.clock_skew_spread_ps, model.clock_skew_spread_ps);
  }
  return RealizedDesign(std::move(graph), std::move(edges), std::move(timing), std::move(clock),
                        Provenance{Fabric::kFpga, seed, Corner::kTT, std::nullopt}, model);
}

namespace {

// Fixed key for the synthesized clock tree; it does not vary with samples.
constexpr std::uint64_t kCtsKey = 0x5d1c7ee5ULL;

double lvf_factor(std::optional<std::uint64_t> sample, std::string_view domain,
                  std::uint64_t index, double sigma) {
  if (!sample || sigma <= 0) return 0.0;
  CounterRng rng(stream_key(*sample, domain, index));
  return sigma * std::clamp(rng.normal(), -4.0, 4.0);
}

}  // namespace

RealizedDesign realize_asic(std::shared_ptr<const TimingGraph> graph, const AsicFabricModel& model,
                            Corner corner, std::optional<std::uint64_t> lvf_sample) {
  check_model(model);
  const TimingGraph& g = *graph;
  const double k_max = model.corner_multipliers.at(corner);
  const double k_min = std::min(model.corner_multipliers.ff, k_max);
  const double sigma = model.lvf_sigma_fraction;

  std::vector<TimingEdge> edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    TimingEdge& edge = edges[e];
    if (!g.edge_resolved(e)) continue;
    edge.hop_count = 0;
    edge.congestion_weight = 0.0;
    if (edge.kind == EdgeKind::kCellArc) {
      const CellKey key = arc_key(g, e);
      const double base = key.cell_class == CellClass::kMemMacro ? model.memmacro_access_ps
                                                                 : model.cell_base(key);
      const double gfac = 1.0 + lvf_factor(lvf_sample, "cell", e, sigma);
      edge.logic_ps = {base * k_min * gfac, base * k_max * gfac};
      edge.routing_ps = {};
      continue;
    }
    const int span = manhattan(g.node(g.edge_src(e)).placement, g.node(g.edge_dst(e)).placement);
    const double wire = model.wire_ps_per_tile.at(model.layer_assignment_rule.layer(span)) * span;
    edge.logic_ps = {};
    edge.routing_ps = {wire * k_min, wire * k_max};
  }

  std::vector<std::size_t> regs;
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (g.is_register(v)) regs.push_back(v);
  }
  std::vector<double> offsets(regs.size(), 0.0);
  double mean = 0.0;
  for (std::size_t r = 0; r < regs.size(); ++r) {
    CounterRng rng(stream_key(kCtsKey, "cts", regs[r]));
    offsets[r] = rng.uniform(-1.0, 1.0);
    mean += offsets[r];
  }
  if (!regs.empty()) mean /= static_cast<double>(regs.size());
  double extent = 1.0;
  for (double& o : offsets) {
    o -= mean;
    extent = std::max(extent, std::abs(o));
  }

  std::map<NodeId, RegisterTiming> timing;
  ClockSpec clock;
  clock.period_ps = period_for(g, model.target_period_ps);
  clock.uncertainty_ps = model.clock_uncertainty_ps;
  const RegisterTiming& ff = model.ff_timing;
  for (std::size_t r = 0; r < regs.size(); ++r) {
    const NodeId id = g.node(regs[r]).id;
    const double gq = 1.0 + lvf_factor(lvf_sample, "clk_to_q", regs[r], sigma);
    const double gs = 1.0 + lvf_factor(lvf_sample, "setup", regs[r], sigma);
    timing[id] = RegisterTiming{ff.clk_to_q_late_ps * k_max * gq, ff.clk_to_q_early_ps * k_min * gq,
                                ff.setup_ps * k_max * gs, ff.hold_ps * k_max * gs};
    clock.insertion_delay_ps[id] =
        (model.clock_insertion_ps + model.clock_skew_budget_ps * offsets[r] / extent) * k_max;
  }
  return RealizedDesign(std::move(graph), std::move(edges), std::move(timing), std::move(clock),
                        Provenance{Fabric::kAsic, 0, corner, lvf_sample}, model);
}

RealizedDesign replay(const RealizedDesign& design) {
  const Provenance& p = design.provenance();
  if (p.fabric == Fabric::kFpga) {
    const auto* m = std::get_if<FpgaFabricModel>(&design.model());
    if (!m) throw Error(ErrorKind::kInvalidModel, "design carries no FPGA model");
    return realize_fpga(design.graph_ptr(), *m, p.seed);
  }
  if (p.fabric == Fabric::kAsic) {
    const auto* m = std::get_if<AsicFabricModel>(&design.model());
    if (!m) throw Error(ErrorKind::kInvalidModel, "design carries no ASIC model");
    return realize_asic(design.graph_ptr(), *m, p.corner, p.lvf_sample);
  }
  return RealizedDesign::from_annotated(design.graph_ptr());
}

}  // namespace stagesta
