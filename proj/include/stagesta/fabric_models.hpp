#ifndef STAGESTA_FABRIC_MODELS_HPP
#define STAGESTA_FABRIC_MODELS_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "stagesta/timing_graph.hpp"

namespace stagesta {

enum class Fabric { kAnnotated, kFpga, kAsic };
enum class Corner { kFF, kTT, kSS };

const char* to_string(Fabric fabric);
const char* to_string(Corner corner);
std::optional<Fabric> fabric_from_string(std::string_view text);
// Throws Error(kInvalidCorner) for anything but TT, FF or SS.
Corner corner_from_string(std::string_view text);

// FPGA min-side routing is this fraction of the max-side value.
inline constexpr double kFpgaMinRoutingFraction = 0.85;

// Hop count of a net:
//   round(base_per_tile * manhattan * (1 + congestion) * L),
// L lognormal with unit mean and log-space sigma `dispersion`.
struct HopModel {
  double base_per_tile = 1.0;
  double dispersion = 0.3;
  // Scales the hotspot field into the per-net congestion term.
  double congestion_gain = 0.5;
};

// Seeded sum of Gaussian hotspots over the fabric grid.
struct CongestionField {
  int hotspots = 3;
  double radius_tiles = 6.0;
  // Hotspot amplitudes are drawn uniformly from [0, amplitude_max].
  double amplitude_max = 1.0;
};

struct FpgaFabricModel {
  double lut_delay_ps = 0.0;
  double carry_delay_ps = 0.0;
  double mux_delay_ps = 0.0;
  double memmacro_access_ps = 0.0;
  RegisterTiming ff_timing;
  double switch_delay_ps = 0.0;
  double segment_delay_ps = 0.0;
  HopModel hop_model;
  CongestionField congestion_field;
  double clock_insertion_ps = 0.0;
  double clock_skew_spread_ps = 0.0;
  double clock_uncertainty_ps = 0.0;
  // Constraint period of realized designs; 0 keeps the graph's period.
  double target_period_ps = 0.0;
};

struct CellKey {
  CellClass cell_class = CellClass::kStdCell;
  int drive_strength = 1;
  VtClass vt_class = VtClass::kSvt;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

enum class MetalLayer { kLocal, kIntermediate, kGlobal };

struct WireDelays {
  double local = 0.0;
  double intermediate = 0.0;
  double global = 0.0;

  double at(MetalLayer layer) const;
};

// Spans (tiles) up to local_max_span route on local metal, up to
// intermediate_max_span on intermediate metal, beyond that on global metal.
struct LayerAssignmentRule {
  int local_max_span = 2;
  int intermediate_max_span = 8;

  MetalLayer layer(int span) const;
};

struct CornerMultipliers {
  double tt = 1.0;
  double ff = 0.90;
  double ss = 1.135;

  double at(Corner corner) const;
};

struct AsicFabricModel {
  std::map<CellKey, double> cell_base_ps;
  double memmacro_access_ps = 0.0;
  RegisterTiming ff_timing;
  WireDelays wire_ps_per_tile;
  LayerAssignmentRule layer_assignment_rule;
  CornerMultipliers corner_multipliers;
  double lvf_sigma_fraction = 0.0;
  double clock_insertion_ps = 0.0;
  double clock_skew_budget_ps = 0.0;
  double clock_uncertainty_ps = 0.0;
  double target_period_ps = 0.0;

  // Base delay for a logic cell; falls back to the StdCell entry with the
  // same drive and Vt. Throws Error(kInvalidModel) when neither exists.
  double cell_base(const CellKey& key) const;
};

// Throw Error(kInvalidModel) on broken model invariants.
void check_model(const FpgaFabricModel& model);
void check_model(const AsicFabricModel& model);

using FabricModel = std::variant<std::monostate, FpgaFabricModel, AsicFabricModel>;

struct Provenance {
  Fabric fabric = Fabric::kAnnotated;
  std::uint64_t seed = 0;
  Corner corner = Corner::kTT;
  std::optional<std::uint64_t> lvf_sample;

  std::string label() const;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// A timing graph with concrete delays. Edge order matches the source graph.
class RealizedDesign {
 public:
  RealizedDesign(std::shared_ptr<const TimingGraph> graph, std::vector<TimingEdge> edges,
                 std::map<NodeId, RegisterTiming> register_timing, ClockSpec clock,
                 Provenance provenance, FabricModel model = {});

  // Uses the graph's own annotated delays, register timing and clock.
  static RealizedDesign from_annotated(std::shared_ptr<const TimingGraph> graph);
  static RealizedDesign from_annotated(const TimingGraph& graph);

  const TimingGraph& graph() const { return *graph_; }
  const std::shared_ptr<const TimingGraph>& graph_ptr() const { return graph_; }
  const std::vector<TimingEdge>& edges() const { return edges_; }
  const TimingEdge& edge(std::size_t index) const { return edges_[index]; }
  const std::map<NodeId, RegisterTiming>& register_timing() const { return register_timing_; }
  // Zero timing for registers without an entry.
  RegisterTiming timing_of(NodeId reg) const;
  const ClockSpec& clock() const { return clock_; }
  const Provenance& provenance() const { return provenance_; }
  const FabricModel& model() const { return model_; }

  RealizedDesign with_clock(ClockSpec clock) const;

  // Same delays, clock and provenance (graph compared by value).
  friend bool operator==(const RealizedDesign& a, const RealizedDesign& b);

 private:
  std::shared_ptr<const TimingGraph> graph_;
  std::vector<TimingEdge> edges_;
  std::map<NodeId, RegisterTiming> register_timing_;
  ClockSpec clock_;
  Provenance provenance_;
  FabricModel model_;
};

// Seeded FPGA realization. Cell delays come from a cell-class lookup; every
// net draws its hop count from a stream keyed by (seed, edge index); register
// insertion delays are clock_insertion_ps plus a uniform draw in
// +/- clock_skew_spread_ps keyed by (seed, node position).
RealizedDesign realize_fpga(std::shared_ptr<const TimingGraph> graph, const FpgaFabricModel& model,
                            std::uint64_t seed);

// Corner-derated ASIC realization. Every propagation delay (cells, macros,
// wires, register arcs, clock insertion) is scaled by the corner multiplier;
// clock uncertainty is not. Min-side delays use the FF multiplier. With an
// LVF sample, each cell (macros included) and register arc gets a truncated (+/-4 sigma)
// Gaussian factor keyed by (sample, element index).
RealizedDesign realize_asic(std::shared_ptr<const TimingGraph> graph, const AsicFabricModel& model,
                            Corner corner, std::optional<std::uint64_t> lvf_sample);

// Re-runs the realization named by the design's provenance and model.
RealizedDesign replay(const RealizedDesign& design);

// Congestion term at a point for a given seed (already multiplied by the
// hop model's congestion gain).
double fpga_congestion(const FpgaFabricModel& model, const FabricGrid& grid, std::uint64_t seed,
                       double x, double y);

struct Calibration {
  FpgaFabricModel fpga;
  AsicFabricModel asic;
};

// Shipped constants for the default pipeline. calibrate() refits their
// overall scale and the SS multiplier.
Calibration default_calibration();

struct CalibrationTargets {
  double fpga_mean_fmax_mhz = 493.0;
  std::size_t fpga_seeds = 30;
  double asic_tt_fmax_mhz = 1850.0;
  double asic_ss_fmax_mhz = 1630.0;
  // ASIC Fmax targets apply to the mean over LVF samples 1..n; 0 fits the
  // deterministic corner instead.
  std::size_t asic_samples = 200;
};

struct CalibrationFit {
  Calibration calibration;
  // Factors applied to every FPGA and ASIC delay of the base calibration.
  double fpga_scale = 1.0;
  double asic_scale = 1.0;
  // Achieved values, re-measured on the fitted models.
  double fpga_mean_fmax_mhz = 0.0;
  double asic_tt_fmax_mhz = 0.0;
  double asic_ss_fmax_mhz = 0.0;
};

// Uniform delay scaling leaves every path ranking unchanged, so the FPGA and
// ASIC scales are closed form (mean Fmax over seeds or LVF samples). The SS
// multiplier is solved by bisection with clock uncertainty held underated.
CalibrationFit calibrate(std::shared_ptr<const TimingGraph> graph, const Calibration& base,
                         const CalibrationTargets& targets = {}, std::size_t jobs = 0);

}  // namespace stagesta

#endif  // STAGESTA_FABRIC_MODELS_HPP
