#ifndef STAGESTA_STA_ENGINE_HPP
#define STAGESTA_STA_ENGINE_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "stagesta/fabric_models.hpp"
#include "stagesta/timing_graph.hpp"

namespace stagesta {

enum class Transition { kIfId, kIdEx, kExMem, kMemWb, kWbRf };
enum class PathClass { kRegToAlu, kAluToMem, kRegfileAccess, kBypassHazard, kControlProp };

// The four pipeline transitions that enter stage statistics (WB->RF excluded).
inline constexpr std::array<Transition, 4> kPipelineTransitions{
    Transition::kIfId, Transition::kIdEx, Transition::kExMem, Transition::kMemWb};
inline constexpr std::array<Transition, 5> kAllTransitions{
    Transition::kIfId, Transition::kIdEx, Transition::kExMem, Transition::kMemWb,
    Transition::kWbRf};

// "IF->ID", "ID->EX", "EX->MEM", "MEM->WB", "WB->RF".
const char* to_string(Transition t);
const char* to_string(PathClass c);
std::optional<Transition> transition_from_string(std::string_view text);
std::optional<PathClass> path_class_from_string(std::string_view text);

// Transition of a register-to-register path from the stage tags of its
// endpoints: a WB launch captured by an ID register writes the register file
// (WB->RF); otherwise the capture stage decides (IF and ID captures are
// IF->ID, EX is ID->EX, MEM is EX->MEM, WB is MEM->WB). Throws
// Error(kUnclassifiable) for untagged endpoints.
Transition transition_for(Stage launch, Stage capture);

struct ArrivalWindow {
  double max = -std::numeric_limits<double>::infinity();
  double min = std::numeric_limits<double>::infinity();

  bool reached() const { return max != -std::numeric_limits<double>::infinity(); }
};

// Indexed by node position. `launch` holds the arrival at a node's output
// (for registers: insertion + clk-to-q; for input ports: 0). `capture` holds
// the data-pin arrival of registers and sink ports.
struct Arrivals {
  std::vector<ArrivalWindow> launch;
  std::vector<ArrivalWindow> capture;
};

// Restricts which registers may launch paths; empty means all.
using LaunchFilter = std::function<bool(const TimingNode&)>;

// Single topological pass. Throws Error(kCyclicGraph).
Arrivals compute_arrivals(const RealizedDesign& design, const LaunchFilter& launch = {});

struct DelayDecomposition {
  double logic_ps = 0.0;
  double routing_ps = 0.0;
  double clocking_ps = 0.0;

  double total_ps() const { return logic_ps + routing_ps + clocking_ps; }
  // All zero when the total is zero.
  double logic_fraction() const;
  double routing_fraction() const;
  double clocking_fraction() const;
};

struct TimingPath {
  NodeId launch;
  NodeId capture;
  // Edge indices from launch to capture.
  std::vector<std::size_t> edges;
  double data_delay_max_ps = 0.0;
  double data_delay_min_ps = 0.0;
  DelayDecomposition decomposition;
  Transition transition = Transition::kIfId;
  PathClass path_class = PathClass::kRegToAlu;
  double setup_slack_ps = 0.0;
  double hold_slack_ps = 0.0;
  int logic_levels = 0;
  int hop_count = 0;
  double congestion_mean = 0.0;

  // Node ids from launch to capture.
  std::vector<NodeId> node_sequence(const TimingGraph& graph) const;
};

// slack = T + ins(capture) - ins(launch) - uncertainty
//         - (clk_to_q_late(launch) + sum logic_max + sum routing_max + setup(capture))
// Throws Error(kUnknownRegister) when an endpoint is not a register.
double setup_slack(const TimingPath& path, const RealizedDesign& design, const ClockSpec& clock);
double setup_slack(const TimingPath& path, const RealizedDesign& design);

// slack = (clk_to_q_early(launch) + sum logic_min + sum routing_min) - hold(capture)
//         - (ins(capture) - ins(launch)) - uncertainty
double hold_slack(const TimingPath& path, const RealizedDesign& design, const ClockSpec& clock);
double hold_slack(const TimingPath& path, const RealizedDesign& design);

// logic = sum logic_max + clk_to_q_late(launch); routing = sum routing_max;
// clocking = uncertainty + |skew| + setup(capture).
DelayDecomposition decompose(const TimingPath& path, const RealizedDesign& design);

std::pair<Transition, PathClass> classify(const TimingPath& path, const TimingGraph& graph);

// Builds a fully annotated path from a launch-to-capture edge chain.
TimingPath make_path(const RealizedDesign& design, std::vector<std::size_t> edges);

struct PathQuery {
  // Defaults to all registers.
  LaunchFilter launch;
  std::function<bool(const TimingNode&)> capture;
};

inline constexpr std::size_t kMaxPathsPerDesign = 10000;

// The k worst-setup-slack register-to-register paths, ascending by slack,
// ties broken by lexicographic node-id sequence. Returns every path when
// fewer than k exist. k is capped at kMaxPathsPerDesign.
std::vector<TimingPath> extract_paths(const RealizedDesign& design, std::size_t k,
                                      const PathQuery& query = {});

// The k worst paths of one transition.
std::vector<TimingPath> extract_transition_paths(const RealizedDesign& design,
                                                 Transition transition, std::size_t k);

// The worst path of each of the k worst (launch, capture) register pairs of
// one transition, in the same order as extract_paths. Near-duplicate paths
// through one pair collapse to a single sample.
std::vector<TimingPath> extract_pair_paths(const RealizedDesign& design, Transition transition,
                                           std::size_t k);

// Clock period consumed by a path: T minus its setup slack.
double consumption_ps(const TimingPath& path, const RealizedDesign& design);

// 1e6 / worst consumption (MHz); 0 for designs without register paths.
double fmax(const RealizedDesign& design);

}  // namespace stagesta

#endif  // STAGESTA_STA_ENGINE_HPP
