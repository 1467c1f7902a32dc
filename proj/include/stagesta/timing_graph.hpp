#ifndef STAGESTA_TIMING_GRAPH_HPP
#define STAGESTA_TIMING_GRAPH_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stagesta {

// All delays are real-valued picoseconds. Tests compare with a 1e-9 ps
// tolerance.
inline constexpr double kTimeEpsilonPs = 1e-9;

struct NodeId {
  std::uint32_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

enum class NodeKind { kRegister, kCombCell, kClockSource, kPort };
enum class CellClass { kLut, kCarryChain, kMux, kStdCell, kMemMacro };
enum class VtClass { kLvt, kSvt, kHvt };
enum class Stage { kIF, kID, kEX, kMEM, kWB, kNone };
enum class EdgeKind { kCellArc, kNet };

struct Placement {
  int x = 0;
  int y = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

inline int manhattan(const Placement& a, const Placement& b) {
  return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y);
}

struct TimingNode {
  NodeId id;
  std::string name;
  NodeKind kind = NodeKind::kCombCell;
  // CombCell only.
  std::optional<CellClass> cell_class;
  // Standard-cell implementation attributes. Generated graphs carry them on
  // every non-macro CombCell so one graph serves both fabrics.
  std::optional<int> drive_strength;
  std::optional<VtClass> vt_class;
  Stage stage_tag = Stage::kNone;
  Placement placement;

  friend bool operator==(const TimingNode&, const TimingNode&) = default;
};

struct RegisterTiming {
  double clk_to_q_late_ps = 0.0;
  double clk_to_q_early_ps = 0.0;
  double setup_ps = 0.0;
  double hold_ps = 0.0;

  friend bool operator==(const RegisterTiming&, const RegisterTiming&) = default;
};

struct MinMax {
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const MinMax&, const MinMax&) = default;
};

struct TimingEdge {
  NodeId src;
  NodeId dst;
  EdgeKind kind = EdgeKind::kNet;
  MinMax logic_ps;
  MinMax routing_ps;
  int hop_count = 0;
  double congestion_weight = 0.0;

  friend bool operator==(const TimingEdge&, const TimingEdge&) = default;
};

struct ClockSpec {
  double period_ps = 1000.0;
  double uncertainty_ps = 0.0;
  double source_latency_ps = 0.0;
  std::map<NodeId, double> insertion_delay_ps;

  // Registers absent from the map have zero insertion delay.
  double insertion(NodeId reg) const;
  // Capture-minus-launch insertion difference.
  double skew(NodeId launch, NodeId capture) const;

  friend bool operator==(const ClockSpec&, const ClockSpec&) = default;
};

struct FabricGrid {
  int width = 1;
  int height = 1;

  friend bool operator==(const FabricGrid&, const FabricGrid&) = default;
};

// Immutable timing graph. Construction never throws on malformed content;
// use validate() to find broken invariants. Internally nodes are addressed by
// their position in nodes(); edges by their position in edges().
class TimingGraph {
 public:
  TimingGraph() = default;
  TimingGraph(std::vector<TimingNode> nodes, std::vector<TimingEdge> edges,
              std::map<NodeId, RegisterTiming> register_timing, ClockSpec clock,
              FabricGrid fabric_grid);

  const std::vector<TimingNode>& nodes() const { return nodes_; }
  const std::vector<TimingEdge>& edges() const { return edges_; }
  const std::map<NodeId, RegisterTiming>& register_timing() const { return register_timing_; }
  const ClockSpec& clock() const { return clock_; }
  const FabricGrid& fabric_grid() const { return fabric_grid_; }

  std::size_t node_count() const { return nodes_.size(); }
  const TimingNode& node(std::size_t index) const { return nodes_[index]; }
  std::optional<std::size_t> index_of(NodeId id) const;
  std::optional<std::size_t> index_of(std::string_view name) const;

  // Edge indices; dangling edges are left out of both lists.
  std::span<const std::size_t> fanin(std::size_t node_index) const;
  std::span<const std::size_t> fanout(std::size_t node_index) const;
  std::size_t edge_src(std::size_t edge_index) const { return edge_src_[edge_index]; }
  std::size_t edge_dst(std::size_t edge_index) const { return edge_dst_[edge_index]; }
  bool edge_resolved(std::size_t edge_index) const;

  bool is_register(std::size_t node_index) const {
    return nodes_[node_index].kind == NodeKind::kRegister;
  }

  friend bool operator==(const TimingGraph& a, const TimingGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_ &&
           a.register_timing_ == b.register_timing_ && a.clock_ == b.clock_ &&
           a.fabric_grid_ == b.fabric_grid_;
  }

 private:
  static constexpr std::size_t kUnresolved = static_cast<std::size_t>(-1);

  std::vector<TimingNode> nodes_;
  std::vector<TimingEdge> edges_;
  std::map<NodeId, RegisterTiming> register_timing_;
  ClockSpec clock_;
  FabricGrid fabric_grid_;

  std::unordered_map<std::uint32_t, std::size_t> index_by_id_;
  std::unordered_map<std::string, std::size_t> index_by_name_;
  std::vector<std::size_t> edge_src_;
  std::vector<std::size_t> edge_dst_;
  // CSR adjacency.
  std::vector<std::size_t> fanin_offsets_;
  std::vector<std::size_t> fanin_edges_;
  std::vector<std::size_t> fanout_offsets_;
  std::vector<std::size_t> fanout_edges_;
};

enum class ViolationKind {
  kDuplicateId,
  kDanglingEdge,
  kUntaggedRegister,
  kPlacementOutOfGrid,
  kCombinationalCycle,
  kUnreachableCombCell,
  kDelayOrder,
  kEdgeKindMismatch,
  kCongestionRange,
  kRegisterTiming,
  kCellAttributes,
  kClockSpec,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::vector<NodeId> nodes;
  std::optional<std::size_t> edge;
  std::string detail;
};

// Empty iff every graph invariant holds.
std::vector<Violation> validate(const TimingGraph& graph);

// Node positions ordered so that every edge into a non-register node comes
// from an earlier node. Registers act as launch points; when only edges into
// registers remain unsatisfied the lowest-id register is released. Ties break
// by ascending node id. Throws Error(kCyclicGraph) on a combinational cycle.
std::vector<std::size_t> topological_indices(const TimingGraph& graph);
std::vector<NodeId> topological_order(const TimingGraph& graph);

const char* to_string(NodeKind kind);
const char* to_string(CellClass cls);
const char* to_string(VtClass vt);
const char* to_string(Stage stage);
const char* to_string(EdgeKind kind);

std::optional<NodeKind> node_kind_from_string(std::string_view text);
std::optional<CellClass> cell_class_from_string(std::string_view text);
std::optional<VtClass> vt_class_from_string(std::string_view text);
std::optional<Stage> stage_from_string(std::string_view text);
std::optional<EdgeKind> edge_kind_from_string(std::string_view text);

}  // namespace stagesta

#endif  // STAGESTA_TIMING_GRAPH_HPP
