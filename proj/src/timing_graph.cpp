#include "stagesta/timing_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <utility>

#include "stagesta/error.hpp"

namespace stagesta {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kInvalidModel: return "InvalidModel";
    case ErrorKind::kInvalidCorner: return "InvalidCorner";
    case ErrorKind::kCyclicGraph: return "CyclicGraph";
    case ErrorKind::kUnknownRegister: return "UnknownRegister";
    case ErrorKind::kUnclassifiable: return "Unclassifiable";
    case ErrorKind::kInsufficientSamples: return "InsufficientSamples";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kIoFailure: return "IoFailure";
  }
  return "Error";
}

double ClockSpec::insertion(NodeId reg) const {
  auto it = insertion_delay_ps.find(reg);
  return it == insertion_delay_ps.end() ? 0.0 : it->second;
}

double ClockSpec::skew(NodeId launch, NodeId capture) const {
  if (launch == capture) return 0.0;
  return insertion(capture) - insertion(launch);
}

TimingGraph::TimingGraph(std::vector<TimingNode> nodes, std::vector<TimingEdge> edges,
                         std::map<NodeId, RegisterTiming> register_timing, ClockSpec clock,
                         FabricGrid fabric_grid)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      register_timing_(std::move(register_timing)),
      clock_(std::move(clock)),
      fabric_grid_(fabric_grid) {
  index_by_id_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    index_by_id_.try_emplace(nodes_[i].id.value, i);
    index_by_name_.try_emplace(nodes_[i].name, i);
  }

  const std::size_t n = nodes_.size();
  edge_src_.assign(edges_.size(), kUnresolved);
  edge_dst_.assign(edges_.size(), kUnresolved);
  std::vector<std::size_t> in_count(n, 0);
  std::vector<std::size_t> out_count(n, 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto s = index_of(edges_[e].src);
    auto d = index_of(edges_[e].dst);
    if (!s || !d) continue;
    edge_src_[e] = *s;
    edge_dst_[e] = *d;
    ++out_count[*s];
    ++in_count[*d];
  }

  fanin_offsets_.assign(n + 1, 0);
  fanout_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    fanin_offsets_[i + 1] = fanin_offsets_[i] + in_count[i];
    fanout_offsets_[i + 1] = fanout_offsets_[i] + out_count[i];
  }
  fanin_edges_.resize(fanin_offsets_[n]);
  fanout_edges_.resize(fanout_offsets_[n]);
  std::vector<std::size_t> in_fill(fanin_offsets_.begin(), fanin_offsets_.end() - 1);
  std::vector<std::size_t> out_fill(fanout_offsets_.begin(), fanout_offsets_.end() - 1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (!edge_resolved(e)) continue;
    fanout_edges_[out_fill[edge_src_[e]]++] = e;
    fanin_edges_[in_fill[edge_dst_[e]]++] = e;
  }
}

std::optional<std::size_t> TimingGraph::index_of(NodeId id) const {
  auto it = index_by_id_.find(id.value);
  if (it == index_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> TimingGraph::index_of(std::string_view name) const {
  auto it = index_by_name_.find(std::string(name));
  if (it == index_by_name_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> TimingGraph::fanin(std::size_t node_index) const {
  return {fanin_edges_.data() + fanin_offsets_[node_index],
          fanin_offsets_[node_index + 1] - fanin_offsets_[node_index]};
}

std::span<const std::size_t> TimingGraph::fanout(std::size_t node_index) const {
  return {fanout_edges_.data() + fanout_offsets_[node_index],
          fanout_offsets_[node_index + 1] - fanout_offsets_[node_index]};
}

bool TimingGraph::edge_resolved(std::size_t edge_index) const {
  return edge_src_[edge_index] != kUnresolved && edge_dst_[edge_index] != kUnresolved;
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kDuplicateId: return "DuplicateId";
    case ViolationKind::kDanglingEdge: return "DanglingEdge";
    case ViolationKind::kUntaggedRegister: return "UntaggedRegister";
    case ViolationKind::kPlacementOutOfGrid: return "PlacementOutOfGrid";
    case ViolationKind::kCombinationalCycle: return "CombinationalCycle";
    case ViolationKind::kUnreachableCombCell: return "UnreachableCombCell";
    case ViolationKind::kDelayOrder: return "DelayOrder";
    case ViolationKind::kEdgeKindMismatch: return "EdgeKindMismatch";
    case ViolationKind::kCongestionRange: return "CongestionRange";
    case ViolationKind::kRegisterTiming: return "RegisterTiming";
    case ViolationKind::kCellAttributes: return "CellAttributes";
    case ViolationKind::kClockSpec: return "ClockSpec";
  }
  return "Violation";
}

namespace {

bool valid_pair(const MinMax& p) {
  return std::isfinite(p.min) && std::isfinite(p.max) && p.min >= 0.0 && p.min <= p.max;
}

bool is_endpoint(const TimingNode& node) {
  return node.kind == NodeKind::kRegister || node.kind == NodeKind::kPort;
}

// Tarjan over the CombCell-only subgraph; returns nontrivial components.
std::vector<std::vector<std::size_t>> comb_cycles(const TimingGraph& graph) {
  const std::size_t n = graph.node_count();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kNone), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> result;
  std::size_t counter = 0;

  auto comb = [&](std::size_t v) { return graph.node(v).kind == NodeKind::kCombCell; };

  struct Frame {
    std::size_t node;
    std::size_t next_edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (!comb(root) || index[root] != kNone) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      auto out = graph.fanout(f.node);
      if (f.next_edge < out.size()) {
        std::size_t w = graph.edge_dst(out[f.next_edge++]);
        if (!comb(w)) continue;
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      std::size_t v = f.node;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().node] = std::min(low[frames.back().node], low[v]);
      if (low[v] != index[v]) continue;
      std::vector<std::size_t> component;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component.push_back(w);
      } while (w != v);
      bool self_loop = false;
      for (std::size_t e : graph.fanout(v)) self_loop |= graph.edge_dst(e) == v;
      if (component.size() > 1 || self_loop) result.push_back(std::move(component));
    }
  }
  return result;
}

std::vector<bool> reach(const TimingGraph& graph, bool forward) {
  const std::size_t n = graph.node_count();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> work;
  for (std::size_t v = 0; v < n; ++v) {
    if (is_endpoint(graph.node(v))) work.push_back(v);
  }
  while (!work.empty()) {
    std::size_t v = work.back();
    work.pop_back();
    auto edges = forward ? graph.fanout(v) : graph.fanin(v);
    for (std::size_t e : edges) {
      std::size_t w = forward ? graph.edge_dst(e) : graph.edge_src(e);
      if (graph.node(w).kind != NodeKind::kCombCell || seen[w]) continue;
      seen[w] = true;
      work.push_back(w);
    }
  }
  return seen;
}

}  // namespace

std::vector<Violation> validate(const TimingGraph& graph) {
  std::vector<Violation> out;
  const auto& nodes = graph.nodes();
  const FabricGrid grid = graph.fabric_grid();

  std::map<std::uint32_t, std::size_t> id_count;
  for (const auto& node : nodes) ++id_count[node.id.value];
  for (const auto& [id, count] : id_count) {
    if (count > 1) {
      out.push_back({ViolationKind::kDuplicateId, {NodeId{id}}, std::nullopt,
                     "id appears " + std::to_string(count) + " times"});
    }
  }

  for (const auto& node : nodes) {
    if (node.kind == NodeKind::kRegister && node.stage_tag == Stage::kNone) {
      out.push_back({ViolationKind::kUntaggedRegister, {node.id}, std::nullopt, node.name});
    }
    const auto& p = node.placement;
    if (p.x < 0 || p.y < 0 || p.x >= grid.width || p.y >= grid.height) {
      out.push_back({ViolationKind::kPlacementOutOfGrid, {node.id}, std::nullopt, node.name});
    }
    const bool comb = node.kind == NodeKind::kCombCell;
    if (comb != node.cell_class.has_value()) {
      out.push_back({ViolationKind::kCellAttributes, {node.id}, std::nullopt,
                     "cell_class must be present exactly on CombCell nodes"});
    }
    if ((node.drive_strength || node.vt_class) &&
        (!comb || node.cell_class == CellClass::kMemMacro)) {
      out.push_back({ViolationKind::kCellAttributes, {node.id}, std::nullopt,
                     "drive_strength/vt_class only apply to logic cells"});
    }
    if (node.drive_strength && *node.drive_strength <= 0) {
      out.push_back({ViolationKind::kCellAttributes, {node.id}, std::nullopt,
                     "drive_strength must be positive"});
    }
  }

  for (std::size_t e = 0; e < graph.edges().size(); ++e) {
    const auto& edge = graph.edges()[e];
    if (!graph.edge_resolved(e)) {
      out.push_back({ViolationKind::kDanglingEdge, {edge.src, edge.dst}, e,
                     "edge references a missing node"});
      continue;
    }
    if (!valid_pair(edge.logic_ps) || !valid_pair(edge.routing_ps)) {
      out.push_back({ViolationKind::kDelayOrder, {edge.src, edge.dst}, e,
                     "delays must be finite, nonnegative and min <= max"});
    }
    const MinMax zero{};
    if (edge.kind == EdgeKind::kCellArc && !(edge.routing_ps == zero)) {
      out.push_back({ViolationKind::kEdgeKindMismatch, {edge.src, edge.dst}, e,
                     "CellArc carries routing delay"});
    }
    if (edge.kind == EdgeKind::kNet && !(edge.logic_ps == zero)) {
      out.push_back({ViolationKind::kEdgeKindMismatch, {edge.src, edge.dst}, e,
                     "Net carries logic delay"});
    }
    if (edge.hop_count < 0 || !(edge.congestion_weight >= 0.0 && edge.congestion_weight <= 10.0)) {
      out.push_back({ViolationKind::kCongestionRange, {edge.src, edge.dst}, e,
                     "hop_count < 0 or congestion_weight outside [0, 10]"});
    }
  }

  for (auto& component : comb_cycles(graph)) {
    std::vector<NodeId> ids;
    for (std::size_t v : component) ids.push_back(graph.node(v).id);
    std::sort(ids.begin(), ids.end());
    out.push_back({ViolationKind::kCombinationalCycle, std::move(ids), std::nullopt,
                   "combinational cycle"});
  }

  const auto fwd = reach(graph, true);
  const auto bwd = reach(graph, false);
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].kind == NodeKind::kCombCell && !(fwd[v] && bwd[v])) {
      out.push_back({ViolationKind::kUnreachableCombCell, {nodes[v].id}, std::nullopt,
                     nodes[v].name});
    }
  }

  for (const auto& [id, t] : graph.register_timing()) {
    auto idx = graph.index_of(id);
    if (!idx || !graph.is_register(*idx)) {
      out.push_back({ViolationKind::kRegisterTiming, {id}, std::nullopt,
                     "timing attached to a non-register"});
      continue;
    }
    const bool ok = t.clk_to_q_early_ps >= 0 && t.clk_to_q_late_ps >= 0 && t.setup_ps >= 0 &&
                    t.hold_ps >= 0 && t.clk_to_q_early_ps <= t.clk_to_q_late_ps;
    if (!ok) {
      out.push_back({ViolationKind::kRegisterTiming, {id}, std::nullopt,
                     "negative value or early clk-to-q above late"});
    }
  }

  const ClockSpec& clock = graph.clock();
  if (!(clock.period_ps > 0) || !(clock.uncertainty_ps >= 0) || !(clock.source_latency_ps >= 0)) {
    out.push_back({ViolationKind::kClockSpec, {}, std::nullopt,
                   "period must be positive, uncertainty and latency nonnegative"});
  }
  for (const auto& [id, ins] : clock.insertion_delay_ps) {
    auto idx = graph.index_of(id);
    if (!(ins >= 0) || !idx || !graph.is_register(*idx)) {
      out.push_back({ViolationKind::kClockSpec, {id}, std::nullopt,
                     "insertion delay must be nonnegative and name a register"});
    }
  }
  return out;
}

std::vector<std::size_t> topological_indices(const TimingGraph& graph) {
  const std::size_t n = graph.node_count();
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t v = 0; v < n; ++v) indegree[v] = graph.fanin(v).size();

  using Key = std::pair<std::uint32_t, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  std::vector<bool> placed(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push({graph.node(v).id.value, v});
  }

  std::vector<std::size_t> order;
  order.reserve(n);
  while (order.size() < n) {
    if (ready.empty()) {
      std::optional<Key> release;
      for (std::size_t v = 0; v < n; ++v) {
        if (placed[v] || !graph.is_register(v)) continue;
        Key k{graph.node(v).id.value, v};
        if (!release || k < *release) release = k;
      }
      if (!release) {
        std::string names;
        for (std::size_t v = 0; v < n; ++v) {
          if (!placed[v]) names += (names.empty() ? "" : ", ") + graph.node(v).name;
        }
        throw Error(ErrorKind::kCyclicGraph, "combinational cycle among {" + names + "}");
      }
      indegree[release->second] = 0;
      ready.push(*release);
    }
    auto [id, v] = ready.top();
    ready.pop();
    if (placed[v]) continue;
    placed[v] = true;
    order.push_back(v);
    for (std::size_t e : graph.fanout(v)) {
      std::size_t w = graph.edge_dst(e);
      if (placed[w] || indegree[w] == 0) continue;
      if (--indegree[w] == 0) ready.push({graph.node(w).id.value, w});
    }
  }
  return order;
}

std::vector<NodeId> topological_order(const TimingGraph& graph) {
  std::vector<NodeId> ids;
  for (std::size_t v : topological_indices(graph)) ids.push_back(graph.node(v).id);
  return ids;
}

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kRegister: return "Register";
    case NodeKind::kCombCell: return "CombCell";
    case NodeKind::kClockSource: return "ClockSource";
    case NodeKind::kPort: return "Port";
  }
  return "";
}

const char* to_string(CellClass cls) {
  switch (cls) {
    case CellClass::kLut: return "Lut";
    case CellClass::kCarryChain: return "CarryChain";
    case CellClass::kMux: return "Mux";
    case CellClass::kStdCell: return "StdCell";
    case CellClass::kMemMacro: return "MemMacro";
  }
  return "";
}

const char* to_string(VtClass vt) {
  switch (vt) {
    case VtClass::kLvt: return "LVT";
    case VtClass::kSvt: return "SVT";
    case VtClass::kHvt: return "HVT";
  }
  return "";
}

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::kIF: return "IF";
    case Stage::kID: return "ID";
    case Stage::kEX: return "EX";
    case Stage::kMEM: return "MEM";
    case Stage::kWB: return "WB";
    case Stage::kNone: return "None";
  }
  return "";
}

const char* to_string(EdgeKind kind) {
  return kind == EdgeKind::kCellArc ? "CellArc" : "Net";
}

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view text, const Enum (&values)[N]) {
  for (Enum v : values) {
    if (text == to_string(v)) return v;
  }
  return std::nullopt;
}

}  // namespace

std::optional<NodeKind> node_kind_from_string(std::string_view text) {
  static constexpr NodeKind kAll[] = {NodeKind::kRegister, NodeKind::kCombCell,
                                      NodeKind::kClockSource, NodeKind::kPort};
  return lookup(text, kAll);
}

std::optional<CellClass> cell_class_from_string(std::string_view text) {
  static constexpr CellClass kAll[] = {CellClass::kLut, CellClass::kCarryChain, CellClass::kMux,
                                       CellClass::kStdCell, CellClass::kMemMacro};
  return lookup(text, kAll);
}

std::optional<VtClass> vt_class_from_string(std::string_view text) {
  static constexpr VtClass kAll[] = {VtClass::kLvt, VtClass::kSvt, VtClass::kHvt};
  return lookup(text, kAll);
}

std::optional<Stage> stage_from_string(std::string_view text) {
  static constexpr Stage kAll[] = {Stage::kIF, Stage::kID, Stage::kEX,
                                   Stage::kMEM, Stage::kWB, Stage::kNone};
  return lookup(text, kAll);
}

std::optional<EdgeKind> edge_kind_from_string(std::string_view text) {
  static constexpr EdgeKind kAll[] = {EdgeKind::kCellArc, EdgeKind::kNet};
  return lookup(text, kAll);
}

}  // namespace stagesta
