#include "stagesta/sta_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "stagesta/error.hpp"
#include "stagesta/pipeline_gen.hpp"

namespace stagesta {

const char* to_string(Transition t) {
  switch (t) {
    case Transition::kIfId: return "IF->ID";
    case Transition::kIdEx: return "ID->EX";
    case Transition::kExMem: return "EX->MEM";
    case Transition::kMemWb: return "MEM->WB";
    case Transition::kWbRf: return "WB->RF";
  }
  return "";
}

const char* to_string(PathClass c) {
  switch (c) {
    case PathClass::kRegToAlu: return "RegToAlu";
    case PathClass::kAluToMem: return "AluToMem";
    case PathClass::kRegfileAccess: return "RegfileAccess";
    case PathClass::kBypassHazard: return "BypassHazard";
    case PathClass::kControlProp: return "ControlProp";
  }
  return "";
}

std::optional<Transition> transition_from_string(std::string_view text) {
  for (Transition t : kAllTransitions) {
    if (text == to_string(t)) return t;
  }
  return std::nullopt;
}

std::optional<PathClass> path_class_from_string(std::string_view text) {
  for (PathClass c : {PathClass::kRegToAlu, PathClass::kAluToMem, PathClass::kRegfileAccess,
                      PathClass::kBypassHazard, PathClass::kControlProp}) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

Transition transition_for(Stage launch, Stage capture) {
  if (launch == Stage::kNone || capture == Stage::kNone) {
    throw Error(ErrorKind::kUnclassifiable, "path endpoint without a stage tag");
  }
  if (launch == Stage::kWB && capture == Stage::kID) return Transition::kWbRf;
  switch (capture) {
    case Stage::kIF:
    case Stage::kID: return Transition::kIfId;
    case Stage::kEX: return Transition::kIdEx;
    case Stage::kMEM: return Transition::kExMem;
    case Stage::kWB: return Transition::kMemWb;
    case Stage::kNone: break;
  }
  throw Error(ErrorKind::kUnclassifiable, "path endpoint without a stage tag");
}

double DelayDecomposition::logic_fraction() const {
  const double t = total_ps();
  return t > 0 ? logic_ps / t : 0.0;
}

double DelayDecomposition::routing_fraction() const {
  const double t = total_ps();
  return t > 0 ? routing_ps / t : 0.0;
}

double DelayDecomposition::clocking_fraction() const {
  const double t = total_ps();
  return t > 0 ? clocking_ps / t : 0.0;
}

std::vector<NodeId> TimingPath::node_sequence(const TimingGraph& graph) const {
  std::vector<NodeId> seq;
  if (edges.empty()) return seq;
  seq.reserve(edges.size() + 1);
  seq.push_back(graph.node(graph.edge_src(edges.front())).id);
  for (std::size_t e : edges) seq.push_back(graph.node(graph.edge_dst(e)).id);
  return seq;
}

Arrivals compute_arrivals(const RealizedDesign& design, const LaunchFilter& launch) {
  const TimingGraph& g = design.graph();
  const auto order = topological_indices(g);
  const std::size_t n = g.node_count();
  const auto& edges = design.edges();
  Arrivals out;
  out.launch.assign(n, {});
  out.capture.assign(n, {});

  auto gather = [&](std::size_t v) {
    ArrivalWindow w;
    for (std::size_t e : g.fanin(v)) {
      const ArrivalWindow& src = out.launch[g.edge_src(e)];
      if (!src.reached()) continue;
      const TimingEdge& edge = edges[e];
      w.max = std::max(w.max, src.max + edge.logic_ps.max + edge.routing_ps.max);
      w.min = std::min(w.min, src.min + edge.logic_ps.min + edge.routing_ps.min);
    }
    return w;
  };

  for (std::size_t v : order) {
    const TimingNode& node = g.node(v);
    const bool allowed = !launch || launch(node);
    if (node.kind == NodeKind::kRegister) {
      if (!allowed) continue;
      const RegisterTiming t = design.timing_of(node.id);
      const double ins = design.clock().insertion(node.id);
      out.launch[v] = {ins + t.clk_to_q_late_ps, ins + t.clk_to_q_early_ps};
    } else if (node.kind == NodeKind::kPort && g.fanin(v).empty()) {
      if (allowed) out.launch[v] = {0.0, 0.0};
    } else {
      out.launch[v] = gather(v);
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    const TimingNode& node = g.node(v);
    if (node.kind == NodeKind::kRegister) {
      out.capture[v] = gather(v);
    } else if (node.kind == NodeKind::kPort && !g.fanin(v).empty()) {
      out.capture[v] = out.launch[v];
    }
  }
  return out;
}

namespace {

struct Endpoints {
  const TimingNode* launch;
  const TimingNode* capture;
};

Endpoints endpoints(const TimingPath& path, const RealizedDesign& design) {
  const TimingGraph& g = design.graph();
  auto l = g.index_of(path.launch);
  auto c = g.index_of(path.capture);
  if (!l || !g.is_register(*l)) {
    throw Error(ErrorKind::kUnknownRegister, "launch " + std::to_string(path.launch.value));
  }
  if (!c || !g.is_register(*c)) {
    throw Error(ErrorKind::kUnknownRegister, "capture " + std::to_string(path.capture.value));
  }
  return {&g.node(*l), &g.node(*c)};
}

}  // namespace

double setup_slack(const TimingPath& path, const RealizedDesign& design, const ClockSpec& clock) {
  endpoints(path, design);
  double data = design.timing_of(path.launch).clk_to_q_late_ps;
  for (std::size_t e : path.edges) {
    data += design.edge(e).logic_ps.max + design.edge(e).routing_ps.max;
  }
  const double required = clock.period_ps + clock.insertion(path.capture) -
                          clock.insertion(path.launch) - clock.uncertainty_ps;
  return required - (data + design.timing_of(path.capture).setup_ps);
}

double setup_slack(const TimingPath& path, const RealizedDesign& design) {
  return setup_slack(path, design, design.clock());
}

double hold_slack(const TimingPath& path, const RealizedDesign& design, const ClockSpec& clock) {
  endpoints(path, design);
  double data = design.timing_of(path.launch).clk_to_q_early_ps;
  for (std::size_t e : path.edges) {
    data += design.edge(e).logic_ps.min + design.edge(e).routing_ps.min;
  }
  return data - design.timing_of(path.capture).hold_ps -
         (clock.insertion(path.capture) - clock.insertion(path.launch)) - clock.uncertainty_ps;
}

double hold_slack(const TimingPath& path, const RealizedDesign& design) {
  return hold_slack(path, design, design.clock());
}

DelayDecomposition decompose(const TimingPath& path, const RealizedDesign& design) {
  DelayDecomposition d;
  for (std::size_t e : path.edges) {
    d.logic_ps += design.edge(e).logic_ps.max;
    d.routing_ps += design.edge(e).routing_ps.max;
  }
  d.logic_ps += design.timing_of(path.launch).clk_to_q_late_ps;
  const ClockSpec& clock = design.clock();
  d.clocking_ps = clock.uncertainty_ps + std::abs(clock.skew(path.launch, path.capture)) +
                  design.timing_of(path.capture).setup_ps;
  return d;
}

std::pair<Transition, PathClass> classify(const TimingPath& path, const TimingGraph& graph) {
  auto l = graph.index_of(path.launch);
  auto c = graph.index_of(path.capture);
  if (!l || !c) throw Error(ErrorKind::kUnclassifiable, "path endpoints not in graph");
  const Stage ls = graph.node(*l).stage_tag;
  const Stage cs = graph.node(*c).stage_tag;
  const Transition t = transition_for(ls, cs);

  bool macro = false, hazard = false, alu = false, ex_logic = false, control = false;
  for (std::size_t e : path.edges) {
    for (std::size_t v : {graph.edge_src(e), graph.edge_dst(e)}) {
      const TimingNode& node = graph.node(v);
      if (node.kind != NodeKind::kCombCell) continue;
      const std::string_view unit = unit_of(node.name);
      macro |= node.cell_class == CellClass::kMemMacro;
      hazard |= unit == "hazard";
      alu |= unit == "alu";
      control |= unit == "ctrl";
      ex_logic |= node.stage_tag == Stage::kEX && unit != "ctrl";
    }
  }
  PathClass cls = PathClass::kRegToAlu;
  if (macro) {
    cls = PathClass::kRegfileAccess;
  } else if (hazard || (cs == Stage::kEX && (ls == Stage::kMEM || ls == Stage::kWB))) {
    cls = PathClass::kBypassHazard;
  } else if (cs == Stage::kMEM && (alu || ex_logic)) {
    cls = PathClass::kAluToMem;
  } else if (control) {
    cls = PathClass::kControlProp;
  }
  return {t, cls};
}

TimingPath make_path(const RealizedDesign& design, std::vector<std::size_t> edges) {
  const TimingGraph& g = design.graph();
  TimingPath p;
  p.edges = std::move(edges);
  if (p.edges.empty()) throw Error(ErrorKind::kUnknownRegister, "empty path");
  p.launch = g.node(g.edge_src(p.edges.front())).id;
  p.capture = g.node(g.edge_dst(p.edges.back())).id;
  const RegisterTiming lt = design.timing_of(p.launch);
  p.data_delay_max_ps = lt.clk_to_q_late_ps;
  p.data_delay_min_ps = lt.clk_to_q_early_ps;
  int nets = 0;
  double congestion = 0.0;
  for (std::size_t e : p.edges) {
    const TimingEdge& edge = design.edge(e);
    p.data_delay_max_ps += edge.logic_ps.max + edge.routing_ps.max;
    p.data_delay_min_ps += edge.logic_ps.min + edge.routing_ps.min;
    if (edge.kind == EdgeKind::kCellArc) {
      ++p.logic_levels;
    } else {
      ++nets;
      congestion += edge.congestion_weight;
    }
    p.hop_count += edge.hop_count;
  }
  p.congestion_mean = nets > 0 ? congestion / nets : 0.0;
  p.setup_slack_ps = setup_slack(p, design);
  p.hold_slack_ps = hold_slack(p, design);
  p.decomposition = decompose(p, design);
  std::tie(p.transition, p.path_class) = classify(p, g);
  return p;
}

namespace {

struct Partial {
  std::size_t node;
  std::size_t edge;
  std::size_t parent;
  double suffix;
  double required;
};

constexpr std::size_t kRoot = static_cast<std::size_t>(-1);

void sort_paths(std::vector<TimingPath>& paths, const TimingGraph& g) {
  std::vector<std::pair<std::vector<NodeId>, std::size_t>> keys;
  keys.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) keys.emplace_back(paths[i].node_sequence(g), i);
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    const double sa = paths[a.second].setup_slack_ps;
    const double sb = paths[b.second].setup_slack_ps;
    if (sa != sb) return sa < sb;
    return a.first < b.first;
  });
  std::vector<TimingPath> sorted;
  sorted.reserve(paths.size());
  for (auto& [seq, i] : keys) sorted.push_back(std::move(paths[i]));
  paths = std::move(sorted);
}

}  // namespace

std::vector<TimingPath> extract_paths(const RealizedDesign& design, std::size_t k,
                                      const PathQuery& query) {
  const TimingGraph& g = design.graph();
  k = std::min(k, kMaxPathsPerDesign);
  if (k == 0) return {};
  const LaunchFilter launch = [&](const TimingNode& n) {
    return n.kind == NodeKind::kRegister && (!query.launch || query.launch(n));
  };
  const Arrivals arrivals = compute_arrivals(design, launch);
  const ClockSpec& clock = design.clock();
  const auto& edges = design.edges();
  auto delay = [&](std::size_t e) { return edges[e].logic_ps.max + edges[e].routing_ps.max; };

  std::vector<Partial> arena;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  auto push = [&](std::size_t node, std::size_t edge, std::size_t parent, double suffix,
                  double required) {
    const double key = required - (arrivals.launch[node].max + suffix);
    arena.push_back({node, edge, parent, suffix, required});
    queue.push({key, arena.size() - 1});
  };

  for (std::size_t c = 0; c < g.node_count(); ++c) {
    const TimingNode& node = g.node(c);
    if (node.kind != NodeKind::kRegister) continue;
    if (query.capture && !query.capture(node)) continue;
    const double required = clock.period_ps + clock.insertion(node.id) - clock.uncertainty_ps -
                            design.timing_of(node.id).setup_ps;
    for (std::size_t e : g.fanin(c)) {
      const std::size_t u = g.edge_src(e);
      if (arrivals.launch[u].reached()) push(u, e, kRoot, delay(e), required);
    }
  }

  std::vector<TimingPath> found;
  std::priority_queue<double> kept;  // k smallest canonical slacks
  while (!queue.empty()) {
    const auto [key, idx] = queue.top();
    if (kept.size() >= k && key > kept.top() + kTimeEpsilonPs) break;
    queue.pop();
    const Partial item = arena[idx];
    if (g.is_register(item.node)) {
      std::vector<std::size_t> chain;
      for (std::size_t i = idx; i != kRoot; i = arena[i].parent) chain.push_back(arena[i].edge);
      TimingPath path = make_path(design, std::move(chain));
      kept.push(path.setup_slack_ps);
      if (kept.size() > k) kept.pop();
      found.push_back(std::move(path));
      continue;
    }
    for (std::size_t e : g.fanin(item.node)) {
      const std::size_t w = g.edge_src(e);
      if (!arrivals.launch[w].reached()) continue;
      push(w, e, idx, item.suffix + delay(e), item.required);
    }
  }
  sort_paths(found, g);
  if (found.size() > k) found.resize(k);
  return found;
}

namespace {

constexpr Stage kStages[] = {Stage::kIF, Stage::kID, Stage::kEX, Stage::kMEM, Stage::kWB};

// Launch stages feeding `capture` under `transition`; empty when none do.
std::vector<Stage> launch_stages(Transition transition, Stage capture) {
  std::vector<Stage> out;
  for (Stage l : kStages) {
    if (transition_for(l, capture) == transition) out.push_back(l);
  }
  return out;
}

bool contains(const std::vector<Stage>& stages, Stage s) {
  return std::find(stages.begin(), stages.end(), s) != stages.end();
}

}  // namespace

std::vector<TimingPath> extract_transition_paths(const RealizedDesign& design,
                                                 Transition transition, std::size_t k) {
  std::vector<TimingPath> merged;
  for (Stage capture : kStages) {
    std::vector<Stage> launches = launch_stages(transition, capture);
    if (launches.empty()) continue;
    PathQuery query;
    query.launch = [launches](const TimingNode& n) { return contains(launches, n.stage_tag); };
    query.capture = [capture](const TimingNode& n) { return n.stage_tag == capture; };
    auto part = extract_paths(design, k, query);
    std::move(part.begin(), part.end(), std::back_inserter(merged));
  }
  sort_paths(merged, design.graph());
  if (merged.size() > k) merged.resize(k);
  return merged;
}

std::vector<TimingPath> extract_pair_paths(const RealizedDesign& design, Transition transition,
                                           std::size_t k) {
  const TimingGraph& g = design.graph();
  k = std::min(k, kMaxPathsPerDesign);
  if (k == 0) return {};
  const auto order = topological_indices(g);
  const auto& edges = design.edges();
  const ClockSpec& clock = design.clock();
  const double none = -std::numeric_limits<double>::infinity();
  auto delay = [&](std::size_t e) { return edges[e].logic_ps.max + edges[e].routing_ps.max; };

  struct Candidate {
    double slack;
    std::size_t launch;
    std::size_t capture;
  };
  std::vector<Candidate> candidates;
  std::vector<double> through(g.node_count());
  // Longest delay from the output of node w to the data pin of capture c.
  auto term = [&](std::size_t w, std::size_t c) {
    if (w == c) return 0.0;
    return g.is_register(w) ? none : through[w];
  };
  auto best_fanout = [&](std::size_t v, std::size_t c) {
    double best = none;
    std::size_t pick = kRoot;
    for (std::size_t e : g.fanout(v)) {
      const double t = term(g.edge_dst(e), c);
      if (t == none) continue;
      const double d = delay(e) + t;
      if (pick == kRoot || d > best ||
          (d == best && g.node(g.edge_dst(e)).id < g.node(g.edge_dst(pick)).id)) {
        best = d;
        pick = e;
      }
    }
    return std::pair{best, pick};
  };

  for (std::size_t c = 0; c < g.node_count(); ++c) {
    if (!g.is_register(c)) continue;
    const TimingNode& cap = g.node(c);
    const std::vector<Stage> launches = launch_stages(transition, cap.stage_tag);
    if (launches.empty()) continue;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (!g.is_register(*it)) through[*it] = best_fanout(*it, c).first;
    }
    const double required = clock.period_ps + clock.insertion(cap.id) - clock.uncertainty_ps -
                            design.timing_of(cap.id).setup_ps;
    for (std::size_t l = 0; l < g.node_count(); ++l) {
      if (!g.is_register(l) || !contains(launches, g.node(l).stage_tag)) continue;
      const double d = best_fanout(l, c).first;
      if (d == none) continue;
      const NodeId id = g.node(l).id;
      const double arrival = clock.insertion(id) + design.timing_of(id).clk_to_q_late_ps + d;
      candidates.push_back({required - arrival, l, c});
    }
  }
  if (candidates.empty()) return {};
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.slack < b.slack; });
  const double cutoff = candidates[std::min(k, candidates.size()) - 1].slack + kTimeEpsilonPs;

  std::vector<TimingPath> found;
  std::size_t current = kRoot;
  for (const Candidate& cand : candidates) {
    if (cand.slack > cutoff) break;
    if (cand.capture != current) {
      current = cand.capture;
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (!g.is_register(*it)) through[*it] = best_fanout(*it, current).first;
      }
    }
    std::vector<std::size_t> chain;
    for (std::size_t v = cand.launch;;) {
      const std::size_t e = best_fanout(v, cand.capture).second;
      chain.push_back(e);
      v = g.edge_dst(e);
      if (v == cand.capture) break;
    }
    found.push_back(make_path(design, std::move(chain)));
  }
  sort_paths(found, g);
  if (found.size() > k) found.resize(k);
  return found;
}

double consumption_ps(const TimingPath& path, const RealizedDesign& design) {
  return design.clock().period_ps - setup_slack(path, design);
}

double fmax(const RealizedDesign& design) {
  const auto worst = extract_paths(design, 1);
  if (worst.empty()) return 0.0;
  return 1e6 / consumption_ps(worst.front(), design);
}

}  // namespace stagesta
