#ifndef STAGESTA_TEST_SUPPORT_HPP
#define STAGESTA_TEST_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "stagesta/fabric_models.hpp"
#include "stagesta/random.hpp"
#include "stagesta/sta_engine.hpp"
#include "stagesta/timing_graph.hpp"

namespace stagesta::testkit {

// Random register-bounded DAG with up to max_comb combinational nodes and
// random min/max delays, register timing, insertion delays and uncertainty.
// Every comb node has a fanin and a fanout, so the graph validates.
inline TimingGraph random_dag(std::uint64_t seed, int max_comb = 12) {
  CounterRng rng(stream_key(seed, "test.dag", 0));
  auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
  };
  const int n_reg = pick(2, 5);
  const int n_comb = pick(1, max_comb);
  const Stage stages[] = {Stage::kIF, Stage::kID, Stage::kEX, Stage::kMEM, Stage::kWB};

  std::vector<TimingNode> nodes;
  std::uint32_t next_id = 1;
  for (int r = 0; r < n_reg; ++r) {
    TimingNode n;
    n.id = NodeId{next_id++};
    n.name = "r" + std::to_string(r);
    n.kind = NodeKind::kRegister;
    n.stage_tag = stages[pick(0, 4)];
    nodes.push_back(n);
  }
  for (int c = 0; c < n_comb; ++c) {
    TimingNode n;
    n.id = NodeId{next_id++};
    n.name = "c" + std::to_string(c);
    n.kind = NodeKind::kCombCell;
    n.cell_class = CellClass::kStdCell;
    n.stage_tag = stages[pick(0, 4)];
    nodes.push_back(n);
  }
  // Node ids are shuffled so id order differs from topological order.
  for (std::size_t i = nodes.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(nodes[i - 1].id, nodes[j].id);
  }
  auto reg = [&](int r) { return nodes[static_cast<std::size_t>(r)].id; };
  auto comb = [&](int c) { return nodes[static_cast<std::size_t>(n_reg + c)].id; };

  std::vector<TimingEdge> edges;
  auto add = [&](NodeId src, NodeId dst, EdgeKind kind) {
    TimingEdge e;
    e.src = src;
    e.dst = dst;
    e.kind = kind;
    const double hi = rng.uniform(0.0, 100.0);
    const MinMax d{hi * rng.uniform(), hi};
    (kind == EdgeKind::kCellArc ? e.logic_ps : e.routing_ps) = d;
    edges.push_back(e);
  };
  const double p = rng.uniform(0.15, 0.5);
  std::vector<int> fanin(static_cast<std::size_t>(n_comb), 0);
  std::vector<int> fanout(static_cast<std::size_t>(n_comb), 0);
  for (int c = 0; c < n_comb; ++c) {
    for (int r = 0; r < n_reg; ++r) {
      if (rng.uniform() < p) {
        add(reg(r), comb(c), EdgeKind::kNet);
        ++fanin[static_cast<std::size_t>(c)];
      }
    }
    for (int b = 0; b < c; ++b) {
      if (rng.uniform() < p) {
        add(comb(b), comb(c), rng.uniform() < 0.5 ? EdgeKind::kCellArc : EdgeKind::kNet);
        ++fanin[static_cast<std::size_t>(c)];
        ++fanout[static_cast<std::size_t>(b)];
      }
    }
    if (fanin[static_cast<std::size_t>(c)] == 0) {
      add(reg(pick(0, n_reg - 1)), comb(c), EdgeKind::kNet);
    }
  }
  for (int c = 0; c < n_comb; ++c) {
    for (int r = 0; r < n_reg; ++r) {
      if (rng.uniform() < p) {
        add(comb(c), reg(r), EdgeKind::kNet);
        ++fanout[static_cast<std::size_t>(c)];
      }
    }
    if (fanout[static_cast<std::size_t>(c)] == 0) {
      add(comb(c), reg(pick(0, n_reg - 1)), EdgeKind::kNet);
    }
  }
  if (rng.uniform() < 0.3) add(reg(0), reg(n_reg - 1), EdgeKind::kNet);

  std::map<NodeId, RegisterTiming> timing;
  ClockSpec clock;
  clock.period_ps = rng.uniform(200.0, 2000.0);
  clock.uncertainty_ps = rng.uniform(0.0, 30.0);
  for (int r = 0; r < n_reg; ++r) {
    RegisterTiming t;
    t.clk_to_q_late_ps = rng.uniform(10.0, 60.0);
    t.clk_to_q_early_ps = t.clk_to_q_late_ps * rng.uniform();
    t.setup_ps = rng.uniform(0.0, 40.0);
    t.hold_ps = rng.uniform(0.0, 30.0);
    timing[reg(r)] = t;
    clock.insertion_delay_ps[reg(r)] = rng.uniform(0.0, 50.0);
  }
  return TimingGraph(std::move(nodes), std::move(edges), std::move(timing), std::move(clock),
                     FabricGrid{1, 1});
}

struct OraclePath {
  std::size_t launch = 0;
  std::size_t capture = 0;
  std::vector<std::size_t> edges;
  double setup_slack_ps = 0.0;
  double hold_slack_ps = 0.0;
  std::vector<std::uint32_t> node_ids;
};

struct Oracle {
  std::vector<OraclePath> paths;
  // Per node position; registers report their data-pin arrival.
  std::vector<double> arrival_max;
  std::vector<double> arrival_min;
};

// Exhaustive depth-first enumeration of every register-to-register path,
// with slack evaluated straight from the setup and hold definitions.
inline Oracle enumerate(const RealizedDesign& d) {
  const TimingGraph& g = d.graph();
  const std::size_t n = g.node_count();
  Oracle o;
  o.arrival_max.assign(n, -std::numeric_limits<double>::infinity());
  o.arrival_min.assign(n, std::numeric_limits<double>::infinity());
  const ClockSpec& clk = d.clock();

  struct Frame {
    std::size_t node;
    std::vector<std::size_t> edges;
    double dmax;
    double dmin;
  };
  for (std::size_t l = 0; l < n; ++l) {
    if (!g.is_register(l)) continue;
    const RegisterTiming lt = d.timing_of(g.node(l).id);
    const double ins_l = clk.insertion(g.node(l).id);
    std::vector<Frame> stack{{l, {}, lt.clk_to_q_late_ps, lt.clk_to_q_early_ps}};
    while (!stack.empty()) {
      Frame f = std::move(stack.back());
      stack.pop_back();
      for (std::size_t e = 0; e < g.edges().size(); ++e) {
        if (!g.edge_resolved(e) || g.edge_src(e) != f.node) continue;
        const TimingEdge& edge = d.edge(e);
        const std::size_t v = g.edge_dst(e);
        Frame next{v, f.edges, f.dmax + edge.logic_ps.max + edge.routing_ps.max,
                   f.dmin + edge.logic_ps.min + edge.routing_ps.min};
        next.edges.push_back(e);
        o.arrival_max[v] = std::max(o.arrival_max[v], ins_l + next.dmax);
        o.arrival_min[v] = std::min(o.arrival_min[v], ins_l + next.dmin);
        if (!g.is_register(v)) {
          stack.push_back(std::move(next));
          continue;
        }
        const RegisterTiming ct = d.timing_of(g.node(v).id);
        const double skew = clk.insertion(g.node(v).id) - ins_l;
        OraclePath p;
        p.launch = l;
        p.capture = v;
        p.edges = next.edges;
        p.setup_slack_ps =
            clk.period_ps + skew - clk.uncertainty_ps - (next.dmax + ct.setup_ps);
        p.hold_slack_ps = next.dmin - ct.hold_ps - skew - clk.uncertainty_ps;
        p.node_ids.push_back(g.node(l).id.value);
        for (std::size_t pe : p.edges) p.node_ids.push_back(g.node(g.edge_dst(pe)).id.value);
        o.paths.push_back(std::move(p));
      }
    }
  }
  std::sort(o.paths.begin(), o.paths.end(), [](const OraclePath& a, const OraclePath& b) {
    if (a.setup_slack_ps != b.setup_slack_ps) return a.setup_slack_ps < b.setup_slack_ps;
    return a.node_ids < b.node_ids;
  });
  return o;
}

// Compares the engine against enumerate() on one random DAG: worst slack,
// arrival windows of every node and the k-worst path lists for several k.
// Returns an empty string on agreement, otherwise the first mismatch.
inline std::string check_against_oracle(std::uint64_t seed) {
  auto g = std::make_shared<const TimingGraph>(random_dag(seed));
  const RealizedDesign d = RealizedDesign::from_annotated(g);
  const Oracle o = enumerate(d);
  const std::string tag = "seed " + std::to_string(seed) + ": ";
  auto close = [](double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= kTimeEpsilonPs;
  };

  const Arrivals a = compute_arrivals(d);
  for (std::size_t v = 0; v < g->node_count(); ++v) {
    const ArrivalWindow& w = g->is_register(v) ? a.capture[v] : a.launch[v];
    if (!close(w.max, o.arrival_max[v]) || !close(w.min, o.arrival_min[v])) {
      return tag + "arrival mismatch at " + g->node(v).name;
    }
  }

  const std::size_t total = o.paths.size();
  CounterRng rng(stream_key(seed, "test.k", 0));
  const std::size_t ks[] = {1, 1 + static_cast<std::size_t>(rng.uniform() * total), total,
                            total + 3};
  for (std::size_t k : ks) {
    const auto got = extract_paths(d, k);
    const std::size_t want = std::min(k, total);
    if (got.size() != want) {
      return tag + "k=" + std::to_string(k) + " returned " + std::to_string(got.size()) +
             " paths, expected " + std::to_string(want);
    }
    for (std::size_t i = 0; i < want; ++i) {
      const OraclePath& op = o.paths[i];
      if (got[i].edges != op.edges) return tag + "path " + std::to_string(i) + " differs";
      if (!close(got[i].setup_slack_ps, op.setup_slack_ps) ||
          !close(got[i].hold_slack_ps, op.hold_slack_ps)) {
        return tag + "slack of path " + std::to_string(i) + " differs";
      }
    }
  }
  if (total > 0 && !close(extract_paths(d, 1).front().setup_slack_ps, o.paths.front().setup_slack_ps)) {
    return tag + "worst slack differs";
  }
  return "";
}

struct SlackFixture {
  double period, uncertainty, clkq_late, clkq_early, setup, hold, ins_launch, ins_capture;
  std::vector<MinMax> cells;  // logic {max, min} in path order
  std::vector<MinMax> nets;   // routing {max, min}; one more than cells
  double setup_slack, hold_slack;
};

// Launch register -> alternating net/cell pins -> capture register.
// Expected slacks evaluated by hand from the setup/hold definitions.
inline const std::vector<SlackFixture> kSlackFixtures = {
    {2000, 0, 100, 100, 50, 0, 0, 0, {{800, 800}}, {{900, 900}, {0, 0}}, 150.0, 1800.0},
    {1000, 30, 30, 30, 10, 20, 0, 0, {{40, 40}}, {{0, 0}, {0, 0}}, 890.0, 20.0},
    {1000, 30, 30, 30, 10, 20, 0, 15, {{40, 40}}, {{0, 0}, {0, 0}}, 905.0, 5.0},
    {800, 20, 23, 21, 39, 3, 25, 60, {{34, 26}, {74, 73}}, {{27, 22.95}, {0, 0}, {0, 0}}, 618.0, 84.95},
    {500, 40, 27, 20, 8, 18, 60, 37.5, {{32, 29}, {31, 23}, {54, 45}},
     {{0, 0}, {0, 0}, {151, 128.35}, {0, 0}}, 134.5, 209.85},
    {2000, 40, 60, 54, 28, 3, 60, 0, {}, {{0, 0}}, 1812.0, 71.0},
    {1250, 40, 47, 37, 34, 18, 37.5, 25, {{96, 81}}, {{0, 0}, {25, 21.25}}, 995.5, 93.75},
    {1000, 20, 38, 36, 12, 16, 37.5, 10, {{107, 98}, {145, 119}, {30, 20}},
     {{24, 20.4}, {92, 78.2}, {157, 133.45}, {153, 130.05}}, 194.5, 626.6},
    {500, 12.5, 50, 48, 8, 23, 25, 60, {}, {{179, 152.15}}, 285.5, 129.65},
    {1250, 12.5, 21, 7, 27, 5, 60, 0, {{146, 143}, {75, 51}}, {{0, 0}, {0, 0}, {106, 90.1}}, 802.5, 333.6},
    {500, 5, 48, 36, 40, 8, 10, 37.5, {{91, 69}, {126, 104}, {117, 103}},
     {{0, 0}, {0, 0}, {0, 0}, {8, 6.8}}, 92.5, 278.3},
    {1000, 12.5, 20, 16, 31, 17, 25, 60, {{101, 93}}, {{0, 0}, {121, 102.85}}, 749.5, 147.35},
    {1250, 20, 26, 11, 30, 1, 10, 0, {{73, 59}, {61, 58}, {107, 104}},
     {{0, 0}, {0, 0}, {0, 0}, {0, 0}}, 923.0, 221.0},
    {800, 40, 44, 40, 21, 11, 60, 25, {}, {{0, 0}}, 660.0, 24.0},
    {1250, 20, 50, 35, 24, 2, 10, 0, {}, {{196, 166.6}}, 950.0, 189.6},
    {1250, 5, 53, 53, 18, 16, 25, 10, {{26, 18}, {96, 91}}, {{183, 155.55}, {137, 116.45}, {47, 39.95}},
     670.0, 467.95},
    {2000, 40, 52, 42, 19, 19, 10, 10, {{122, 108}}, {{56, 47.6}, {0, 0}}, 1711.0, 138.6},
    {1000, 20, 36, 30, 27, 14, 25, 25, {}, {{0, 0}}, 917.0, -4.0},
    {800, 20, 32, 22, 18, 15, 60, 60, {}, {{5, 4.25}}, 725.0, -8.75},
    {500, 0, 44, 38, 35, 5, 37.5, 25, {{42, 30}, {121, 92}}, {{0, 0}, {0, 0}, {0, 0}}, 245.5, 167.5},
};

inline RealizedDesign fixture_design(const SlackFixture& f) {
  std::vector<TimingNode> nodes;
  std::vector<TimingEdge> edges;
  auto node = [&](std::string name, NodeKind kind, Stage stage) {
    TimingNode n;
    n.id = NodeId{static_cast<std::uint32_t>(nodes.size() + 1)};
    n.name = std::move(name);
    n.kind = kind;
    n.stage_tag = stage;
    if (kind == NodeKind::kCombCell) n.cell_class = CellClass::kLut;
    nodes.push_back(n);
    return n.id;
  };
  auto edge = [&](NodeId a, NodeId b, EdgeKind kind, MinMax d) {
    TimingEdge e;
    e.src = a;
    e.dst = b;
    e.kind = kind;
    (kind == EdgeKind::kCellArc ? e.logic_ps : e.routing_ps) = {d.max, d.min};
    edges.push_back(e);
  };
  const NodeId launch = node("idex.a.q", NodeKind::kRegister, Stage::kEX);
  NodeId prev = launch;
  for (std::size_t i = 0; i < f.cells.size(); ++i) {
    const NodeId a = node("ex.alu.c" + std::to_string(i) + "/a", NodeKind::kCombCell, Stage::kEX);
    const NodeId y = node("ex.alu.c" + std::to_string(i) + "/y", NodeKind::kCombCell, Stage::kEX);
    edge(prev, a, EdgeKind::kNet, f.nets[i]);
    edge(a, y, EdgeKind::kCellArc, f.cells[i]);
    prev = y;
  }
  const NodeId capture = node("exmem.b.q", NodeKind::kRegister, Stage::kMEM);
  edge(prev, capture, EdgeKind::kNet, f.nets.back());
  ClockSpec clock;
  clock.period_ps = f.period;
  clock.uncertainty_ps = f.uncertainty;
  clock.insertion_delay_ps = {{launch, f.ins_launch}, {capture, f.ins_capture}};
  std::map<NodeId, RegisterTiming> timing{
      {launch, {f.clkq_late, f.clkq_early, 0, 0}},
      {capture, {0, 0, f.setup, f.hold}},
  };
  return RealizedDesign::from_annotated(std::make_shared<const TimingGraph>(
      std::move(nodes), std::move(edges), std::move(timing), std::move(clock), FabricGrid{1, 1}));
}

}  // namespace stagesta::testkit

#endif  // STAGESTA_TEST_SUPPORT_HPP
