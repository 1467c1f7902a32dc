#include <gtest/gtest.h>

#include <map>
#include <set>

#include "stagesta/error.hpp"
#include "stagesta/fabric_models.hpp"
#include "stagesta/pipeline_gen.hpp"
#include "stagesta/serialization.hpp"
#include "stagesta/sta_engine.hpp"

using namespace stagesta;

namespace {

std::set<std::pair<std::string, std::string>> stage_edges(const TimingGraph& g, Stage stage) {
  std::set<std::pair<std::string, std::string>> out;
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const TimingNode& a = g.node(g.edge_src(e));
    const TimingNode& b = g.node(g.edge_dst(e));
    if (a.stage_tag == stage && b.stage_tag == stage) out.insert({a.name, b.name});
  }
  return out;
}

int worst_levels(const TimingGraph& g, Transition t) {
  const RealizedDesign d = RealizedDesign::from_annotated(g);
  const auto paths = extract_transition_paths(d, t, 1);
  return paths.empty() ? 0 : paths.front().logic_levels;
}

}  // namespace

TEST(PipelineGen, EveryRegisterIsStageTagged) {
  const TimingGraph g = build_rv32i_graph(PipelineConfig{});
  std::size_t registers = 0;
  for (const TimingNode& n : g.nodes()) {
    if (n.kind != NodeKind::kRegister) continue;
    ++registers;
    EXPECT_NE(n.stage_tag, Stage::kNone) << n.name;
  }
  EXPECT_GT(registers, 0u);
}

TEST(PipelineGen, CellsArePinPairsJoinedByOneArc) {
  const TimingGraph g = build_rv32i_graph(PipelineConfig{});
  std::map<std::string, int> arcs;
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    if (g.edges()[e].kind != EdgeKind::kCellArc) continue;
    const std::string& a = g.node(g.edge_src(e)).name;
    const std::string& y = g.node(g.edge_dst(e)).name;
    ASSERT_GE(a.size(), 2u);
    EXPECT_EQ(a.substr(a.size() - 2), "/a");
    EXPECT_EQ(y, a.substr(0, a.size() - 2) + "/y");
    ++arcs[a];
  }
  for (const TimingNode& n : g.nodes()) {
    if (n.kind == NodeKind::kCombCell && n.name.ends_with("/a")) EXPECT_EQ(arcs[n.name], 1) << n.name;
  }
}

TEST(PipelineGen, EveryPathGetsOneLabel) {
  const TimingGraph g = build_rv32i_graph(PipelineConfig{});
  const RealizedDesign d = RealizedDesign::from_annotated(g);
  std::set<Transition> seen;
  for (const TimingPath& p : extract_paths(d, kMaxPathsPerDesign)) {
    const auto [t, c] = classify(p, g);
    EXPECT_EQ(t, p.transition);
    EXPECT_EQ(c, p.path_class);
    seen.insert(t);
  }
  for (Transition t : kAllTransitions) {
    EXPECT_FALSE(extract_transition_paths(d, t, 1).empty()) << to_string(t);
  }
}

TEST(PipelineGen, TransitionMapping) {
  EXPECT_EQ(transition_for(Stage::kIF, Stage::kID), Transition::kIfId);
  EXPECT_EQ(transition_for(Stage::kID, Stage::kIF), Transition::kIfId);
  EXPECT_EQ(transition_for(Stage::kID, Stage::kEX), Transition::kIdEx);
  EXPECT_EQ(transition_for(Stage::kEX, Stage::kMEM), Transition::kExMem);
  EXPECT_EQ(transition_for(Stage::kMEM, Stage::kWB), Transition::kMemWb);
  EXPECT_EQ(transition_for(Stage::kWB, Stage::kID), Transition::kWbRf);
  EXPECT_THROW(transition_for(Stage::kNone, Stage::kEX), Error);
}

TEST(PipelineGen, DoublingAluDepthDeepensExMemOnly) {
  PipelineConfig base;
  PipelineConfig deep = base;
  deep.alu_depth_levels = 2 * base.alu_depth_levels;
  const TimingGraph a = build_rv32i_graph(base);
  const TimingGraph b = build_rv32i_graph(deep);
  EXPECT_GT(worst_levels(b, Transition::kExMem), worst_levels(a, Transition::kExMem));
  EXPECT_EQ(stage_edges(a, Stage::kIF), stage_edges(b, Stage::kIF));
  EXPECT_EQ(worst_levels(a, Transition::kIfId), worst_levels(b, Transition::kIfId));
}

TEST(PipelineGen, DeterministicSerialization) {
  const PipelineConfig c;
  EXPECT_EQ(to_json(build_rv32i_graph(c)).dump(), to_json(build_rv32i_graph(c)).dump());
}

TEST(PipelineGen, ConfigChangesGraph) {
  PipelineConfig c;
  c.include_control_paths = false;
  EXPECT_LT(build_rv32i_graph(c).node_count(), build_rv32i_graph(PipelineConfig{}).node_count());
  PipelineConfig wide;
  wide.slice_bits = 4;
  EXPECT_GT(build_rv32i_graph(wide).node_count(), build_rv32i_graph(PipelineConfig{}).node_count());
}

TEST(PipelineGen, VariantConfigsValidate) {
  for (int depth : {1, 3, 16}) {
    for (int slice : {4, 8, 32}) {
      PipelineConfig c;
      c.alu_depth_levels = depth;
      c.slice_bits = slice;
      const auto v = validate(build_rv32i_graph(c));
      EXPECT_TRUE(v.empty()) << depth << "/" << slice << ": " << (v.empty() ? "" : v.front().detail);
    }
  }
}

TEST(PipelineGen, RejectsBadConfig) {
  auto rejects = [](auto mutate) {
    PipelineConfig c;
    mutate(c);
    try {
      build_rv32i_graph(c);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::kInvalidConfig;
    }
    return false;
  };
  EXPECT_TRUE(rejects([](PipelineConfig& c) { c.word_width = 0; }));
  EXPECT_TRUE(rejects([](PipelineConfig& c) { c.alu_depth_levels = 0; }));
  EXPECT_TRUE(rejects([](PipelineConfig& c) { c.regfile_read_ports = 3; }));
  EXPECT_TRUE(rejects([](PipelineConfig& c) { c.bypass_sources = {Stage::kIF}; }));
  EXPECT_TRUE(rejects([](PipelineConfig& c) { c.clock_period_ps = 0; }));
  EXPECT_TRUE(rejects([](PipelineConfig& c) { c.fabric_grid = {4, 4}; }));
}

TEST(PipelineGen, UnitOfName) {
  EXPECT_EQ(unit_of("ex.alu.l3_s1/y"), "alu");
  EXPECT_EQ(unit_of("id.ctrl.l0/a"), "ctrl");
  EXPECT_EQ(unit_of("idex.rs1.s3"), "rs1");
  EXPECT_EQ(unit_of("plain"), "");
}

TEST(PipelineGen, PlacementsInsideGrid) {
  PipelineConfig c;
  c.fabric_grid = {20, 8};
  const TimingGraph g = build_rv32i_graph(c);
  for (const TimingNode& n : g.nodes()) {
    EXPECT_GE(n.placement.x, 0);
    EXPECT_LT(n.placement.x, 20);
    EXPECT_GE(n.placement.y, 0);
    EXPECT_LT(n.placement.y, 8);
  }
}
