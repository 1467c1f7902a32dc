#include <gtest/gtest.h>

#include <cmath>

#include "stagesta/error.hpp"
#include "stagesta/fabric_models.hpp"
#include "stagesta/pipeline_gen.hpp"
#include "stagesta/sta_engine.hpp"
#include "stagesta/stats_analysis.hpp"

using namespace stagesta;

namespace {

std::shared_ptr<const TimingGraph> pipeline() {
  static const auto g = std::make_shared<const TimingGraph>(build_rv32i_graph(PipelineConfig{}));
  return g;
}

// r0 -> c0/a -> c0/y -> ... -> c{n-1}/y -> r1, with every node at `at`
// except the capture register, which sits at `capture_at`.
std::shared_ptr<const TimingGraph> cell_chain(int n, Placement at = {0, 0},
                                              Placement capture_at = {0, 0},
                                              CellClass cls = CellClass::kStdCell) {
  std::vector<TimingNode> nodes;
  std::vector<TimingEdge> edges;
  std::uint32_t id = 0;
  auto node = [&](std::string name, NodeKind kind, Placement p) {
    TimingNode v;
    v.id = NodeId{id++};
    v.name = std::move(name);
    v.kind = kind;
    v.stage_tag = Stage::kEX;
    v.placement = p;
    if (kind == NodeKind::kCombCell) {
      v.cell_class = cls;
      if (cls != CellClass::kMemMacro) {
        v.drive_strength = 1;
        v.vt_class = VtClass::kSvt;
      }
    }
    nodes.push_back(v);
    return v.id;
  };
  auto edge = [&](NodeId a, NodeId b, EdgeKind kind) {
    TimingEdge e;
    e.src = a;
    e.dst = b;
    e.kind = kind;
    edges.push_back(e);
  };
  NodeId prev = node("r0", NodeKind::kRegister, at);
  for (int i = 0; i < n; ++i) {
    const NodeId a = node("ex.c" + std::to_string(i) + "/a", NodeKind::kCombCell, at);
    const NodeId y = node("ex.c" + std::to_string(i) + "/y", NodeKind::kCombCell, at);
    edge(prev, a, EdgeKind::kNet);
    edge(a, y, EdgeKind::kCellArc);
    prev = y;
  }
  edge(prev, node("r1", NodeKind::kRegister, capture_at), EdgeKind::kNet);
  return std::make_shared<const TimingGraph>(std::move(nodes), std::move(edges),
                                             std::map<NodeId, RegisterTiming>{}, ClockSpec{},
                                             FabricGrid{16, 16});
}

double logic_sum(const RealizedDesign& d) {
  double s = 0.0;
  for (const TimingEdge& e : d.edges()) s += e.logic_ps.max;
  return s;
}

std::vector<double> worst_per_transition(const RealizedDesign& d) {
  std::vector<double> out;
  for (Transition t : kAllTransitions) {
    const auto p = extract_transition_paths(d, t, 1);
    out.push_back(p.empty() ? 0.0 : consumption_ps(p.front(), d));
  }
  return out;
}

}  // namespace

TEST(FabricModels, ZeroDistanceNetsHaveZeroHops) {
  const FpgaFabricModel m = default_calibration().fpga;
  const auto g = cell_chain(4, {2, 3}, {2, 3}, CellClass::kLut);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RealizedDesign d = realize_fpga(g, m, seed);
    for (std::size_t e = 0; e < g->edges().size(); ++e) {
      if (g->edges()[e].kind != EdgeKind::kNet) continue;
      EXPECT_EQ(d.edge(e).hop_count, 0);
      EXPECT_EQ(d.edge(e).routing_ps.max, 0.0);
    }
  }
}

TEST(FabricModels, FpgaDelaysFollowModelWithoutDispersion) {
  FpgaFabricModel m = default_calibration().fpga;
  m.hop_model = {2.0, 1e-12, 0.0};  // dispersion must be positive
  const auto g = cell_chain(2, {0, 0}, {3, 4}, CellClass::kLut);
  const RealizedDesign d = realize_fpga(g, m, 9);
  const double hop_ps = m.switch_delay_ps + m.segment_delay_ps;
  for (std::size_t e = 0; e < g->edges().size(); ++e) {
    const TimingEdge& x = d.edge(e);
    if (g->edges()[e].kind == EdgeKind::kCellArc) {
      EXPECT_EQ(x.logic_ps.max, m.lut_delay_ps);
      EXPECT_EQ(x.routing_ps.max, 0.0);
    }
  }
  // Last net spans 3 + 4 = 7 tiles at 2 hops per tile.
  const TimingEdge& last = d.edges().back();
  EXPECT_EQ(last.hop_count, 14);
  EXPECT_DOUBLE_EQ(last.routing_ps.max, 14 * hop_ps);
  EXPECT_DOUBLE_EQ(last.routing_ps.min, kFpgaMinRoutingFraction * 14 * hop_ps);
}

TEST(FabricModels, AsicDeterministicDelaysFollowModel) {
  const AsicFabricModel m = default_calibration().asic;
  const auto g = cell_chain(3, {0, 0}, {5, 0});
  for (Corner c : {Corner::kTT, Corner::kSS, Corner::kFF}) {
    const RealizedDesign d = realize_asic(g, m, c, std::nullopt);
    const double k = m.corner_multipliers.at(c);
    const double base = m.cell_base({CellClass::kStdCell, 1, VtClass::kSvt});
    for (std::size_t e = 0; e < g->edges().size(); ++e) {
      if (g->edges()[e].kind == EdgeKind::kCellArc) EXPECT_DOUBLE_EQ(d.edge(e).logic_ps.max, base * k);
    }
    // Span 5 routes on intermediate metal.
    EXPECT_DOUBLE_EQ(d.edges().back().routing_ps.max, 5 * m.wire_ps_per_tile.intermediate * k);
    EXPECT_DOUBLE_EQ(d.clock().uncertainty_ps, m.clock_uncertainty_ps);
  }
}

TEST(FabricModels, LvfChainVarianceMatchesIndependentCells) {
  // Ten independent Gaussian cell factors: std of the chain is
  // sqrt(10) * sigma * base.
  const AsicFabricModel m = default_calibration().asic;
  const auto g = cell_chain(10);
  std::vector<double> sums;
  for (std::uint64_t s = 1; s <= 1000; ++s) sums.push_back(logic_sum(realize_asic(g, m, Corner::kTT, s)));
  const double base = m.cell_base({CellClass::kStdCell, 1, VtClass::kSvt});
  const double expected = std::sqrt(10.0) * m.lvf_sigma_fraction * base;
  const Moments mo = moments(sums);
  EXPECT_NEAR(mo.std, expected, 0.10 * expected);
  EXPECT_NEAR(mo.mean, 10 * base, 0.01 * 10 * base);
}

TEST(FabricModels, LvfAppliesToMemoryMacros) {
  const AsicFabricModel m = default_calibration().asic;
  const auto g = cell_chain(1, {0, 0}, {0, 0}, CellClass::kMemMacro);
  const double a = logic_sum(realize_asic(g, m, Corner::kTT, 1));
  const double b = logic_sum(realize_asic(g, m, Corner::kTT, 2));
  EXPECT_NE(a, b);
  EXPECT_DOUBLE_EQ(logic_sum(realize_asic(g, m, Corner::kTT, std::nullopt)), m.memmacro_access_ps);
}

TEST(FabricModels, ReplayIsBitExact) {
  const Calibration c = default_calibration();
  for (std::uint64_t seed : {1u, 17u, 29u}) {
    const RealizedDesign d = realize_fpga(pipeline(), c.fpga, seed);
    EXPECT_TRUE(replay(d) == d);
  }
  for (Corner corner : {Corner::kFF, Corner::kTT, Corner::kSS}) {
    const RealizedDesign d = realize_asic(pipeline(), c.asic, corner, 42);
    EXPECT_TRUE(replay(d) == d);
  }
  EXPECT_FALSE(realize_fpga(pipeline(), c.fpga, 1) == realize_fpga(pipeline(), c.fpga, 2));
}

TEST(FabricModels, SwitchDelayIsMonotone) {
  FpgaFabricModel lo = default_calibration().fpga;
  FpgaFabricModel hi = lo;
  hi.switch_delay_ps += 3.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RealizedDesign a = realize_fpga(pipeline(), lo, seed);
    const RealizedDesign b = realize_fpga(pipeline(), hi, seed);
    for (std::size_t e = 0; e < a.edges().size(); ++e) {
      EXPECT_GE(b.edge(e).routing_ps.max, a.edge(e).routing_ps.max);
    }
    const auto wa = worst_per_transition(a);
    const auto wb = worst_per_transition(b);
    for (std::size_t i = 0; i < wa.size(); ++i) EXPECT_GE(wb[i], wa[i]);
  }
}

TEST(FabricModels, CornerMultiplierIsMonotone) {
  const AsicFabricModel m = default_calibration().asic;
  for (std::uint64_t s : {3u, 4u}) {
    const RealizedDesign ff = realize_asic(pipeline(), m, Corner::kFF, s);
    const RealizedDesign tt = realize_asic(pipeline(), m, Corner::kTT, s);
    const RealizedDesign ss = realize_asic(pipeline(), m, Corner::kSS, s);
    for (std::size_t e = 0; e < tt.edges().size(); ++e) {
      EXPECT_GE(tt.edge(e).logic_ps.max + tt.edge(e).routing_ps.max,
                ff.edge(e).logic_ps.max + ff.edge(e).routing_ps.max);
      EXPECT_GE(ss.edge(e).logic_ps.max + ss.edge(e).routing_ps.max,
                tt.edge(e).logic_ps.max + tt.edge(e).routing_ps.max);
    }
    const auto a = worst_per_transition(ff), b = worst_per_transition(tt), c = worst_per_transition(ss);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_GE(b[i], a[i]);
      EXPECT_GE(c[i], b[i]);
    }
  }
}

TEST(FabricModels, FpgaWorstDelayIsRightSkewed) {
  const SweepResult s = seed_sweep(pipeline(), default_calibration().fpga, 30, 1);
  EXPECT_GT(moments(s.worst_delays()).skewness, 0.0);
}

TEST(FabricModels, AsicWorstDelayIsNearSymmetric) {
  const SweepResult s = corner_sweep(pipeline(), default_calibration().asic, {Corner::kTT}, 200, 1);
  EXPECT_LE(std::abs(moments(s.worst_delays()).skewness), 0.2);
}

TEST(FabricModels, CornerShiftsMeanNotSpread) {
  const AsicFabricModel m = default_calibration().asic;
  const SweepResult s = corner_sweep(pipeline(), m, {Corner::kTT, Corner::kSS}, 200, 1);
  const Moments tt = moments(s.subset("TT").worst_delays());
  const Moments ss = moments(s.subset("SS").worst_delays());
  EXPECT_GT(ss.mean, tt.mean);
  EXPECT_LE(ss.std / tt.std, 1.5);
}

TEST(FabricModels, CongestionFieldIsSeededAndBounded) {
  const FpgaFabricModel m = default_calibration().fpga;
  const FabricGrid grid{48, 16};
  for (double x = 0; x < 48; x += 5.5) {
    for (double y = 0; y < 16; y += 3.5) {
      const double c = fpga_congestion(m, grid, 3, x, y);
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 10.0);
      EXPECT_EQ(c, fpga_congestion(m, grid, 3, x, y));
    }
  }
  EXPECT_NE(fpga_congestion(m, grid, 3, 10, 5), fpga_congestion(m, grid, 4, 10, 5));
}

TEST(FabricModels, LayerAssignment) {
  const LayerAssignmentRule r;
  EXPECT_EQ(r.layer(0), MetalLayer::kLocal);
  EXPECT_EQ(r.layer(2), MetalLayer::kLocal);
  EXPECT_EQ(r.layer(3), MetalLayer::kIntermediate);
  EXPECT_EQ(r.layer(8), MetalLayer::kIntermediate);
  EXPECT_EQ(r.layer(9), MetalLayer::kGlobal);
}

TEST(FabricModels, CellBaseFallsBackToStdCell) {
  AsicFabricModel m;
  m.cell_base_ps[{CellClass::kStdCell, 2, VtClass::kLvt}] = 12.5;
  EXPECT_EQ(m.cell_base({CellClass::kMux, 2, VtClass::kLvt}), 12.5);
  EXPECT_THROW(m.cell_base({CellClass::kMux, 4, VtClass::kLvt}), Error);
}

TEST(FabricModels, RejectsBrokenModels) {
  FpgaFabricModel f = default_calibration().fpga;
  f.switch_delay_ps = -1;
  EXPECT_THROW(check_model(f), Error);
  AsicFabricModel a = default_calibration().asic;
  a.lvf_sigma_fraction = -0.1;
  EXPECT_THROW(check_model(a), Error);
  EXPECT_NO_THROW(check_model(default_calibration().fpga));
  EXPECT_NO_THROW(check_model(default_calibration().asic));
}

TEST(FabricModels, CornerNames) {
  EXPECT_EQ(corner_from_string("SS"), Corner::kSS);
  try {
    corner_from_string("XX");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidCorner);
  }
}

TEST(FabricModels, ProvenanceLabels) {
  EXPECT_EQ((Provenance{Fabric::kFpga, 3, Corner::kTT, std::nullopt}.label()), "fpga:seed=3");
  EXPECT_EQ((Provenance{Fabric::kAsic, 0, Corner::kSS, 12}.label()), "asic:corner=SS:sample=12");
  EXPECT_EQ((Provenance{Fabric::kAsic, 0, Corner::kTT, std::nullopt}.label()), "asic:corner=TT");
}

TEST(FabricModels, CalibrateHitsTargets) {
  CalibrationTargets t;
  t.asic_samples = 20;
  t.fpga_seeds = 10;
  const CalibrationFit fit = calibrate(pipeline(), default_calibration(), t);
  EXPECT_NEAR(fit.fpga_mean_fmax_mhz, t.fpga_mean_fmax_mhz, 1e-6);
  EXPECT_NEAR(fit.asic_tt_fmax_mhz, t.asic_tt_fmax_mhz, 1e-6);
  EXPECT_NEAR(fit.asic_ss_fmax_mhz, t.asic_ss_fmax_mhz, 1e-6);
}
