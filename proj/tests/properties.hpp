#ifndef STAGESTA_TEST_PROPERTIES_HPP
#define STAGESTA_TEST_PROPERTIES_HPP

#include <cmath>
#include <string>
#include <vector>

#include "stagesta/fabric_models.hpp"
#include "stagesta/pipeline_gen.hpp"
#include "stagesta/stats_analysis.hpp"
#include "test_support.hpp"

// Randomized property checks shared by the unit suite and the acceptance
// binary. Each check returns an empty string on success.
namespace stagesta::testkit {

inline std::shared_ptr<const TimingGraph> default_pipeline() {
  static const auto g = std::make_shared<const TimingGraph>(build_rv32i_graph(PipelineConfig{}));
  return g;
}

inline constexpr Corner kCorners[] = {Corner::kTT, Corner::kFF, Corner::kSS};

inline bool rel_close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// Sum of an edge list's max delays plus the launch clock-to-q: the data
// arrival relative to the launch clock edge.
inline double path_arrival(const RealizedDesign& d, const TimingPath& p) {
  double t = d.timing_of(p.launch).clk_to_q_late_ps;
  for (std::size_t e : p.edges) t += d.edge(e).logic_ps.max + d.edge(e).routing_ps.max;
  return t;
}

// Adding c to every slack sample shifts the mean by c and leaves the
// shape statistics unchanged.
inline std::string check_uniform_shift(std::uint64_t seed) {
  CounterRng rng(stream_key(seed, "prop.shift", 0));
  const auto n = 2 + static_cast<std::size_t>(rng.uniform() * 400);
  const double c = rng.uniform(-1e4, 1e4);
  std::vector<double> a(n), b(n);
  const bool heavy = rng.uniform() < 0.5;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.normal();
    a[i] = rng.uniform(-500, 500) + (heavy ? std::exp(z) * 40 : z * 25);
    b[i] = a[i] + c;
  }
  const Moments x = moments(a);
  const Moments y = moments(b);
  const std::string tag = "seed " + std::to_string(seed) + ": ";
  if (!rel_close(y.mean, x.mean + c)) return tag + "mean";
  if (!rel_close(y.std, x.std)) return tag + "std";
  if (!rel_close(y.skewness, x.skewness)) return tag + "skewness";
  if (!rel_close(y.excess_kurtosis, x.excess_kurtosis)) return tag + "kurtosis";
  return "";
}

// Adding delta to one edge on the worst path lowers the worst slack by delta.
inline std::string check_slack_linearity(std::uint64_t seed) {
  auto g = std::make_shared<const TimingGraph>(random_dag(seed));
  const RealizedDesign d = RealizedDesign::from_annotated(g);
  const auto worst = extract_paths(d, 1);
  if (worst.empty()) return "";
  const TimingPath& p = worst.front();
  CounterRng rng(stream_key(seed, "prop.linear", 0));
  const std::size_t e = p.edges[static_cast<std::size_t>(rng.uniform() * p.edges.size())];
  const double delta = rng.uniform(0.001, 50.0);
  std::vector<TimingEdge> edges = d.edges();
  (edges[e].kind == EdgeKind::kCellArc ? edges[e].logic_ps : edges[e].routing_ps).max += delta;
  const RealizedDesign bumped(g, edges, d.register_timing(), d.clock(), d.provenance());
  const double after = extract_paths(bumped, 1).front().setup_slack_ps;
  if (std::abs(after - (p.setup_slack_ps - delta)) > kTimeEpsilonPs) {
    return "seed " + std::to_string(seed) + ": slack moved by " +
           std::to_string(p.setup_slack_ps - after) + " for delta " + std::to_string(delta);
  }
  return "";
}

inline std::string check_conservation(const RealizedDesign& d, std::size_t k, const std::string& tag) {
  for (const TimingPath& p : extract_paths(d, k)) {
    const double skew = d.clock().skew(p.launch, p.capture);
    const double setup = d.timing_of(p.capture).setup_ps;
    const DelayDecomposition& x = p.decomposition;
    const double arrival =
        x.logic_ps + x.routing_ps + x.clocking_ps - setup - d.clock().uncertainty_ps - std::abs(skew);
    if (std::abs(arrival - path_arrival(d, p)) > kTimeEpsilonPs) return tag + "decomposition";
    if (x.logic_ps < 0 || x.routing_ps < 0 || x.clocking_ps < 0) return tag + "negative component";
  }
  return "";
}

// Decomposition components minus the clocking overheads equal the data
// arrival summed edge by edge. Even seeds use random DAGs, odd seeds
// realizations of the default pipeline.
inline std::string check_conservation(std::uint64_t seed) {
  const std::string tag = "seed " + std::to_string(seed) + ": ";
  if (seed % 2 == 0) {
    return check_conservation(RealizedDesign::from_annotated(random_dag(seed)), 50, tag);
  }
  const Calibration cal = default_calibration();
  const RealizedDesign d =
      seed % 4 == 1 ? realize_fpga(default_pipeline(), cal.fpga, seed)
                    : realize_asic(default_pipeline(), cal.asic, kCorners[seed / 4 % 3], seed);
  return check_conservation(d, 20, tag);
}

// Every path's delay is a sum of edge delays, so per-edge monotonicity plus
// the worst consumption covers every path.
inline std::string compare_monotone(const RealizedDesign& lo, const RealizedDesign& hi,
                                    const std::string& tag) {
  for (std::size_t e = 0; e < lo.edges().size(); ++e) {
    const TimingEdge& a = lo.edge(e);
    const TimingEdge& b = hi.edge(e);
    if (b.logic_ps.max < a.logic_ps.max || b.logic_ps.min < a.logic_ps.min ||
        b.routing_ps.max < a.routing_ps.max || b.routing_ps.min < a.routing_ps.min) {
      return tag + "edge " + std::to_string(e) + " got faster";
    }
  }
  for (const TimingPath& p : extract_paths(lo, 25)) {
    if (path_arrival(hi, p) < path_arrival(lo, p)) return tag + "path got faster";
  }
  if (1e6 / fmax(hi) < 1e6 / fmax(lo)) return tag + "worst delay decreased";
  return "";
}

// Raising the FPGA switch delay (even seeds) or an ASIC corner multiplier
// (odd seeds) never shortens a path.
inline std::string check_monotonicity(std::uint64_t seed) {
  const std::string tag = "seed " + std::to_string(seed) + ": ";
  CounterRng rng(stream_key(seed, "prop.mono", 0));
  const Calibration cal = default_calibration();
  if (seed % 2 == 0) {
    FpgaFabricModel lo = cal.fpga;
    lo.switch_delay_ps = rng.uniform(1.0, 30.0);
    FpgaFabricModel hi = lo;
    hi.switch_delay_ps += rng.uniform(0.01, 20.0);
    return compare_monotone(realize_fpga(default_pipeline(), lo, seed),
                            realize_fpga(default_pipeline(), hi, seed), tag);
  }
  std::optional<std::uint64_t> sample;
  if (seed % 5 != 0) sample = seed;
  AsicFabricModel lo = cal.asic;
  if (seed % 3 == 0) {
    // Moving to a slower corner raises the multiplier from 1 to SS.
    return compare_monotone(realize_asic(default_pipeline(), lo, Corner::kTT, sample),
                            realize_asic(default_pipeline(), lo, Corner::kSS, sample), tag);
  }
  // TT is pinned at 1; FF stays below 1 and SS above it.
  const bool ff = seed % 3 == 1;
  double& k_lo = ff ? lo.corner_multipliers.ff : lo.corner_multipliers.ss;
  k_lo = ff ? rng.uniform(0.5, 0.95) : rng.uniform(1.01, 1.5);
  AsicFabricModel hi = lo;
  double& k_hi = ff ? hi.corner_multipliers.ff : hi.corner_multipliers.ss;
  k_hi += ff ? rng.uniform(0.001, 0.999 - k_lo) : rng.uniform(0.001, 0.5);
  const Corner corner = ff ? Corner::kFF : Corner::kSS;
  return compare_monotone(realize_asic(default_pipeline(), lo, corner, sample),
                          realize_asic(default_pipeline(), hi, corner, sample), tag);
}

}  // namespace stagesta::testkit

#endif  // STAGESTA_TEST_PROPERTIES_HPP
