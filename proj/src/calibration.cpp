#include "stagesta/fabric_models.hpp"

#include <map>

#include "stagesta/error.hpp"
#include "stagesta/stats_analysis.hpp"

namespace stagesta {

Calibration default_calibration() {
  Calibration c;
  FpgaFabricModel& f = c.fpga;
  f.lut_delay_ps = 72;
  f.carry_delay_ps = 36;
  f.mux_delay_ps = 72;
  f.memmacro_access_ps = 200;
  f.ff_timing = {40, 30, 20, 15};
  f.switch_delay_ps = 11.5;
  f.segment_delay_ps = 5.7;
  f.hop_model = {1.0, 0.1, 0.15};
  f.congestion_field = {10, 4.0, 1.0};
  f.clock_insertion_ps = 300;
  f.clock_skew_spread_ps = 15;
  f.clock_uncertainty_ps = 40;
  f.target_period_ps = 2000;

  // Nominal ASIC values times the overall scale found by calibrate().
  constexpr double kAsicScale = 0.98421;
  AsicFabricModel& a = c.asic;
  const std::map<CellClass, double> class_ps{{CellClass::kLut, 43.1},
                                             {CellClass::kCarryChain, 43.1},
                                             {CellClass::kMux, 43.1},
                                             {CellClass::kStdCell, 43.1}};
  const std::map<VtClass, double> vt_factor{
      {VtClass::kLvt, 0.7}, {VtClass::kSvt, 1.0}, {VtClass::kHvt, 1.35}};
  const std::map<int, double> drive_factor{{1, 1.0}, {2, 0.8}, {4, 0.6}};
  for (const auto& [cls, ps] : class_ps) {
    for (const auto& [d, df] : drive_factor) {
      for (const auto& [vt, vf] : vt_factor) a.cell_base_ps[{cls, d, vt}] = ps * vf * df * kAsicScale;
    }
  }
  a.memmacro_access_ps = 30 * kAsicScale;
  a.ff_timing = {25 * kAsicScale, 18 * kAsicScale, 12 * kAsicScale, 8 * kAsicScale};
  a.wire_ps_per_tile = {3.75 * kAsicScale, 2.5 * kAsicScale, 1.875 * kAsicScale};
  a.corner_multipliers = {1.0, 0.90, 1.147};
  a.lvf_sigma_fraction = 0.11;
  a.clock_insertion_ps = 80 * kAsicScale;
  a.clock_skew_budget_ps = 3 * kAsicScale;
  a.clock_uncertainty_ps = 45 * kAsicScale;
  a.target_period_ps = 540;
  return c;
}

namespace {

void scale(FpgaFabricModel& f, double s) {
  for (double* v : {&f.lut_delay_ps, &f.carry_delay_ps, &f.mux_delay_ps, &f.memmacro_access_ps,
                    &f.ff_timing.clk_to_q_late_ps, &f.ff_timing.clk_to_q_early_ps,
                    &f.ff_timing.setup_ps, &f.ff_timing.hold_ps, &f.switch_delay_ps,
                    &f.segment_delay_ps, &f.clock_insertion_ps, &f.clock_skew_spread_ps,
                    &f.clock_uncertainty_ps}) {
    *v *= s;
  }
}

void scale(AsicFabricModel& a, double s) {
  for (auto& [key, ps] : a.cell_base_ps) ps *= s;
  for (double* v : {&a.memmacro_access_ps, &a.ff_timing.clk_to_q_late_ps,
                    &a.ff_timing.clk_to_q_early_ps, &a.ff_timing.setup_ps, &a.ff_timing.hold_ps,
                    &a.wire_ps_per_tile.local, &a.wire_ps_per_tile.intermediate,
                    &a.wire_ps_per_tile.global, &a.clock_insertion_ps, &a.clock_skew_budget_ps,
                    &a.clock_uncertainty_ps}) {
    *v *= s;
  }
}

double mean_fmax(const std::vector<double>& worst_delays_ps) {
  double sum = 0.0;
  for (double d : worst_delays_ps) sum += 1e6 / d;
  return sum / static_cast<double>(worst_delays_ps.size());
}

std::vector<double> asic_worst_delays(const std::shared_ptr<const TimingGraph>& graph,
                                      const AsicFabricModel& a, Corner corner,
                                      std::size_t samples, std::size_t jobs) {
  return corner_sweep(graph, a, {corner}, samples, 1, jobs).worst_delays();
}

}  // namespace

CalibrationFit calibrate(std::shared_ptr<const TimingGraph> graph, const Calibration& base,
                         const CalibrationTargets& targets, std::size_t jobs) {
  if (targets.fpga_seeds == 0 || targets.fpga_mean_fmax_mhz <= 0 ||
      targets.asic_tt_fmax_mhz <= 0 || targets.asic_ss_fmax_mhz <= 0) {
    throw Error(ErrorKind::kInvalidConfig, "calibration targets must be positive");
  }
  check_model(base.fpga);
  check_model(base.asic);
  CalibrationFit fit;
  fit.calibration = base;
  FpgaFabricModel& f = fit.calibration.fpga;
  AsicFabricModel& a = fit.calibration.asic;

  // Mean of 1/(s D) is mean(1/D)/s.
  auto fpga_mean = [&] {
    return mean_fmax(seed_sweep(graph, f, targets.fpga_seeds, 1, jobs).worst_delays());
  };
  fit.fpga_scale = fpga_mean() / targets.fpga_mean_fmax_mhz;
  scale(f, fit.fpga_scale);
  fit.fpga_mean_fmax_mhz = fpga_mean();

  const std::size_t n = targets.asic_samples;
  fit.asic_scale =
      mean_fmax(asic_worst_delays(graph, a, Corner::kTT, n, jobs)) / targets.asic_tt_fmax_mhz;
  scale(a, fit.asic_scale);
  const auto tt = asic_worst_delays(graph, a, Corner::kTT, n, jobs);
  fit.asic_tt_fmax_mhz = mean_fmax(tt);

  // Every propagation delay scales with the corner multiplier k and the
  // uncertainty U does not, so sample i consumes k P_i + U at any corner.
  const double u = a.clock_uncertainty_ps;
  std::vector<double> propagation;
  for (double d : tt) {
    if (d <= u) throw Error(ErrorKind::kInvalidModel, "clock uncertainty exceeds the worst path");
    propagation.push_back((d - u) / a.corner_multipliers.tt);
  }
  auto ss_mean = [&](double k) {
    std::vector<double> delays;
    for (double p : propagation) delays.push_back(k * p + u);
    return mean_fmax(delays);
  };
  double lo = 1e-3, hi = 1e3;
  if (ss_mean(hi) > targets.asic_ss_fmax_mhz || ss_mean(lo) < targets.asic_ss_fmax_mhz) {
    throw Error(ErrorKind::kInvalidConfig, "SS target unreachable");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ss_mean(mid) > targets.asic_ss_fmax_mhz ? lo : hi) = mid;
  }
  a.corner_multipliers.ss = 0.5 * (lo + hi);
  fit.asic_ss_fmax_mhz = mean_fmax(asic_worst_delays(graph, a, Corner::kSS, n, jobs));
  return fit;
}

}  // namespace stagesta
