#include "stagesta/stats_analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "stagesta/error.hpp"

namespace stagesta {

namespace {

void run_parallel(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& task) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> workers;
  for (std::size_t j = 0; j < jobs; ++j) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          task(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

SweepResult assemble(std::string fabric, std::size_t k, std::vector<RealizationSummary> summaries,
                     std::vector<std::vector<PathSample>> per_realization) {
  SweepResult out;
  out.fabric = std::move(fabric);
  out.paths_per_transition = k;
  out.realizations = std::move(summaries);
  for (std::size_t r = 0; r < per_realization.size(); ++r) {
    for (PathSample& s : per_realization[r]) {
      s.realization = r;
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace

SweepResult SweepResult::subset(const std::string& group) const {
  SweepResult out;
  out.fabric = fabric;
  out.paths_per_transition = paths_per_transition;
  std::vector<std::size_t> remap(realizations.size(), static_cast<std::size_t>(-1));
  for (std::size_t r = 0; r < realizations.size(); ++r) {
    if (realizations[r].group != group) continue;
    remap[r] = out.realizations.size();
    out.realizations.push_back(realizations[r]);
  }
  for (const PathSample& s : samples) {
    if (s.realization >= remap.size() || remap[s.realization] == static_cast<std::size_t>(-1)) {
      continue;
    }
    PathSample copy = s;
    copy.realization = remap[s.realization];
    out.samples.push_back(std::move(copy));
  }
  return out;
}

std::vector<std::string> SweepResult::groups() const {
  std::vector<std::string> out;
  for (const auto& r : realizations) {
    if (std::find(out.begin(), out.end(), r.group) == out.end()) out.push_back(r.group);
  }
  return out;
}

std::vector<double> SweepResult::fmax_values() const {
  std::vector<double> out;
  for (const auto& r : realizations) out.push_back(r.fmax_mhz);
  return out;
}

std::vector<double> SweepResult::worst_delays() const {
  std::vector<double> out;
  for (const auto& r : realizations) out.push_back(r.worst_delay_ps);
  return out;
}

std::vector<double> SweepResult::slacks(Transition t) const {
  std::vector<double> out;
  for (const auto& s : samples) {
    if (s.transition == t) out.push_back(s.setup_slack_ps);
  }
  return out;
}

RealizationSummary summarize_realization(std::string provenance, std::string group,
                                         std::span<const PathSample> samples) {
  RealizationSummary r;
  r.provenance = std::move(provenance);
  r.group = std::move(group);
  const PathSample* worst = nullptr;
  for (const PathSample& s : samples) {
    if (!worst || s.setup_slack_ps < worst->setup_slack_ps) worst = &s;
  }
  if (!worst) return r;
  r.worst_delay_ps = worst->consumption_ps();
  r.fmax_mhz = 1e6 / r.worst_delay_ps;
  r.worst_transition = worst->transition;
  r.worst_decomposition = worst->decomposition;
  return r;
}

std::vector<PathSample> sample_design(const RealizedDesign& design,
                                      std::size_t paths_per_transition) {
  const TimingGraph& g = design.graph();
  std::vector<PathSample> out;
  for (Transition t : kAllTransitions) {
    for (const TimingPath& p : extract_pair_paths(design, t, paths_per_transition)) {
      PathSample s;
      s.launch_name = g.node(*g.index_of(p.launch)).name;
      s.capture_name = g.node(*g.index_of(p.capture)).name;
      s.transition = p.transition;
      s.path_class = p.path_class;
      s.decomposition = p.decomposition;
      s.setup_slack_ps = p.setup_slack_ps;
      s.hold_slack_ps = p.hold_slack_ps;
      s.logic_levels = p.logic_levels;
      if (design.provenance().fabric == Fabric::kFpga) s.hop_count = p.hop_count;
      s.congestion_mean = p.congestion_mean;
      s.clock_period_ps = design.clock().period_ps;
      out.push_back(std::move(s));
    }
  }
  return out;
}

SweepResult seed_sweep(std::shared_ptr<const TimingGraph> graph, const FpgaFabricModel& model,
                       std::size_t n_seeds, std::size_t paths_per_transition, std::size_t jobs) {
  if (n_seeds == 0) throw Error(ErrorKind::kInvalidConfig, "n_seeds must be >= 1");
  check_model(model);
  std::vector<RealizationSummary> summaries(n_seeds);
  std::vector<std::vector<PathSample>> samples(n_seeds);
  run_parallel(n_seeds, jobs, [&](std::size_t i) {
    const RealizedDesign d = realize_fpga(graph, model, i + 1);
    samples[i] = sample_design(d, paths_per_transition);
    summaries[i] = summarize_realization(d.provenance().label(), "", samples[i]);
  });
  return assemble("fpga", paths_per_transition, std::move(summaries), std::move(samples));
}

SweepResult corner_sweep(std::shared_ptr<const TimingGraph> graph, const AsicFabricModel& model,
                         const std::vector<Corner>& corners, std::size_t n_samples,
                         std::size_t paths_per_transition, std::size_t jobs) {
  if (corners.empty()) throw Error(ErrorKind::kInvalidConfig, "corner list is empty");
  check_model(model);
  const std::size_t per_corner = std::max<std::size_t>(n_samples, 1);
  const std::size_t count = corners.size() * per_corner;
  std::vector<RealizationSummary> summaries(count);
  std::vector<std::vector<PathSample>> samples(count);
  run_parallel(count, jobs, [&](std::size_t i) {
    const Corner corner = corners[i / per_corner];
    std::optional<std::uint64_t> sample;
    if (n_samples > 0) sample = i % per_corner + 1;
    const RealizedDesign d = realize_asic(graph, model, corner, sample);
    samples[i] = sample_design(d, paths_per_transition);
    summaries[i] = summarize_realization(d.provenance().label(), to_string(corner), samples[i]);
  });
  return assemble("asic", paths_per_transition, std::move(summaries), std::move(samples));
}

Moments moments(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorKind::kInsufficientSamples, "need at least two samples");
  }
  Moments m;
  m.n = values.size();
  const double n = static_cast<double>(m.n);
  double sum = 0.0;
  m.min = values.front();
  m.max = values.front();
  for (double v : values) {
    sum += v;
    m.min = std::min(m.min, v);
    m.max = std::max(m.max, v);
  }
  m.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m.std = std::sqrt(m2 / (n - 1.0));
  m2 /= n;
  m3 /= n;
  m4 /= n;
  // Treat variance at rounding level of the mean as constant data.
  const double scale = std::max(1.0, std::abs(m.mean));
  if (m2 > 1e-24 * scale * scale) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

constexpr std::size_t kMaxBins = 1000;

}  // namespace

Histogram histogram(std::span<const double> values) {
  Histogram h;
  if (values.empty()) return h;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  const double range = hi - lo;
  std::size_t bins = 1;
  if (range > 0) {
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    if (iqr > 0) {
      const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
      bins = static_cast<std::size_t>(std::ceil(range / width));
      bins = std::clamp<std::size_t>(bins, 1, kMaxBins);
    } else {
      bins = 10;
    }
  }
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges[i] = lo + range * static_cast<double>(i) / static_cast<double>(bins);
  }
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : sorted) {
    std::size_t b = range > 0 ? static_cast<std::size_t>((v - lo) / range * bins) : 0;
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

StageStatistics stage_statistics(std::span<const double> slacks, Transition t) {
  const Moments m = moments(slacks);
  StageStatistics s;
  s.transition = t;
  s.n = m.n;
  s.mean_ps = m.mean;
  s.std_ps = m.std;
  s.skewness = m.skewness;
  s.excess_kurtosis = m.excess_kurtosis;
  s.min_ps = m.min;
  s.max_ps = m.max;
  s.histogram = histogram(slacks);
  return s;
}

StageStatistics stage_statistics(const SweepResult& sweep, Transition t) {
  const auto values = sweep.slacks(t);
  if (values.size() < 2) {
    throw Error(ErrorKind::kInsufficientSamples,
                std::string("fewer than two samples for ") + to_string(t));
  }
  return stage_statistics(values, t);
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  Correlation c;
  c.n = std::min(x.size(), y.size());
  if (c.n < 2) {
    c.r = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(c.n);
  my /= static_cast<double>(c.n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) {
    c.r = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  c.defined = true;
  return c;
}

SensitivityReport interconnect_sensitivity(const SweepResult& sweep) {
  struct Columns {
    std::vector<double> hops, congestion, routing;
  };
  Columns all;
  std::map<Transition, Columns> by;
  for (const PathSample& s : sweep.samples) {
    if (!s.hop_count) continue;
    for (Columns* c : {&all, &by[s.transition]}) {
      c->hops.push_back(*s.hop_count);
      c->congestion.push_back(s.congestion_mean);
      c->routing.push_back(s.decomposition.routing_ps);
    }
  }
  if (all.hops.size() < 2) {
    throw Error(ErrorKind::kInsufficientSamples, "fewer than two samples with hop metadata");
  }
  auto entry = [](const Columns& c) {
    return SensitivityEntry{pearson(c.hops, c.routing), pearson(c.congestion, c.routing)};
  };
  SensitivityReport report;
  report.overall = entry(all);
  for (const auto& [t, c] : by) report.by_transition[t] = entry(c);
  return report;
}

const char* to_string(VariabilityClass v) {
  return v == VariabilityClass::kTopological ? "topological" : "parametric";
}

const char* to_string(DistributionShape s) {
  switch (s) {
    case DistributionShape::kAsymmetric: return "asymmetric";
    case DistributionShape::kNearGaussian: return "near-gaussian";
    case DistributionShape::kIndeterminate: return "indeterminate";
  }
  return "";
}

std::optional<VariabilityClass> variability_from_string(std::string_view text) {
  for (auto v : {VariabilityClass::kTopological, VariabilityClass::kParametric}) {
    if (text == to_string(v)) return v;
  }
  return std::nullopt;
}

std::optional<DistributionShape> shape_from_string(std::string_view text) {
  for (auto s : {DistributionShape::kAsymmetric, DistributionShape::kNearGaussian,
                 DistributionShape::kIndeterminate}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

DistributionShape shape_of(double skewness) {
  const double a = std::abs(skewness);
  if (a > kAsymmetricSkewness) return DistributionShape::kAsymmetric;
  if (a <= kGaussianSkewness) return DistributionShape::kNearGaussian;
  return DistributionShape::kIndeterminate;
}

namespace {

SpreadSummary spread(const std::vector<double>& v) {
  const Moments m = moments(v);
  return {m.mean, m.std, m.min, m.max};
}

// Sample std of values after subtracting each group's own mean.
double group_centered_std(const std::vector<double>& values,
                          const std::vector<std::string>& group_of) {
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& [sum, n] = sums[group_of[i]];
    sum += values[i];
    ++n;
  }
  std::vector<double> centered;
  centered.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& [sum, n] = sums[group_of[i]];
    centered.push_back(values[i] - sum / static_cast<double>(n));
  }
  return moments(centered).std;
}

}  // namespace

FabricSignature fabric_signature(const SweepResult& sweep) {
  if (sweep.realizations.size() < 2) {
    throw Error(ErrorKind::kInsufficientSamples, "signature needs at least two realizations");
  }
  FabricSignature f;
  f.fabric = sweep.fabric;
  f.realizations = sweep.realizations.size();
  std::vector<double> fmax, routing, logic, clocking, routing_ps, logic_ps;
  std::vector<std::string> group_of;
  std::map<Transition, std::size_t> hosts;
  for (const auto& r : sweep.realizations) {
    fmax.push_back(r.fmax_mhz);
    routing_ps.push_back(r.worst_decomposition.routing_ps);
    logic_ps.push_back(r.worst_decomposition.logic_ps);
    group_of.push_back(r.group);
    routing.push_back(r.worst_decomposition.routing_fraction());
    logic.push_back(r.worst_decomposition.logic_fraction());
    clocking.push_back(r.worst_decomposition.clocking_fraction());
    ++hosts[r.worst_transition];
  }
  f.fmax_mhz = spread(fmax);
  f.routing_fraction = spread(routing);
  f.logic_fraction = spread(logic);
  f.clocking_fraction = spread(clocking);
  std::size_t best = 0;
  for (const auto& [t, count] : hosts) {
    if (count > best) {
      best = count;
      f.bottleneck = t;
    }
  }
  f.dominance = static_cast<double>(best) / static_cast<double>(sweep.realizations.size());
  f.routing_sigma_ps = group_centered_std(routing_ps, group_of);
  f.logic_sigma_ps = group_centered_std(logic_ps, group_of);
  f.variability = f.routing_sigma_ps > f.logic_sigma_ps ? VariabilityClass::kTopological
                                                        : VariabilityClass::kParametric;

  // Center each group (corner) separately so corner mean shifts do not
  // register as spread.
  const auto groups = sweep.groups();
  for (Transition t : kPipelineTransitions) {
    std::vector<double> centered;
    double levels = 0.0;
    for (const auto& group : groups) {
      std::vector<double> values;
      for (const PathSample& s : sweep.samples) {
        if (s.transition != t || sweep.realizations[s.realization].group != group) continue;
        values.push_back(s.setup_slack_ps);
        levels += s.logic_levels;
      }
      if (values.empty()) continue;
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      for (double v : values) centered.push_back(v - mean);
    }
    if (centered.size() < 2) {
      throw Error(ErrorKind::kInsufficientSamples,
                  std::string("fewer than two samples for ") + to_string(t));
    }
    const Moments m = moments(centered);
    TransitionSignature ts;
    ts.n = m.n;
    ts.sigma_ps = m.std;
    ts.skewness = m.skewness;
    ts.mean_logic_levels = levels / static_cast<double>(m.n);
    ts.shape = shape_of(m.skewness);
    f.transitions[t] = ts;
  }
  return f;
}

SignatureReport extract_signatures(const SweepResult& fpga, const SweepResult& asic) {
  SignatureReport report;
  report.fpga = fabric_signature(fpga);
  report.asic = fabric_signature(asic);
  double sum = 0.0;
  for (Transition t : kPipelineTransitions) {
    const auto& a = report.fpga.transitions.at(t);
    const auto& b = report.asic.transitions.at(t);
    const double num = a.sigma_ps / std::max(a.mean_logic_levels, 1.0);
    const double den = b.sigma_ps / std::max(b.mean_logic_levels, 1.0);
    const double ratio = den > 0 ? num / den : std::numeric_limits<double>::infinity();
    report.robustness_ratio[t] = ratio;
    sum += ratio;
  }
  report.mean_robustness_ratio = sum / static_cast<double>(kPipelineTransitions.size());
  return report;
}

}  // namespace stagesta
