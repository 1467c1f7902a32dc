#ifndef STAGESTA_STATS_ANALYSIS_HPP
#define STAGESTA_STATS_ANALYSIS_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stagesta/fabric_models.hpp"
#include "stagesta/sta_engine.hpp"

namespace stagesta {

inline constexpr std::size_t kDefaultPathsPerTransition = 10;

// One extracted path, reduced to the fields that survive the path-record
// interchange format. Every statistic below is computed from these alone, so
// imported sweeps and native sweeps analyze identically.
struct PathSample {
  std::size_t realization = 0;
  std::string launch_name;
  std::string capture_name;
  Transition transition = Transition::kIfId;
  PathClass path_class = PathClass::kRegToAlu;
  DelayDecomposition decomposition;
  double setup_slack_ps = 0.0;
  double hold_slack_ps = 0.0;
  int logic_levels = 0;
  std::optional<int> hop_count;
  double congestion_mean = 0.0;
  double clock_period_ps = 0.0;

  // Clock period consumed: T - setup slack.
  double consumption_ps() const { return clock_period_ps - setup_slack_ps; }
};

struct RealizationSummary {
  // Provenance label, e.g. "fpga:seed=3" or "asic:corner=SS:sample=12".
  std::string provenance;
  // Corner name for ASIC realizations, empty otherwise.
  std::string group;
  double fmax_mhz = 0.0;
  double worst_delay_ps = 0.0;
  Transition worst_transition = Transition::kIfId;
  DelayDecomposition worst_decomposition;
};

struct SweepResult {
  std::string fabric;
  std::size_t paths_per_transition = kDefaultPathsPerTransition;
  std::vector<RealizationSummary> realizations;
  // Sorted by (realization, transition, slack).
  std::vector<PathSample> samples;

  // Realizations of one group (corner), renumbered.
  SweepResult subset(const std::string& group) const;
  std::vector<std::string> groups() const;
  std::vector<double> fmax_values() const;
  std::vector<double> worst_delays() const;
  // Slack samples of one transition, in sample order.
  std::vector<double> slacks(Transition t) const;
};

// Worst sample (lowest slack, earliest on ties) decides the realization's
// Fmax, worst delay and worst transition.
RealizationSummary summarize_realization(std::string provenance, std::string group,
                                         std::span<const PathSample> samples);

// Worst paths of the `paths_per_transition` worst register pairs of every
// transition of one design.
std::vector<PathSample> sample_design(const RealizedDesign& design,
                                      std::size_t paths_per_transition);

// Realization-level parallelism; jobs == 0 picks the hardware concurrency.
// Results do not depend on the job count.
SweepResult seed_sweep(std::shared_ptr<const TimingGraph> graph, const FpgaFabricModel& model,
                       std::size_t n_seeds, std::size_t paths_per_transition,
                       std::size_t jobs = 0);

// One realization per (corner, sample); samples are 1..n, or a single
// deterministic realization per corner when n == 0. Sample i uses the same
// LVF draws at every corner.
SweepResult corner_sweep(std::shared_ptr<const TimingGraph> graph, const AsicFabricModel& model,
                         const std::vector<Corner>& corners, std::size_t n_samples,
                         std::size_t paths_per_transition, std::size_t jobs = 0);

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  // Unbiased (n - 1) standard deviation.
  double std = 0.0;
  // g1 and g2 from population central moments; 0 for constant data.
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Throws Error(kInsufficientSamples) for fewer than two values.
Moments moments(std::span<const double> values);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

// Freedman-Diaconis bin width 2 IQR n^(-1/3); 10 equal bins when the IQR is
// zero and one bin when all values coincide. Quartiles by linear
// interpolation between order statistics.
Histogram histogram(std::span<const double> values);

struct StageStatistics {
  Transition transition = Transition::kIfId;
  std::size_t n = 0;
  double mean_ps = 0.0;
  double std_ps = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double min_ps = 0.0;
  double max_ps = 0.0;
  Histogram histogram;
};

StageStatistics stage_statistics(std::span<const double> slacks, Transition t);
// Throws Error(kInsufficientSamples) when the transition has < 2 samples.
StageStatistics stage_statistics(const SweepResult& sweep, Transition t);

struct Correlation {
  std::size_t n = 0;
  // NaN when either variable has zero variance.
  double r = 0.0;
  bool defined = false;
};

Correlation pearson(std::span<const double> x, std::span<const double> y);

struct SensitivityEntry {
  Correlation hops_vs_routing;
  Correlation congestion_vs_routing;
};

struct SensitivityReport {
  SensitivityEntry overall;
  std::map<Transition, SensitivityEntry> by_transition;
};

// Throws Error(kInsufficientSamples) unless at least two samples carry hops.
SensitivityReport interconnect_sensitivity(const SweepResult& sweep);

enum class VariabilityClass { kTopological, kParametric };
enum class DistributionShape { kAsymmetric, kNearGaussian, kIndeterminate };

const char* to_string(VariabilityClass v);
const char* to_string(DistributionShape s);
std::optional<VariabilityClass> variability_from_string(std::string_view text);
std::optional<DistributionShape> shape_from_string(std::string_view text);

inline constexpr double kAsymmetricSkewness = 0.3;
inline constexpr double kGaussianSkewness = 0.2;

DistributionShape shape_of(double skewness);

struct SpreadSummary {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct TransitionSignature {
  std::size_t n = 0;
  // Moments of slack samples centered within their group (corner).
  double sigma_ps = 0.0;
  double skewness = 0.0;
  double mean_logic_levels = 0.0;
  DistributionShape shape = DistributionShape::kIndeterminate;
};

struct FabricSignature {
  std::string fabric;
  std::size_t realizations = 0;
  SpreadSummary fmax_mhz;
  SpreadSummary routing_fraction;
  SpreadSummary logic_fraction;
  SpreadSummary clocking_fraction;
  // Spread of the worst path's routing and logic delay across realizations,
  // centered within each group; the larger one names the variability class.
  double routing_sigma_ps = 0.0;
  double logic_sigma_ps = 0.0;
  Transition bottleneck = Transition::kExMem;
  double dominance = 0.0;
  VariabilityClass variability = VariabilityClass::kParametric;
  std::map<Transition, TransitionSignature> transitions;
};

struct SignatureReport {
  FabricSignature fpga;
  FabricSignature asic;
  // (sigma_fpga / levels_fpga) / (sigma_asic / levels_asic) per transition.
  std::map<Transition, double> robustness_ratio;
  double mean_robustness_ratio = 0.0;
};

// Throws Error(kInsufficientSamples) for fewer than two realizations or
// a pipeline transition with fewer than two samples.
FabricSignature fabric_signature(const SweepResult& sweep);
SignatureReport extract_signatures(const SweepResult& fpga, const SweepResult& asic);

}  // namespace stagesta

#endif  // STAGESTA_STATS_ANALYSIS_HPP
