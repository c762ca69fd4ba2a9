#ifndef PERFMOD_MODELER_HPP_
#define PERFMOD_MODELER_HPP_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "perfmod/piecewise.hpp"
#include "perfmod/sampling.hpp"

namespace perfmod {

// On-demand measurement source for the model-generation strategies.
// Implementations must return samples with valid stats; repeated calls at
// the same point may re-measure.
class SamplingOracle {
public:
  virtual ~SamplingOracle() = default;
  virtual Sample sample_at(const Point& point) = 0;
  // Total raw durations obtained so far (including warm-up).
  virtual size_t samples_drawn() const = 0;
};

// Drives an Executor with the same per-point policy as run_job
// (warm-up discard, timer-floor clamping).
class ExecutorOracle : public SamplingOracle {
public:
  ExecutorOracle(Executor& executor, std::string kernel, FlagBinding binding,
                 int threads, int repetitions, int warmup, double timer_floor);
  Sample sample_at(const Point& point) override;
  size_t samples_drawn() const override { return drawn_; }

private:
  Executor& executor_;
  std::string kernel_;
  FlagBinding binding_;
  int threads_, repetitions_, warmup_;
  double timer_floor_;
  size_t drawn_{0};
};

struct ExpansionConfig {
  double eps{0.05};
  int max_terms{12};
  int initial_points{24};
  std::vector<BasisTerm> pool;  // empty = default term_pool over the domain axes
  int max_resamples{3};         // training-set doublings before giving up
};

struct RefinementConfig {
  double eps{0.05};
  std::vector<BasisTerm> fixed_basis;  // empty = default term_pool, degree <= 3
  long long min_cell_width{16};
  int max_cells{64};
  std::vector<std::string> axis_order;  // split tie-break; empty = sorted names
};

// Greedy forward selection of basis terms on a single cell; the
// sample-frugal strategy.
PiecewiseModel model_expansion(const Domain& domain, SamplingOracle& oracle,
                               const ExpansionConfig& config);

// Recursive axis-aligned cell splitting with a fixed per-cell basis; the
// accuracy-favoring strategy.
PiecewiseModel adaptive_refinement(const Domain& domain, SamplingOracle& oracle,
                                   const RefinementConfig& config);

struct StrategyResult {
  std::string strategy;
  bool ran{false};
  std::string error;  // set when the strategy failed
  size_t samples_drawn{0};
  double build_seconds{0};
  double heldout_max_rel_err{0};
  double heldout_mean_rel_err{0};
  int cell_count{0};
  int term_count{0};
  bool below_target_accuracy{false};
};

struct ComparisonReport {
  StrategyResult expansion;
  StrategyResult refinement;
  // Deterministic: excludes wall-clock build time (that lives in to_text).
  std::string to_csv() const;
  std::string to_text() const;
};

using OracleFactory = std::function<std::unique_ptr<SamplingOracle>()>;

// Runs both strategies against fresh oracles and scores them on a common
// held-out log grid (heldout_per_axis points per axis, offset from the
// canonical training grids).
ComparisonReport compare_strategies(const Domain& domain, const OracleFactory& oracles,
                                    const ExpansionConfig& expansion_config,
                                    const RefinementConfig& refinement_config,
                                    int heldout_per_axis = 5);

// Distinct integers in [lo, hi], geometrically spaced; densified until
// `count` points exist or the interval is exhausted.
std::vector<long long> distinct_log_points(long long lo, long long hi, int count);

// The odd-index half of a doubled log grid; disjoint from
// distinct_log_points(lo, hi, count) in typical ranges.
std::vector<long long> offset_log_points(long long lo, long long hi, int count);

// Cross-product log grid over `domain` with at least `target_total` points
// (phase 0) or the offset counterpart (phase 1).
std::vector<Point> cross_log_grid(const Domain& domain, int target_total, int phase);

}  // namespace perfmod

#endif  // PERFMOD_MODELER_HPP_
