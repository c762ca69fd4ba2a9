#ifndef PERFMOD_PREDICTOR_HPP_
#define PERFMOD_PREDICTOR_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "perfmod/repository.hpp"
#include "perfmod/traces.hpp"

namespace perfmod {

struct ModelEval {
  double low{0}, median{0}, high{0};  // seconds
  bool extrapolated{false};
  bool range_repaired{false};   // q05 > q95 after independent fits; swapped
  bool floor_clamped{false};    // lifted to the machine timer_floor
};

// Evaluates the three statistic polynomials of the cell containing `sizes`
// (nearest cell when outside the domain, flagged extrapolated).
ModelEval evaluate_model(const ModelRecord& record, const Point& sizes,
                         const MachineProfile& profile);

struct CallEstimate {
  KernelCall call;
  ModelEval eval;
  double flops{0};
};

struct Prediction {
  double total_median{0}, total_low{0}, total_high{0};  // seconds
  std::vector<CallEstimate> breakdown;
  double total_flops{0};
  Rational total_flops_exact{0};
  double efficiency{0};
  bool any_extrapolated{false};
  bool any_range_repaired{false};
  bool any_model_missing{false};  // allow_missing only
  std::vector<std::string> skipped_keys;
};

// Looks up and evaluates a model per call; ranges accumulate additively
// (sum of q05s / sum of q95s). Without allow_missing, any absent model
// raises MissingModelError listing every missing key.
Prediction predict(const AlgorithmTrace& trace, const std::string& repo_root,
                   const KernelRegistry& registry, const MachineProfile& profile,
                   int threads, bool allow_missing = false);

void export_prediction_json(const Prediction& prediction, std::ostream& out);

}  // namespace perfmod

#endif  // PERFMOD_PREDICTOR_HPP_
