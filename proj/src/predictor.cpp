#include "perfmod/predictor.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "perfmod/errors.hpp"

namespace perfmod {

ModelEval evaluate_model(const ModelRecord& record, const Point& sizes,
                         const MachineProfile& profile) {
  ModelEval e;
  const Cell& cell = record.model.locate(sizes, &e.extrapolated);
  e.median = cell.model.eval(Stat::Median, sizes);
  e.low = cell.model.eval(Stat::Q05, sizes);
  e.high = cell.model.eval(Stat::Q95, sizes);
  if (e.low > e.high) {
    std::swap(e.low, e.high);
    e.range_repaired = true;
  }
  for (double* v : {&e.low, &e.median, &e.high})
    if (*v < profile.timer_floor) {
      *v = profile.timer_floor;
      e.floor_clamped = true;
    }
  // additive accumulation needs low <= median <= high per call
  e.median = std::clamp(e.median, e.low, e.high);
  return e;
}

Prediction predict(const AlgorithmTrace& trace, const std::string& repo_root,
                   const KernelRegistry& registry, const MachineProfile& profile,
                   int threads, bool allow_missing) {
  // one lookup per distinct (kernel, flags) context
  std::map<std::string, ModelRecord> records;
  std::set<std::string> missing;
  for (const KernelCall& call : trace.calls) {
    ModelKey key{call.kernel, call.binding, profile.id, threads};
    std::string ks = key.to_string();
    if (records.count(ks) || missing.count(ks)) continue;
    try {
      records.emplace(ks, lookup(key, repo_root));
    } catch (const MissingModelError&) {
      missing.insert(ks);
    }
  }
  if (!missing.empty() && !allow_missing) {
    std::string msg = "missing models:";
    for (const auto& k : missing) msg += " " + k;
    throw MissingModelError(msg, {missing.begin(), missing.end()});
  }

  Prediction pred;
  for (const KernelCall& call : trace.calls) {
    ModelKey key{call.kernel, call.binding, profile.id, threads};
    std::string ks = key.to_string();
    Rational call_flops = flops(registry.get(call.kernel), call.binding, call.sizes);
    auto it = records.find(ks);
    if (it == records.end()) {
      pred.any_model_missing = true;
      if (!std::count(pred.skipped_keys.begin(), pred.skipped_keys.end(), ks))
        pred.skipped_keys.push_back(ks);
      continue;
    }
    CallEstimate est;
    est.call = call;
    est.eval = evaluate_model(it->second, call.sizes, profile);
    est.flops = call_flops.to_double();
    pred.total_median += est.eval.median;
    pred.total_low += est.eval.low;
    pred.total_high += est.eval.high;
    pred.total_flops_exact += call_flops;
    pred.any_extrapolated |= est.eval.extrapolated;
    pred.any_range_repaired |= est.eval.range_repaired;
    pred.breakdown.push_back(std::move(est));
  }
  pred.total_flops = pred.total_flops_exact.to_double();
  if (pred.total_median > 0)
    pred.efficiency = efficiency(pred.total_median, pred.total_flops, profile, threads);
  return pred;
}

void export_prediction_json(const Prediction& p, std::ostream& out) {
  nlohmann::ordered_json j;
  j["total_median_s"] = p.total_median;
  j["total_low_s"] = p.total_low;
  j["total_high_s"] = p.total_high;
  j["total_flops"] = p.total_flops;
  j["flops_exact"] = p.total_flops_exact.str();
  j["efficiency"] = p.efficiency;
  j["flags"] = {{"extrapolated", p.any_extrapolated},
                {"range_repaired", p.any_range_repaired},
                {"model_missing", p.any_model_missing}};
  j["skipped_keys"] = p.skipped_keys;
  nlohmann::ordered_json calls = nlohmann::ordered_json::array();
  for (const CallEstimate& e : p.breakdown) {
    calls.push_back({{"kernel", e.call.kernel},
                     {"flags", flag_string(e.call.binding)},
                     {"sizes", point_string(e.call.sizes)},
                     {"median_s", e.eval.median},
                     {"low_s", e.eval.low},
                     {"high_s", e.eval.high},
                     {"flops", e.flops},
                     {"extrapolated", e.eval.extrapolated}});
  }
  j["breakdown"] = calls;
  out << j.dump(2) << "\n";
}

}  // namespace perfmod
