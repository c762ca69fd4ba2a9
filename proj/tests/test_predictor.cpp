#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "perfmod/errors.hpp"
#include "perfmod/predictor.hpp"

using namespace perfmod;
namespace fs = std::filesystem;

namespace {

const MachineProfile kProfile{"demo", 1e10, 4, 1e-9};

struct TempRepo {
  fs::path path;
  TempRepo() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("perfmod-pred-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempRepo() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

// One-cell model over `domain` with given basis and median coefficients;
// q05/q95 scaled from the median by 0.9 / 1.1.
ModelRecord make_record(const std::string& kernel, const FlagBinding& binding,
                        const Domain& domain, const std::string& basis,
                        const std::vector<double>& median_coeffs) {
  ModelRecord rec;
  rec.key = {kernel, binding, kProfile.id, 1};
  rec.metadata.strategy = "external";
  Cell cell;
  cell.bounds = domain;
  cell.model.basis = parse_basis(basis);
  std::vector<double> lo = median_coeffs, hi = median_coeffs;
  for (double& v : lo) v *= 0.9;
  for (double& v : hi) v *= 1.1;
  cell.model.coefficients = {{median_coeffs, lo, hi}};
  rec.model.domain = domain;
  rec.model.cells = {cell};
  rec.model.strategy = "external";
  return rec;
}

FlagBinding tri(const std::string& side) {
  return {{"side", side}, {"uplo", "L"}, {"transa", "N"}, {"diag", "N"}};
}

// Fill the repo with models for every context a trinv trace can touch.
void seed_trinv_models(const std::string& repo) {
  Domain d1{{"n", {1, 4096}}};
  Domain d2{{"m", {1, 4096}}, {"n", {1, 4096}}};
  Domain d3{{"k", {1, 4096}}, {"m", {1, 4096}}, {"n", {1, 4096}}};
  store(make_record("TRTRI", {{"uplo", "L"}, {"diag", "N"}}, d1, "n^3", {1e-9}), repo);
  store(make_record("TRMM", tri("L"), d2, "m*n^2", {2e-9}), repo);
  store(make_record("TRMM", tri("R"), d2, "m^2*n", {2e-9}), repo);
  store(make_record("TRSM", tri("L"), d2, "m*n^2", {3e-9}), repo);
  store(make_record("GEMM", {{"transa", "N"}, {"transb", "N"}}, d3, "k*m*n", {2e-9}),
        repo);
}

// Independent truth accumulation for the models seeded above.
double trinv_truth_median(const AlgorithmTrace& trace) {
  double total = 0;
  for (const KernelCall& c : trace.calls) {
    auto sz = [&](const char* k) { return static_cast<double>(c.sizes.at(k)); };
    if (c.kernel == "TRTRI") {
      total += 1e-9 * std::pow(sz("n"), 3);
    } else if (c.kernel == "TRMM" && c.binding.at("side") == "L") {
      total += 2e-9 * sz("m") * sz("n") * sz("n");
    } else if (c.kernel == "TRMM") {
      total += 2e-9 * sz("m") * sz("m") * sz("n");
    } else if (c.kernel == "TRSM") {
      total += 3e-9 * sz("m") * sz("n") * sz("n");
    } else {
      total += 2e-9 * sz("m") * sz("n") * sz("k");
    }
  }
  return total;
}

}  // namespace

TEST_CASE("evaluate_model inside the domain") {
  ModelRecord rec = make_record("TRTRI", {{"uplo", "L"}, {"diag", "N"}},
                                {{"n", {16, 1024}}}, "n^3", {1e-9});
  ModelEval e = evaluate_model(rec, {{"n", 100}}, kProfile);
  CHECK(e.median == doctest::Approx(1e-3));
  CHECK(e.low == doctest::Approx(0.9e-3));
  CHECK(e.high == doctest::Approx(1.1e-3));
  CHECK_FALSE(e.extrapolated);
  CHECK_FALSE(e.range_repaired);
  CHECK_FALSE(e.floor_clamped);
}

TEST_CASE("evaluate_model clamps points outside the domain and flags them") {
  ModelRecord rec = make_record("TRTRI", {{"uplo", "L"}, {"diag", "N"}},
                                {{"n", {16, 1024}}}, "n^3", {1e-9});
  ModelEval above = evaluate_model(rec, {{"n", 5000}}, kProfile);
  CHECK(above.extrapolated);
  // outside the box the model still evaluates at the true coordinates
  CHECK(above.median == doctest::Approx(1e-9 * 5000.0 * 5000.0 * 5000.0));
  ModelEval below = evaluate_model(rec, {{"n", 2}}, kProfile);
  CHECK(below.extrapolated);
}

TEST_CASE("evaluate_model repairs inverted quantile fits") {
  ModelRecord rec = make_record("TRTRI", {{"uplo", "L"}, {"diag", "N"}},
                                {{"n", {1, 100}}}, "n", {1e-3});
  // force q05 > q95
  std::swap(rec.model.cells[0].model.coefficients[static_cast<int>(Stat::Q05)],
            rec.model.cells[0].model.coefficients[static_cast<int>(Stat::Q95)]);
  ModelEval e = evaluate_model(rec, {{"n", 10}}, kProfile);
  CHECK(e.range_repaired);
  CHECK(e.low <= e.median);
  CHECK(e.median <= e.high);
}

TEST_CASE("evaluate_model lifts sub-floor predictions") {
  MachineProfile coarse{"demo", 1e10, 4, 1e-3};
  ModelRecord rec = make_record("TRTRI", {{"uplo", "L"}, {"diag", "N"}},
                                {{"n", {1, 100}}}, "n", {1e-9});
  ModelEval e = evaluate_model(rec, {{"n", 10}}, coarse);
  CHECK(e.floor_clamped);
  CHECK(e.low == 1e-3);
  CHECK(e.median == 1e-3);
  CHECK(e.high == 1e-3);
}

TEST_CASE("end-to-end prediction matches the truth accumulation") {
  TempRepo repo;
  seed_trinv_models(repo.str());
  KernelRegistry reg = KernelRegistry::builtin();
  for (int v = 1; v <= 4; ++v) {
    AlgorithmTrace trace = trace_trinv(v, 256, 32);
    Prediction p = predict(trace, repo.str(), reg, kProfile, 1);
    double truth = trinv_truth_median(trace);
    CHECK(std::abs(p.total_median - truth) / truth < 1e-12);
    CHECK(p.total_low < p.total_median);
    CHECK(p.total_median < p.total_high);
    CHECK(p.total_flops_exact == Rational(256LL * 256 * 256, 3));
    CHECK(p.efficiency ==
          doctest::Approx(p.total_flops / (p.total_median * kProfile.peak_flops_per_core)));
    CHECK_FALSE(p.any_extrapolated);
  }
}

TEST_CASE("totals equal the sum of the breakdown exactly") {
  TempRepo repo;
  seed_trinv_models(repo.str());
  KernelRegistry reg = KernelRegistry::builtin();
  Prediction p = predict(trace_trinv(3, 333, 64), repo.str(), reg, kProfile, 1);
  double med = 0, lo = 0, hi = 0;
  for (const CallEstimate& e : p.breakdown) {
    med += e.eval.median;
    lo += e.eval.low;
    hi += e.eval.high;
  }
  CHECK(p.total_median == med);
  CHECK(p.total_low == lo);
  CHECK(p.total_high == hi);
  CHECK(p.breakdown.size() == trace_trinv(3, 333, 64).calls.size());
}

TEST_CASE("prediction depends only on the multiset of calls") {
  TempRepo repo;
  seed_trinv_models(repo.str());
  KernelRegistry reg = KernelRegistry::builtin();
  AlgorithmTrace trace = trace_trinv(1, 512, 96);
  Prediction forward = predict(trace, repo.str(), reg, kProfile, 1);
  std::reverse(trace.calls.begin(), trace.calls.end());
  Prediction backward = predict(trace, repo.str(), reg, kProfile, 1);
  CHECK(backward.total_median ==
        doctest::Approx(forward.total_median).epsilon(1e-14));
  CHECK(backward.total_low == doctest::Approx(forward.total_low).epsilon(1e-14));
  CHECK(backward.total_high == doctest::Approx(forward.total_high).epsilon(1e-14));
  CHECK(backward.total_flops_exact == forward.total_flops_exact);
}

TEST_CASE("scaling every coefficient by two doubles the prediction exactly") {
  TempRepo base, scaled;
  seed_trinv_models(base.str());
  // same models with all coefficients doubled
  for (const ModelListing& m : list_models(base.str())) {
    ModelRecord rec = lookup(m.key, base.str());
    for (Cell& c : rec.model.cells)
      for (auto& stat : c.model.coefficients)
        for (double& v : stat) v *= 2.0;
    store(rec, scaled.str());
  }
  KernelRegistry reg = KernelRegistry::builtin();
  AlgorithmTrace trace = trace_trinv(2, 200, 50);
  Prediction p1 = predict(trace, base.str(), reg, kProfile, 1);
  Prediction p2 = predict(trace, scaled.str(), reg, kProfile, 1);
  CHECK(p2.total_median == 2.0 * p1.total_median);
  CHECK(p2.total_low == 2.0 * p1.total_low);
  CHECK(p2.total_high == 2.0 * p1.total_high);
}

TEST_CASE("missing models list every absent key") {
  TempRepo repo;  // empty
  KernelRegistry reg = KernelRegistry::builtin();
  AlgorithmTrace trace = trace_trinv(1, 64, 16);
  try {
    predict(trace, repo.str(), reg, kProfile, 1);
    FAIL("expected MissingModelError");
  } catch (const MissingModelError& e) {
    // variant 1 touches TRTRI, TRMM-R, TRSM-L: three distinct contexts
    CHECK(e.missing_keys.size() == 3);
  }
}

TEST_CASE("allow_missing skips absent contexts and flags the prediction") {
  TempRepo repo;
  Domain d1{{"n", {1, 4096}}};
  store(make_record("TRTRI", {{"uplo", "L"}, {"diag", "N"}}, d1, "n^3", {1e-9}),
        repo.str());
  KernelRegistry reg = KernelRegistry::builtin();
  AlgorithmTrace trace = trace_trinv(1, 64, 16);
  Prediction p = predict(trace, repo.str(), reg, kProfile, 1, /*allow_missing=*/true);
  CHECK(p.any_model_missing);
  CHECK(p.skipped_keys.size() == 2);  // TRMM-R and TRSM-L
  // only the TRTRI calls contribute
  for (const CallEstimate& e : p.breakdown) CHECK(e.call.kernel == "TRTRI");
}

TEST_CASE("out-of-domain calls mark the whole prediction extrapolated") {
  TempRepo repo;
  Domain small{{"n", {1, 8}}};
  store(make_record("TRTRI", {{"uplo", "L"}, {"diag", "N"}}, small, "n^3", {1e-9}),
        repo.str());
  KernelRegistry reg = KernelRegistry::builtin();
  Prediction p = predict(trace_trinv(1, 32, 32), repo.str(), reg, kProfile, 1);
  CHECK(p.any_extrapolated);
}

TEST_CASE("prediction JSON export is deterministic and complete") {
  TempRepo repo;
  seed_trinv_models(repo.str());
  KernelRegistry reg = KernelRegistry::builtin();
  Prediction p = predict(trace_trinv(4, 96, 32), repo.str(), reg, kProfile, 1);
  std::ostringstream a, b;
  export_prediction_json(p, a);
  export_prediction_json(p, b);
  CHECK(a.str() == b.str());
  for (const char* key : {"total_median_s", "flops_exact", "efficiency", "breakdown"})
    CHECK(a.str().find(key) != std::string::npos);
}
