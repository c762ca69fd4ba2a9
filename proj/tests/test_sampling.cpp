#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "perfmod/errors.hpp"
#include "perfmod/sampling.hpp"

using namespace perfmod;

namespace {

const MachineProfile kProfile{"demo", 1e10, 4, 1e-9};

SamplingJob trtri_job(const std::string& grid, int reps = 3) {
  SamplingJob job;
  job.kernel = "TRTRI";
  job.binding = {{"uplo", "L"}, {"diag", "N"}};
  job.grid = GridSpec::parse(grid);
  job.repetitions = reps;
  job.machine = "demo";
  return job;
}

double cube_truth(const Point& p) {
  double n = static_cast<double>(p.at("n"));
  return 1e-9 * n * n * n;
}

}  // namespace

TEST_CASE("quantile ordering holds for arbitrary raw times") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> raw(3 + trial % 40);
    for (double& v : raw) v = d(rng);
    SampleStats s = compute_stats(raw);
    double max = *std::max_element(raw.begin(), raw.end());
    CHECK(s.min <= s.q05);
    CHECK(s.q05 <= s.median);
    CHECK(s.median <= s.q95);
    CHECK(s.q95 <= max);
  }
}

TEST_CASE("zero-noise job medians equal the truth exactly") {
  SyntheticExecutor ex(cube_truth);
  KernelRegistry reg = KernelRegistry::builtin();
  SampleSet set = run_job(trtri_job("n=10,20,30"), ex, reg, kProfile);
  REQUIRE(set.samples.size() == 3);
  for (const Sample& s : set.samples)
    CHECK(s.stats.median == cube_truth(s.point));
}

TEST_CASE("noiseless single-point median example") {
  SyntheticExecutor ex(cube_truth);
  KernelRegistry reg = KernelRegistry::builtin();
  SampleSet set = run_job(trtri_job("n=10"), ex, reg, kProfile);
  CHECK(set.samples.at(0).stats.median == doctest::Approx(1e-6));
}

TEST_CASE("noisy median converges to the truth") {
  // sigma=0.05 multiplicative, 50 reps, seed fixed; median within 2%
  SyntheticExecutor ex(cube_truth, NoiseModel::gaussian(0.05), 42);
  KernelRegistry reg = KernelRegistry::builtin();
  SampleSet set = run_job(trtri_job("n=100", 50), ex, reg, kProfile);
  double truth = 1e-9 * 100 * 100 * 100;
  CHECK(std::abs(set.samples.at(0).stats.median - truth) / truth < 0.02);
}

TEST_CASE("synthetic execution is deterministic for a fixed seed") {
  auto run = [] {
    SyntheticExecutor ex(cube_truth, NoiseModel::gaussian(0.1), 1234);
    return ex.measure("TRTRI", {}, {{"n", 50}}, 8, 1);
  };
  CHECK(run() == run());
}

TEST_CASE("synthetic_execute evaluates and clamps") {
  std::mt19937_64 rng(0);
  TruthFunction affine = [](const Point& p) { return 2.0 + 3.0 * p.at("n"); };
  bool clamped = true;
  CHECK(synthetic_execute(affine, {{"n", 4}}, NoiseModel::none(), rng, &clamped) == 14.0);
  CHECK_FALSE(clamped);
  // additive noise fixed at -20 drives the duration negative
  CHECK(synthetic_execute(affine, {{"n", 4}}, NoiseModel::uniform(-20, -20), rng,
                          &clamped) == 0.0);
  CHECK(clamped);
}

TEST_CASE("executor failure aborts the job naming the point, earlier samples kept") {
  struct Failing : Executor {
    std::vector<double> measure(const std::string&, const FlagBinding&, const Point& p,
                                int count, int) override {
      if (p.at("n") == 200) throw IoError("device lost");
      return std::vector<double>(count, 1e-3);
    }
    std::string id() const override { return "failing"; }
  } ex;
  KernelRegistry reg = KernelRegistry::builtin();
  try {
    run_job(trtri_job("n=100,200"), ex, reg, kProfile);
    FAIL("expected JobError");
  } catch (const JobError& e) {
    CHECK(e.failed_point == Point{{"n", 200}});
    CHECK(std::string(e.what()).find("n=200") != std::string::npos);
    REQUIRE(e.partial_results.samples.size() == 1);
    CHECK(e.partial_results.samples[0].point == Point{{"n", 100}});
  }
}

TEST_CASE("durations below timer_floor are lifted and flagged") {
  SyntheticExecutor ex([](const Point&) { return 1e-12; });
  KernelRegistry reg = KernelRegistry::builtin();
  SampleSet set = run_job(trtri_job("n=10"), ex, reg, kProfile);
  CHECK(set.samples[0].stats.median == kProfile.timer_floor);
  REQUIRE(set.samples[0].flags.size() == 1);
  CHECK(set.samples[0].flags[0] == "timer_floor_clamped");
}

TEST_CASE("warm-up measurements are discarded") {
  struct Counting : Executor {
    int n = 0;
    std::vector<double> measure(const std::string&, const FlagBinding&, const Point&,
                                int count, int) override {
      std::vector<double> out;
      for (int i = 0; i < count; ++i) out.push_back(++n * 1e-3);
      return out;
    }
    std::string id() const override { return "counting"; }
  } ex;
  KernelRegistry reg = KernelRegistry::builtin();
  SamplingJob job = trtri_job("n=10");
  job.warmup = 2;
  SampleSet set = run_job(job, ex, reg, kProfile);
  // first two durations (1ms, 2ms) dropped
  CHECK(set.samples[0].raw_times == std::vector<double>{3e-3, 4e-3, 5e-3});
}

TEST_CASE("CSV round trip preserves the sample set") {
  SyntheticExecutor ex(cube_truth, NoiseModel::gaussian(0.03), 99);
  KernelRegistry reg = KernelRegistry::builtin();
  SamplingJob job;
  job.kernel = "GEMM";
  job.binding = {{"transa", "N"}, {"transb", "T"}};
  job.grid = GridSpec::parse("m=8,16;n=log:4:64:3;k=32");
  job.repetitions = 5;
  job.machine = "demo";
  // the cube truth only reads n; fine for round-trip purposes
  SampleSet original = run_job(job, ex, reg, kProfile);

  std::ostringstream out;
  export_csv(original, out);
  std::istringstream in(out.str());
  std::vector<std::string> warnings;
  SampleSet back = ingest_csv(in, "<mem>", &warnings);

  CHECK(warnings.empty());
  CHECK(back.context == original.context);
  REQUIRE(back.samples.size() == original.samples.size());
  for (size_t i = 0; i < back.samples.size(); ++i) {
    CHECK(back.samples[i].point == original.samples[i].point);
    CHECK(back.samples[i].raw_times == original.samples[i].raw_times);
    CHECK(back.samples[i].stats.median == original.samples[i].stats.median);
  }
  // second round trip is byte identical
  std::ostringstream out2;
  export_csv(back, out2);
  CHECK(out2.str() == out.str());
}

TEST_CASE("ingest recomputes stats and warns when stored medians disagree") {
  std::string csv =
      "# kernel=TRTRI\n# flags=diag=N,uplo=L\n# machine=demo\n# threads=1\n"
      "n,rep,seconds\n"
      "10,1,0.001\n10,2,0.002\n10,3,0.003\n"
      "# summary n=10 median=0.5\n";
  std::istringstream in(csv);
  std::vector<std::string> warnings;
  SampleSet set = ingest_csv(in, "<mem>", &warnings);
  CHECK(set.samples[0].stats.median == doctest::Approx(0.002));
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("disagrees") != std::string::npos);
}

TEST_CASE("ingest errors") {
  SUBCASE("missing context header") {
    std::istringstream in("n,rep,seconds\n10,1,0.1\n");
    CHECK_THROWS_WITH_AS(ingest_csv(in, "<mem>", nullptr),
                         doctest::Contains("missing context header"), InputError);
  }
  SUBCASE("malformed row names the line") {
    std::istringstream in(
        "# kernel=TRTRI\n# flags=\n# machine=m\n# threads=1\n"
        "n,rep,seconds\n10,1,abc\n");
    CHECK_THROWS_WITH_AS(ingest_csv(in, "<mem>", nullptr), doctest::Contains("<mem>:6"),
                         InputError);
  }
}

TEST_CASE("job validation") {
  SyntheticExecutor ex(cube_truth);
  KernelRegistry reg = KernelRegistry::builtin();
  CHECK_THROWS_AS(run_job(trtri_job("n=10", 2), ex, reg, kProfile), InputError);
  SamplingJob job = trtri_job("n=10");
  job.kernel = "NOPE";
  CHECK_THROWS_AS(run_job(job, ex, reg, kProfile), InputError);
}
