#ifndef PERFMOD_SAMPLING_HPP_
#define PERFMOD_SAMPLING_HPP_

#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "perfmod/grid.hpp"
#include "perfmod/kernels.hpp"

namespace perfmod {

struct SampleStats {
  double min{0}, median{0}, mean{0}, stddev{0}, q05{0}, q95{0};
};

// Raw times with derived statistics; stats are always recomputable from
// raw_times.
struct Sample {
  Point point;
  std::vector<double> raw_times;  // seconds, post warm-up
  SampleStats stats;
  std::vector<std::string> flags;  // e.g. "timer_floor_clamped", "clamped_zero"

  void recompute_stats();
};

SampleStats compute_stats(const std::vector<double>& raw_times);

struct SampleContext {
  std::string kernel;
  FlagBinding binding;
  std::string machine;
  int threads{1};

  bool operator==(const SampleContext&) const = default;
};

struct SampleSet {
  SampleContext context;
  std::vector<Sample> samples;
  std::string executor_id;
  std::string timestamp;  // ISO-8601, empty in deterministic contexts
};

struct SamplingJob {
  std::string kernel;
  FlagBinding binding;
  int threads{1};
  GridSpec grid;
  int repetitions{10};  // >= 3
  int warmup{1};        // discarded leading measurements per point
  std::string machine;
  std::string executor_id;
};

struct NoiseModel {
  enum class Kind { None, GaussianMultiplicative, UniformAdditive };
  Kind kind{Kind::None};
  double sigma{0};           // gaussian multiplicative
  double lo{0}, hi{0};       // uniform additive, seconds

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma);
  static NoiseModel uniform(double lo, double hi);
};

// Truth function: seconds as a function of the size point.
using TruthFunction = std::function<double(const Point&)>;

// One synthetic duration: truth(point) perturbed by the noise model.
// Negative results clamp to 0 and set *clamped.
double synthetic_execute(const TruthFunction& truth, const Point& point,
                         const NoiseModel& noise, std::mt19937_64& rng,
                         bool* clamped = nullptr);

// Produces raw durations for one point. Implementations must be invoked
// sequentially within a job (timing integrity).
class Executor {
public:
  virtual ~Executor() = default;
  virtual std::vector<double> measure(const std::string& kernel,
                                      const FlagBinding& binding,
                                      const Point& point, int count,
                                      int threads) = 0;
  virtual std::string id() const = 0;
};

class SyntheticExecutor : public Executor {
public:
  SyntheticExecutor(TruthFunction truth, NoiseModel noise = NoiseModel::none(),
                    uint64_t seed = 0, std::string id = "synthetic");
  std::vector<double> measure(const std::string& kernel, const FlagBinding& binding,
                              const Point& point, int count, int threads) override;
  std::string id() const override { return id_; }
  size_t calls() const { return calls_; }

private:
  TruthFunction truth_;
  NoiseModel noise_;
  std::mt19937_64 rng_;
  std::string id_;
  size_t calls_{0};
};

// Invokes an external command with a job-file path argument and reads
// whitespace-separated durations from its stdout. Nonzero exit = failure.
class CommandExecutor : public Executor {
public:
  explicit CommandExecutor(std::string command, std::string workdir = "");
  std::vector<double> measure(const std::string& kernel, const FlagBinding& binding,
                              const Point& point, int count, int threads) override;
  std::string id() const override { return "cmd:" + command_; }

private:
  std::string command_;
  std::string workdir_;
};

// Thrown when an executor fails mid-job; carries what was measured so far.
class JobError : public std::runtime_error {
public:
  JobError(const std::string& msg, Point point, SampleSet partial)
      : std::runtime_error(msg), failed_point(std::move(point)),
        partial_results(std::move(partial)) {}
  Point failed_point;
  SampleSet partial_results;
};

// Measures every grid point in declared order; warm-up measurements are
// discarded, durations below timer_floor clamp up and flag the sample.
SampleSet run_job(const SamplingJob& job, Executor& executor,
                  const KernelRegistry& registry, const MachineProfile& profile);

// Sample CSV (see README): context header lines, then size columns + rep + seconds.
void export_csv(const SampleSet& set, std::ostream& out);
void export_csv(const SampleSet& set, const std::string& path);
SampleSet ingest_csv(std::istream& in, const std::string& origin,
                     std::vector<std::string>* warnings = nullptr);
SampleSet ingest_csv(const std::string& path,
                     std::vector<std::string>* warnings = nullptr);

}  // namespace perfmod

#endif  // PERFMOD_SAMPLING_HPP_
