#include "perfmod/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "perfmod/errors.hpp"

namespace perfmod {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  double h = (sorted.size() - 1) * q;
  size_t lo = static_cast<size_t>(h);
  size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = h - lo;
  return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

SampleStats compute_stats(const std::vector<double>& raw_times) {
  if (raw_times.empty()) throw InputError("cannot compute stats of empty sample");
  std::vector<double> sorted(raw_times);
  std::sort(sorted.begin(), sorted.end());
  SampleStats s;
  s.min = sorted.front();
  s.median = quantile_sorted(sorted, 0.5);
  s.q05 = quantile_sorted(sorted, 0.05);
  s.q95 = quantile_sorted(sorted, 0.95);
  double sum = 0;
  for (double t : raw_times) sum += t;
  s.mean = sum / raw_times.size();
  double ss = 0;
  for (double t : raw_times) ss += (t - s.mean) * (t - s.mean);
  s.stddev = raw_times.size() > 1 ? std::sqrt(ss / (raw_times.size() - 1)) : 0.0;
  return s;
}

void Sample::recompute_stats() { stats = compute_stats(raw_times); }

NoiseModel NoiseModel::gaussian(double sigma) {
  NoiseModel n;
  n.kind = Kind::GaussianMultiplicative;
  n.sigma = sigma;
  return n;
}

NoiseModel NoiseModel::uniform(double lo, double hi) {
  if (lo > hi) throw InputError("uniform noise: lo > hi");
  NoiseModel n;
  n.kind = Kind::UniformAdditive;
  n.lo = lo;
  n.hi = hi;
  return n;
}

double synthetic_execute(const TruthFunction& truth, const Point& point,
                         const NoiseModel& noise, std::mt19937_64& rng,
                         bool* clamped) {
  double t = truth(point);
  switch (noise.kind) {
    case NoiseModel::Kind::None:
      break;
    case NoiseModel::Kind::GaussianMultiplicative: {
      std::normal_distribution<double> d(0.0, noise.sigma);
      t *= 1.0 + d(rng);
      break;
    }
    case NoiseModel::Kind::UniformAdditive: {
      std::uniform_real_distribution<double> d(noise.lo, noise.hi);
      t += d(rng);
      break;
    }
  }
  if (clamped) *clamped = false;
  if (t < 0) {
    t = 0;
    if (clamped) *clamped = true;
  }
  return t;
}

SyntheticExecutor::SyntheticExecutor(TruthFunction truth, NoiseModel noise,
                                     uint64_t seed, std::string id)
    : truth_(std::move(truth)), noise_(noise), rng_(seed), id_(std::move(id)) {}

std::vector<double> SyntheticExecutor::measure(const std::string&, const FlagBinding&,
                                               const Point& point, int count, int) {
  std::vector<double> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    bool clamped = false;
    out.push_back(synthetic_execute(truth_, point, noise_, rng_, &clamped));
    ++calls_;
  }
  return out;
}

CommandExecutor::CommandExecutor(std::string command, std::string workdir)
    : command_(std::move(command)), workdir_(std::move(workdir)) {}

std::vector<double> CommandExecutor::measure(const std::string& kernel,
                                             const FlagBinding& binding,
                                             const Point& point, int count,
                                             int threads) {
  std::string dir = workdir_.empty() ? "/tmp" : workdir_;
  std::string jobfile = dir + "/perfmod_job_" + std::to_string(::getpid()) + ".txt";
  {
    std::ofstream out(jobfile);
    if (!out) throw IoError("cannot write executor job file: " + jobfile);
    out << "kernel=" << kernel << "\n"
        << "flags=" << flag_string(binding) << "\n"
        << "point=" << point_string(point) << "\n"
        << "reps=" << count << "\n"
        << "threads=" << threads << "\n";
  }
  std::string cmd = command_ + " " + jobfile;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw IoError("cannot launch executor: " + cmd);
  std::string output;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  int status = ::pclose(pipe);
  std::remove(jobfile.c_str());
  if (status != 0)
    throw IoError("executor exited with status " + std::to_string(status) +
                  " at point " + point_string(point));
  std::istringstream ss(output);
  std::vector<double> times;
  double v;
  while (ss >> v) times.push_back(v);
  if (static_cast<int>(times.size()) != count)
    throw IoError("executor returned " + std::to_string(times.size()) +
                  " durations, expected " + std::to_string(count));
  return times;
}

SampleSet run_job(const SamplingJob& job, Executor& executor,
                  const KernelRegistry& registry, const MachineProfile& profile) {
  if (job.repetitions < 3)
    throw InputError("sampling job needs repetitions >= 3");
  if (job.threads < 1) throw InputError("sampling job needs threads >= 1");
  if (job.warmup < 0) throw InputError("sampling job warm-up must be >= 0");
  const KernelSignature& kernel = registry.get(job.kernel);

  std::vector<Point> points = generate_grid(job.grid);
  SampleSet set;
  set.context = {job.kernel, job.binding, job.machine, job.threads};
  set.executor_id = executor.id();

  for (const Point& point : points) {
    // validates flags and sizes against the registry
    flops(kernel, job.binding, point);
    std::vector<double> raw;
    try {
      raw = executor.measure(job.kernel, job.binding, point,
                             job.warmup + job.repetitions, job.threads);
    } catch (const std::exception& e) {
      throw JobError("sampling failed at point " + point_string(point) + ": " + e.what(),
                     point, std::move(set));
    }
    Sample s;
    s.point = point;
    s.raw_times.assign(raw.begin() + job.warmup, raw.end());
    bool floored = false;
    for (double& t : s.raw_times)
      if (t < profile.timer_floor) { t = profile.timer_floor; floored = true; }
    if (floored) s.flags.push_back("timer_floor_clamped");
    s.recompute_stats();
    set.samples.push_back(std::move(s));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Sample CSV

void export_csv(const SampleSet& set, std::ostream& out) {
  out << "# kernel=" << set.context.kernel << "\n";
  out << "# flags=" << flag_string(set.context.binding) << "\n";
  out << "# machine=" << set.context.machine << "\n";
  out << "# threads=" << set.context.threads << "\n";
  if (!set.executor_id.empty()) out << "# executor=" << set.executor_id << "\n";
  if (!set.timestamp.empty()) out << "# timestamp=" << set.timestamp << "\n";

  std::vector<std::string> cols;
  if (!set.samples.empty())
    for (const auto& [k, v] : set.samples.front().point) cols.push_back(k);
  for (const auto& c : cols) out << c << ",";
  out << "rep,seconds\n";
  for (const auto& s : set.samples) {
    for (size_t r = 0; r < s.raw_times.size(); ++r) {
      for (const auto& c : cols) out << s.point.at(c) << ",";
      out << (r + 1) << "," << fmt17(s.raw_times[r]) << "\n";
    }
  }
  for (const auto& s : set.samples)
    out << "# summary " << point_string(s.point)
        << " median=" << fmt17(s.stats.median) << "\n";
}

void export_csv(const SampleSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write sample CSV: " + path);
  export_csv(set, out);
}

SampleSet ingest_csv(std::istream& in, const std::string& origin,
                     std::vector<std::string>* warnings) {
  SampleSet set;
  bool have_kernel = false, have_machine = false, have_threads = false, have_flags = false;
  std::vector<std::string> cols;
  std::map<std::string, std::vector<double>> rows;  // point-string -> raw times
  std::vector<Point> order;
  std::map<std::string, double> summaries;

  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw InputError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::string body = trim(t.substr(1));
      if (body.rfind("kernel=", 0) == 0) { set.context.kernel = body.substr(7); have_kernel = true; }
      else if (body.rfind("flags=", 0) == 0) { set.context.binding = parse_flag_string(body.substr(6)); have_flags = true; }
      else if (body.rfind("machine=", 0) == 0) { set.context.machine = body.substr(8); have_machine = true; }
      else if (body.rfind("threads=", 0) == 0) { set.context.threads = std::stoi(body.substr(8)); have_threads = true; }
      else if (body.rfind("executor=", 0) == 0) { set.executor_id = body.substr(9); }
      else if (body.rfind("timestamp=", 0) == 0) { set.timestamp = body.substr(10); }
      else if (body.rfind("summary ", 0) == 0) {
        std::string rest = body.substr(8);
        size_t sp = rest.find(' ');
        if (sp != std::string::npos && rest.find("median=", sp + 1) != std::string::npos)
          summaries[rest.substr(0, sp)] = std::stod(rest.substr(rest.find("median=") + 7));
      }
      continue;
    }
    if (cols.empty()) {
      if (!have_kernel || !have_machine || !have_threads || !have_flags)
        fail("missing context header (need # kernel=, # flags=, # machine=, # threads=)");
      std::stringstream cs(t);
      std::string c;
      while (std::getline(cs, c, ',')) cols.push_back(trim(c));
      if (cols.size() < 3 || cols[cols.size() - 2] != "rep" || cols.back() != "seconds")
        fail("column header must end with rep,seconds");
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream fs(t);
    std::string f;
    while (std::getline(fs, f, ',')) fields.push_back(trim(f));
    if (fields.size() != cols.size()) fail("wrong number of fields");
    Point p;
    double seconds = 0;
    try {
      for (size_t i = 0; i + 2 < cols.size(); ++i) p[cols[i]] = std::stoll(fields[i]);
      seconds = std::stod(fields.back());
    } catch (const std::exception&) {
      fail("malformed row: '" + t + "'");
    }
    if (seconds < 0) fail("negative duration");
    std::string key = point_string(p);
    if (!rows.count(key)) order.push_back(p);
    rows[key].push_back(seconds);
  }
  if (cols.empty())
    throw InputError(origin + ": missing context header");
  if (order.empty()) throw InputError(origin + ": no sample rows");

  for (const Point& p : order) {
    Sample s;
    s.point = p;
    s.raw_times = rows.at(point_string(p));
    s.recompute_stats();
    auto it = summaries.find(point_string(p));
    if (it != summaries.end()) {
      double ref = std::max(std::abs(s.stats.median), 1e-300);
      if (std::abs(it->second - s.stats.median) / ref > 1e-12 && warnings)
        warnings->push_back("stats recomputed for point " + point_string(p) +
                            ": stored median " + fmt17(it->second) +
                            " disagrees with raw times");
    }
    set.samples.push_back(std::move(s));
  }
  return set;
}

SampleSet ingest_csv(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sample CSV: " + path);
  return ingest_csv(in, path, warnings);
}

}  // namespace perfmod
