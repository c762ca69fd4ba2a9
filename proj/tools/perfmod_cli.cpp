// perfmod: build, store and query performance models of dense kernels.
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "perfmod/errors.hpp"
#include "perfmod/modeler.hpp"
#include "perfmod/predictor.hpp"
#include "perfmod/ranking.hpp"
#include "perfmod/repository.hpp"

using namespace perfmod;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

const MachineProfile kDemoProfile{"demo", 1e10, 4, 1e-9};

MachineProfile load_profile(const std::string& spec) {
  if (spec.empty() || spec == "demo") return kDemoProfile;
  return MachineProfile::load(spec);
}

KernelRegistry load_registry(const std::string& path) {
  if (path.empty()) return KernelRegistry::builtin();
  return KernelRegistry::load(path);
}

std::string default_repo() {
  const char* env = std::getenv("PERFMOD_REPO");
  return env ? env : "";
}

std::string iso_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// stdout when path is empty; atomic temp+rename otherwise
void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

// "n=16:1024;m=1:2048" -> Domain
Domain parse_domain(const std::string& text) {
  Domain domain;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ';')) {
    size_t eq = part.find('='), colon = part.find(':', eq);
    if (eq == std::string::npos || colon == std::string::npos)
      throw InputError("bad domain axis '" + part + "' (want name=lo:hi)");
    try {
      domain[part.substr(0, eq)] = {std::stoll(part.substr(eq + 1, colon - eq - 1)),
                                    std::stoll(part.substr(colon + 1))};
    } catch (const std::exception&) {
      throw InputError("bad domain axis '" + part + "'");
    }
  }
  if (domain.empty()) throw InputError("empty domain");
  return domain;
}

// "16:256:16" (lo:hi:step) or "16,32,64"
std::vector<long long> parse_value_grid(const std::string& text, const char* what) {
  std::vector<long long> out;
  try {
    if (text.find(':') != std::string::npos) {
      size_t c1 = text.find(':'), c2 = text.find(':', c1 + 1);
      if (c2 == std::string::npos) throw InputError("");
      long long lo = std::stoll(text.substr(0, c1));
      long long hi = std::stoll(text.substr(c1 + 1, c2 - c1 - 1));
      long long step = std::stoll(text.substr(c2 + 1));
      if (step < 1 || lo > hi) throw InputError("");
      for (long long v = lo; v <= hi; v += step) out.push_back(v);
    } else {
      std::istringstream in(text);
      std::string tok;
      while (std::getline(in, tok, ',')) out.push_back(std::stoll(tok));
    }
  } catch (const std::exception&) {
    throw InputError(std::string("bad ") + what + " grid '" + text +
                     "' (want lo:hi:step or a comma list)");
  }
  if (out.empty()) throw InputError(std::string("empty ") + what + " grid");
  return out;
}

// Synthetic stand-in for real measurement: the kernel's flop count at
// 10 GFlop/s plus a 5 microsecond overhead, optionally with a x3 jump at
// n >= 256 and multiplicative gaussian noise.
class SyntheticKernelExecutor : public Executor {
public:
  SyntheticKernelExecutor(KernelRegistry registry, bool jump, NoiseModel noise,
                          uint64_t seed)
      : registry_(std::move(registry)), jump_(jump), noise_(noise), rng_(seed) {}

  std::vector<double> measure(const std::string& kernel, const FlagBinding& binding,
                              const Point& point, int count, int) override {
    double base =
        flops(registry_.get(kernel), binding, point).to_double() / 1e10 + 5e-6;
    if (jump_ && point.count("n") && point.at("n") >= 256) base *= 3;
    TruthFunction truth = [base](const Point&) { return base; };
    std::vector<double> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i)
      out.push_back(synthetic_execute(truth, point, noise_, rng_));
    return out;
  }
  std::string id() const override { return jump_ ? "synth:jump" : "synth"; }

private:
  KernelRegistry registry_;
  bool jump_;
  NoiseModel noise_;
  std::mt19937_64 rng_;
};

// Executor specs:
//   synth[:flops|:jump][:sigma]  synthetic truths derived from the kernel's
//                                flop count at 10 GFlop/s with 5us overhead;
//                                "jump" triples the cost once n >= 256
//   cmd:<command>                external measurement subprocess
std::unique_ptr<Executor> make_executor(const std::string& spec,
                                        const KernelRegistry& registry,
                                        uint64_t seed) {
  if (spec.rfind("cmd:", 0) == 0) {
    std::string command = spec.substr(4);
    if (command.empty()) throw InputError("empty executor command");
    return std::make_unique<CommandExecutor>(command);
  }
  if (spec.rfind("synth", 0) != 0)
    throw InputError("unknown executor '" + spec + "' (want synth[...] or cmd:...)");

  std::string truth_name = "flops";
  double sigma = 0;
  std::istringstream in(spec.substr(5));
  std::string tok;
  std::vector<std::string> parts;
  while (std::getline(in, tok, ':'))
    if (!tok.empty()) parts.push_back(tok);
  for (const std::string& p : parts) {
    if (p == "flops" || p == "jump") {
      truth_name = p;
    } else {
      try {
        sigma = std::stod(p);
      } catch (const std::exception&) {
        throw InputError("bad executor option '" + p + "'");
      }
    }
  }
  bool jump = truth_name == "jump";
  NoiseModel noise = sigma > 0 ? NoiseModel::gaussian(sigma) : NoiseModel::none();
  // the truth needs the kernel context; SyntheticExecutor passes it through
  return std::make_unique<SyntheticKernelExecutor>(registry, jump, noise, seed);
}

// ---------------------------------------------------------------------------
// Subcommand option bags

struct CommonOpts {
  std::string repo = default_repo();
  std::string machine = "demo";
  std::string registry;
  std::string out;
  int threads = 1;
  uint64_t seed = 0;
  bool seeded = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_repo,
                bool add_machine = true) {
  if (add_machine)
    cmd->add_option("--machine", o.machine,
                    "machine profile file, or 'demo' for the bundled profile");
  cmd->add_option("--registry", o.registry, "extra kernel registry file");
  cmd->add_option("--threads", o.threads, "thread count")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output file (default: stdout)");
  auto* seed = cmd->add_option("--seed", o.seed, "RNG seed; also omits timestamps");
  cmd->parse_complete_callback([seed, &o] { o.seeded = seed->count() > 0; });
  auto* repo = cmd->add_option("--repo", o.repo, "model repository root ($PERFMOD_REPO)");
  if (needs_repo && o.repo.empty()) repo->required();
}

// key=value strategy config file; CLI flags take precedence
std::map<std::string, std::string> read_config(const std::string& path) {
  std::map<std::string, std::string> kv;
  if (path.empty()) return kv;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(path + ":" + std::to_string(lineno) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_sample(const CommonOpts& common, const std::string& kernel,
               const std::string& flags, const std::string& grid, int reps, int warmup,
               const std::string& executor_spec) {
  KernelRegistry registry = load_registry(common.registry);
  MachineProfile profile = load_profile(common.machine);
  std::unique_ptr<Executor> executor =
      make_executor(executor_spec, registry, common.seed);

  SamplingJob job;
  job.kernel = kernel;
  job.binding = parse_flag_string(flags);
  job.threads = common.threads;
  job.grid = GridSpec::parse(grid);
  job.repetitions = reps;
  job.warmup = warmup;
  job.machine = profile.id;
  job.executor_id = executor->id();

  SampleSet set = run_job(job, *executor, registry, profile);
  if (!common.seeded) set.timestamp = iso_now();
  std::ostringstream out;
  export_csv(set, out);
  write_output(common.out, out.str());
  return 0;
}

int cmd_fit(const CommonOpts& common, const std::string& kernel,
            const std::string& flags, const std::string& domain_text,
            const std::string& config_path, std::string strategy, double eps,
            int max_terms, int initial_points, int max_cells, long long min_cell_width,
            const std::string& basis_text, int reps, int warmup,
            const std::string& executor_spec, bool force,
            const std::vector<std::string>& cli_set) {
  // config file supplies defaults for anything not set on the command line
  std::map<std::string, std::string> cfg = read_config(config_path);
  auto from_cfg = [&](const char* key, auto& value) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return;
    if (std::count(cli_set.begin(), cli_set.end(), key)) return;
    std::istringstream(it->second) >> value;
  };
  from_cfg("strategy", strategy);
  from_cfg("eps", eps);
  from_cfg("max_terms", max_terms);
  from_cfg("initial_points", initial_points);
  from_cfg("max_cells", max_cells);
  from_cfg("min_cell_width", min_cell_width);

  if (strategy != "expansion" && strategy != "refinement")
    throw InputError("strategy must be expansion or refinement");

  KernelRegistry registry = load_registry(common.registry);
  MachineProfile profile = load_profile(common.machine);
  Domain domain = parse_domain(domain_text);
  // reject size axes the kernel does not declare
  const KernelSignature& sig = registry.get(kernel);
  for (const auto& [axis, iv] : domain)
    if (std::find(sig.size_params.begin(), sig.size_params.end(), axis) ==
        sig.size_params.end())
      throw InputError("kernel " + kernel + " has no size parameter '" + axis + "'");

  std::unique_ptr<Executor> executor =
      make_executor(executor_spec, registry, common.seed);
  FlagBinding binding = parse_flag_string(flags);
  ExecutorOracle oracle(*executor, kernel, binding, common.threads, reps, warmup,
                        profile.timer_floor);

  PiecewiseModel model;
  if (strategy == "expansion") {
    ExpansionConfig cfg_e;
    cfg_e.eps = eps;
    cfg_e.max_terms = max_terms;
    cfg_e.initial_points = initial_points;
    if (!basis_text.empty()) cfg_e.pool = parse_basis(basis_text);
    model = model_expansion(domain, oracle, cfg_e);
  } else {
    RefinementConfig cfg_r;
    cfg_r.eps = eps;
    cfg_r.max_cells = max_cells;
    cfg_r.min_cell_width = min_cell_width;
    if (!basis_text.empty()) cfg_r.fixed_basis = parse_basis(basis_text);
    model = adaptive_refinement(domain, oracle, cfg_r);
  }

  ModelRecord record;
  record.key = {kernel, binding, profile.id, common.threads};
  record.metadata.created = common.seeded ? "" : iso_now();
  record.metadata.strategy = strategy;
  record.metadata.sample_count = static_cast<long long>(oracle.samples_drawn());
  record.metadata.max_rel_err = model.global_max_rel_err;
  record.model = std::move(model);

  std::string path = store(record, common.repo, force);
  std::ostringstream out;
  out << path << "\n";
  if (record.model.below_target_accuracy)
    std::cerr << "warning: model is below target accuracy (max_rel_err="
              << record.metadata.max_rel_err << ")\n";
  write_output(common.out, out.str());
  return 0;
}

int cmd_models(const CommonOpts& common, const std::string& kernel_filter,
               const std::string& machine_filter) {
  std::ostringstream out;
  out << "key,strategy,samples,max_rel_err,version,path\n";
  for (const ModelListing& m :
       list_models(common.repo, kernel_filter, machine_filter)) {
    char err[32];
    std::snprintf(err, sizeof err, "%.4g", m.metadata.max_rel_err);
    out << m.key.to_string() << "," << m.metadata.strategy << ","
        << m.metadata.sample_count << "," << err << "," << m.metadata.version << ","
        << m.path << "\n";
  }
  write_output(common.out, out.str());
  return 0;
}

AlgorithmTrace make_trace(const std::string& algo, const std::string& variant,
                          long long n, long long b) {
  if (algo == "trinv") {
    int v = variant.empty() ? 1 : std::atoi(variant.c_str());
    return trace_trinv(v, n, b);
  }
  if (algo == "sylvester") {
    SylvesterSweep sweep =
        variant == "row" ? SylvesterSweep::Row : SylvesterSweep::Column;
    if (!variant.empty() && variant != "row" && variant != "column")
      throw InputError("sylvester variant must be row or column");
    return trace_sylvester(sweep, n, n, b);
  }
  throw InputError("unknown algorithm '" + algo + "' (want trinv or sylvester)");
}

std::vector<VariantSpec> variants_of(const std::string& algo) {
  if (algo == "trinv") return trinv_variants();
  if (algo == "sylvester") return sylvester_variants();
  throw InputError("unknown algorithm '" + algo + "' (want trinv or sylvester)");
}

int cmd_predict(const CommonOpts& common, const std::string& algo,
                const std::string& variant, long long n, long long b,
                bool allow_missing) {
  KernelRegistry registry = load_registry(common.registry);
  MachineProfile profile = load_profile(common.machine);
  AlgorithmTrace trace = make_trace(algo, variant, n, b);
  Prediction p =
      predict(trace, common.repo, registry, profile, common.threads, allow_missing);
  std::ostringstream out;
  export_prediction_json(p, out);
  write_output(common.out, out.str());
  return 0;
}

std::string ranking_csv(const std::vector<RankingEntry>& ranking) {
  std::ostringstream out;
  out << "rank,variant,median_s,low_s,high_s,efficiency,overlaps_next\n";
  for (const RankingEntry& e : ranking) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%s,%.9g,%.9g,%.9g,%.9g,%d\n", e.rank,
                  e.variant.c_str(), e.prediction.total_median, e.prediction.total_low,
                  e.prediction.total_high, e.prediction.efficiency,
                  e.overlaps_next ? 1 : 0);
    out << buf;
  }
  return out.str();
}

int cmd_rank(const CommonOpts& common, const std::string& algo, long long n,
             long long b, const std::vector<std::string>& machines,
             bool allow_missing) {
  KernelRegistry registry = load_registry(common.registry);
  std::vector<VariantSpec> variants = variants_of(algo);

  if (machines.size() <= 1) {
    MachineProfile profile =
        load_profile(machines.empty() ? common.machine : machines.front());
    write_output(common.out, ranking_csv(rank(variants, n, b, common.repo, registry,
                                              profile, common.threads, allow_missing)));
    return 0;
  }
  // several --machine flags: independent ranking per context
  std::vector<std::pair<MachineProfile, int>> contexts;
  for (const std::string& m : machines)
    contexts.emplace_back(load_profile(m), common.threads);
  std::ostringstream out;
  bool any_failed = false;
  for (const ContextRanking& cr :
       cross_context(variants, n, b, common.repo, registry, contexts, allow_missing)) {
    out << "# machine=" << cr.machine << " threads=" << cr.threads << "\n";
    if (cr.ok) {
      out << ranking_csv(cr.ranking);
    } else {
      out << "# error: " << cr.error << "\n";
      any_failed = true;
    }
  }
  write_output(common.out, out.str());
  return any_failed ? 2 : 0;
}

int cmd_tune(const CommonOpts& common, const std::string& algo,
             const std::string& variant, long long n, const std::string& b_grid_text,
             bool wide, bool allow_missing) {
  KernelRegistry registry = load_registry(common.registry);
  MachineProfile profile = load_profile(common.machine);
  std::vector<VariantSpec> variants = variants_of(algo);
  std::string want = algo == "trinv" ? "trinv-v" + (variant.empty() ? "1" : variant)
                                     : "sylvester-" + (variant.empty() ? "column" : variant);
  const VariantSpec* spec = nullptr;
  for (const VariantSpec& v : variants)
    if (v.id == want) spec = &v;
  if (!spec) throw InputError("unknown variant '" + want + "'");

  auto [best, table] =
      tune_blocksize(*spec, n, parse_value_grid(b_grid_text, "b"), common.repo,
                     registry, profile, common.threads, allow_missing);
  std::ostringstream out;
  out << "# best_b=" << best << "\n";
  table.to_csv(out, wide);
  write_output(common.out, out.str());
  return 0;
}

int cmd_sweep(const CommonOpts& common, const std::string& algo,
              const std::string& n_grid_text, long long b, bool wide,
              bool allow_missing) {
  KernelRegistry registry = load_registry(common.registry);
  MachineProfile profile = load_profile(common.machine);
  SweepTable table =
      sweep_n(variants_of(algo), parse_value_grid(n_grid_text, "n"), b, common.repo,
              registry, profile, common.threads, allow_missing);
  std::ostringstream out;
  table.to_csv(out, wide);
  write_output(common.out, out.str());
  return 0;
}

int cmd_compare(const CommonOpts& common, const std::string& kernel,
                const std::string& flags, const std::string& domain_text, double eps,
                int max_terms, int initial_points, int max_cells,
                long long min_cell_width, int reps, int warmup,
                const std::string& executor_spec, int heldout, bool text) {
  KernelRegistry registry = load_registry(common.registry);
  MachineProfile profile = load_profile(common.machine);
  Domain domain = parse_domain(domain_text);
  FlagBinding binding = parse_flag_string(flags);
  registry.get(kernel);  // validates the kernel name

  uint64_t seed = common.seed;
  OracleFactory factory = [&registry, &profile, kernel, binding, reps, warmup,
                           executor_spec, seed, &common]() {
    struct Owned : SamplingOracle {
      std::unique_ptr<Executor> executor;
      std::unique_ptr<ExecutorOracle> inner;
      Sample sample_at(const Point& p) override { return inner->sample_at(p); }
      size_t samples_drawn() const override { return inner->samples_drawn(); }
    };
    auto owned = std::make_unique<Owned>();
    owned->executor = make_executor(executor_spec, registry, seed);
    owned->inner = std::make_unique<ExecutorOracle>(*owned->executor, kernel, binding,
                                                    common.threads, reps, warmup,
                                                    profile.timer_floor);
    return std::unique_ptr<SamplingOracle>(std::move(owned));
  };

  ExpansionConfig ec;
  ec.eps = eps;
  ec.max_terms = max_terms;
  ec.initial_points = initial_points;
  RefinementConfig rc;
  rc.eps = eps;
  rc.max_cells = max_cells;
  rc.min_cell_width = min_cell_width;

  ComparisonReport report = compare_strategies(domain, factory, ec, rc, heldout);
  write_output(common.out, text ? report.to_text() : report.to_csv());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"performance-model toolkit for blocked dense linear algebra"};
  app.require_subcommand(1);

  // sample ------------------------------------------------------------------
  CommonOpts sample_o;
  std::string s_kernel, s_flags, s_grid, s_executor = "synth";
  int s_reps = 10, s_warmup = 1;
  CLI::App* sample = app.add_subcommand("sample", "measure a kernel over a size grid");
  add_common(sample, sample_o, false);
  sample->add_option("--kernel", s_kernel)->required();
  sample->add_option("--flags", s_flags, "flag binding, e.g. side=L,uplo=L");
  sample->add_option("--grid", s_grid, "e.g. n=log:64:2048:8")->required();
  sample->add_option("--reps", s_reps, "repetitions per point (>= 3)");
  sample->add_option("--warmup", s_warmup, "discarded leading measurements");
  sample->add_option("--executor", s_executor, "synth[:jump][:sigma] or cmd:<command>");

  // fit ---------------------------------------------------------------------
  CommonOpts fit_o;
  std::string f_kernel, f_flags, f_domain, f_strategy = "expansion", f_basis;
  std::string f_executor = "synth", f_config;
  double f_eps = 0.05;
  int f_max_terms = 12, f_initial_points = 24, f_max_cells = 64;
  long long f_min_cell_width = 16;
  int f_reps = 5, f_warmup = 1;
  bool f_force = false;
  CLI::App* fit = app.add_subcommand("fit", "fit and store a model");
  add_common(fit, fit_o, true);
  fit->add_option("--kernel", f_kernel)->required();
  fit->add_option("--flags", f_flags);
  fit->add_option("--domain", f_domain, "e.g. n=16:1024;m=16:1024")->required();
  fit->add_option("--strategy", f_strategy, "expansion | refinement");
  fit->add_option("--eps", f_eps, "target max relative error");
  fit->add_option("--max-terms", f_max_terms);
  fit->add_option("--initial-points", f_initial_points);
  fit->add_option("--max-cells", f_max_cells);
  fit->add_option("--min-cell-width", f_min_cell_width);
  fit->add_option("--basis", f_basis, "fixed basis / candidate pool override");
  fit->add_option("--reps", f_reps);
  fit->add_option("--warmup", f_warmup);
  fit->add_option("--executor", f_executor);
  fit->add_option("--config", f_config, "key=value strategy config file");
  fit->add_flag("--force", f_force, "overwrite an existing model");

  // models ------------------------------------------------------------------
  CommonOpts models_o;
  std::string m_kernel_filter, m_machine_filter;
  CLI::App* models = app.add_subcommand("models", "list stored models");
  models->add_option("--repo", models_o.repo, "model repository root ($PERFMOD_REPO)");
  models->add_option("--out", models_o.out);
  models->add_option("--kernel", m_kernel_filter, "substring filter");
  models->add_option("--machine", m_machine_filter, "substring filter");

  // predict -----------------------------------------------------------------
  CommonOpts predict_o;
  std::string p_algo = "trinv", p_variant;
  long long p_n = 0, p_b = 0;
  bool p_allow_missing = false;
  CLI::App* predict_cmd = app.add_subcommand("predict", "predict one blocked run");
  add_common(predict_cmd, predict_o, true);
  predict_cmd->add_option("--algo", p_algo, "trinv | sylvester");
  predict_cmd->add_option("--variant", p_variant, "1..4 or row|column");
  predict_cmd->add_option("--n", p_n)->required();
  predict_cmd->add_option("--b", p_b)->required();
  predict_cmd->add_flag("--allow-missing", p_allow_missing);

  // rank --------------------------------------------------------------------
  CommonOpts rank_o;
  std::string r_algo = "trinv";
  long long r_n = 0, r_b = 0;
  std::vector<std::string> r_machines;
  bool r_allow_missing = false;
  CLI::App* rank_cmd = app.add_subcommand("rank", "rank algorithm variants");
  add_common(rank_cmd, rank_o, true, /*add_machine=*/false);
  rank_cmd->add_option("--algo", r_algo);
  rank_cmd->add_option("--n", r_n)->required();
  rank_cmd->add_option("--b", r_b)->required();
  rank_cmd->add_option("--machine", r_machines,
                       "machine profile(s); repeat for per-context rankings")
      ->take_all();
  rank_cmd->add_flag("--allow-missing", r_allow_missing);

  // tune --------------------------------------------------------------------
  CommonOpts tune_o;
  std::string t_algo = "trinv", t_variant, t_b_grid;
  long long t_n = 0;
  bool t_wide = false, t_allow_missing = false;
  CLI::App* tune = app.add_subcommand("tune", "find the best block size");
  add_common(tune, tune_o, true);
  tune->add_option("--algo", t_algo);
  tune->add_option("--variant", t_variant);
  tune->add_option("--n", t_n)->required();
  tune->add_option("--b-grid", t_b_grid, "lo:hi:step or comma list")->required();
  tune->add_flag("--wide", t_wide);
  tune->add_flag("--allow-missing", t_allow_missing);

  // sweep -------------------------------------------------------------------
  CommonOpts sweep_o;
  std::string w_algo = "trinv", w_n_grid;
  long long w_b = 0;
  bool w_wide = false, w_allow_missing = false;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep n at fixed block size");
  add_common(sweep, sweep_o, true);
  sweep->add_option("--algo", w_algo);
  sweep->add_option("--n-grid", w_n_grid, "lo:hi:step or comma list")->required();
  sweep->add_option("--b", w_b)->required();
  sweep->add_flag("--wide", w_wide);
  sweep->add_flag("--allow-missing", w_allow_missing);

  // compare-strategies ------------------------------------------------------
  CommonOpts cmp_o;
  std::string c_kernel, c_flags, c_domain, c_executor = "synth";
  double c_eps = 0.05;
  int c_max_terms = 12, c_initial_points = 24, c_max_cells = 64;
  long long c_min_cell_width = 16;
  int c_reps = 5, c_warmup = 1, c_heldout = 5;
  bool c_text = false;
  CLI::App* compare =
      app.add_subcommand("compare-strategies", "run both strategies and report");
  add_common(compare, cmp_o, false);
  compare->add_option("--kernel", c_kernel)->required();
  compare->add_option("--flags", c_flags);
  compare->add_option("--domain", c_domain)->required();
  compare->add_option("--eps", c_eps);
  compare->add_option("--max-terms", c_max_terms);
  compare->add_option("--initial-points", c_initial_points);
  compare->add_option("--max-cells", c_max_cells);
  compare->add_option("--min-cell-width", c_min_cell_width);
  compare->add_option("--reps", c_reps);
  compare->add_option("--warmup", c_warmup);
  compare->add_option("--executor", c_executor);
  compare->add_option("--heldout", c_heldout, "held-out points per axis");
  compare->add_flag("--text", c_text, "human-readable report instead of CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sample->parsed())
      return cmd_sample(sample_o, s_kernel, s_flags, s_grid, s_reps, s_warmup,
                        s_executor);
    if (fit->parsed()) {
      // record which strategy options came from the command line so the
      // config file only fills the gaps
      std::vector<std::string> cli_set;
      for (const char* k : {"strategy", "eps", "max_terms", "initial_points",
                            "max_cells", "min_cell_width"}) {
        std::string flag = "--" + std::string(k);
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (fit->count(flag)) cli_set.push_back(k);
      }
      return cmd_fit(fit_o, f_kernel, f_flags, f_domain, f_config, f_strategy, f_eps,
                     f_max_terms, f_initial_points, f_max_cells, f_min_cell_width,
                     f_basis, f_reps, f_warmup, f_executor, f_force, cli_set);
    }
    if (models->parsed())
      return cmd_models(models_o, m_kernel_filter, m_machine_filter);
    if (predict_cmd->parsed())
      return cmd_predict(predict_o, p_algo, p_variant, p_n, p_b, p_allow_missing);
    if (rank_cmd->parsed())
      return cmd_rank(rank_o, r_algo, r_n, r_b, r_machines, r_allow_missing);
    if (tune->parsed())
      return cmd_tune(tune_o, t_algo, t_variant, t_n, t_b_grid, t_wide,
                      t_allow_missing);
    if (sweep->parsed())
      return cmd_sweep(sweep_o, w_algo, w_n_grid, w_b, w_wide, w_allow_missing);
    if (compare->parsed())
      return cmd_compare(cmp_o, c_kernel, c_flags, c_domain, c_eps, c_max_terms,
                         c_initial_points, c_max_cells, c_min_cell_width, c_reps,
                         c_warmup, c_executor, c_heldout, c_text);
  } catch (const MissingModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IntegrityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const JobError& e) {
    std::cerr << "error: " << e.what() << " (" << e.partial_results.samples.size()
              << " samples completed before the failure)\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
