// Python bindings for the perfmod core library.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "perfmod/errors.hpp"
#include "perfmod/grid.hpp"
#include "perfmod/kernels.hpp"
#include "perfmod/modeler.hpp"
#include "perfmod/polynomial.hpp"
#include "perfmod/predictor.hpp"
#include "perfmod/ranking.hpp"
#include "perfmod/repository.hpp"
#include "perfmod/sampling.hpp"
#include "perfmod/traces.hpp"

namespace py = pybind11;
using namespace perfmod;

namespace {

// A sampling oracle that owns its synthetic executor, so factories and
// helper functions can hand it out by value semantics.
class OwningSyntheticOracle : public SamplingOracle {
public:
  OwningSyntheticOracle(TruthFunction truth, NoiseModel noise, uint64_t seed,
                        int repetitions, double timer_floor)
      : executor_(std::move(truth), noise, seed),
        oracle_(executor_, "SYNTH", {}, 1, repetitions, 1, timer_floor) {}
  Sample sample_at(const Point& p) override { return oracle_.sample_at(p); }
  size_t samples_drawn() const override { return oracle_.samples_drawn(); }

private:
  SyntheticExecutor executor_;
  ExecutorOracle oracle_;
};

NoiseModel noise_from_sigma(double sigma) {
  return sigma > 0 ? NoiseModel::gaussian(sigma) : NoiseModel::none();
}

}  // namespace

PYBIND11_MODULE(_perfmod, m) {
  m.doc() = "Statistical performance models for dense linear-algebra kernels";

  // translators run newest-first, so derived classes are registered after
  // their bases
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<MissingModelError>(m, "MissingModelError",
                                            PyExc_LookupError);
  auto io_err = py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<IntegrityError>(m, "IntegrityError", io_err.ptr());
  py::register_exception<JobError>(m, "JobError", PyExc_RuntimeError);

  py::class_<Rational>(m, "Rational")
      .def(py::init<long long>(), py::arg("n"))
      .def(py::init<long long, long long>(), py::arg("n"), py::arg("d"))
      .def_property_readonly("num", &Rational::num)
      .def_property_readonly("den", &Rational::den)
      .def("is_integer", &Rational::is_integer)
      .def("__float__", &Rational::to_double)
      .def("__str__", &Rational::str)
      .def("__repr__", [](const Rational& r) { return "Rational(" + r.str() + ")"; })
      .def("__eq__", [](const Rational& a, const Rational& b) { return a == b; })
      .def("__lt__", [](const Rational& a, const Rational& b) { return a < b; });

  py::class_<MachineProfile>(m, "MachineProfile")
      .def(py::init([](std::string id, double peak, int cores, double floor) {
             MachineProfile p{std::move(id), peak, cores, floor};
             p.validate();
             return p;
           }),
           py::arg("id"), py::arg("peak_flops_per_core"), py::arg("core_count") = 1,
           py::arg("timer_floor") = 1e-7)
      .def_static("load", &MachineProfile::load, py::arg("path"))
      .def_readwrite("id", &MachineProfile::id)
      .def_readwrite("peak_flops_per_core", &MachineProfile::peak_flops_per_core)
      .def_readwrite("core_count", &MachineProfile::core_count)
      .def_readwrite("timer_floor", &MachineProfile::timer_floor);

  py::class_<KernelRegistry>(m, "KernelRegistry")
      .def_static("builtin", &KernelRegistry::builtin)
      .def_static("load", &KernelRegistry::load, py::arg("path"))
      .def("names", &KernelRegistry::names)
      .def("contains", &KernelRegistry::contains, py::arg("name"));

  m.def(
      "flops",
      [](const KernelRegistry& registry, const std::string& kernel,
         const FlagBinding& binding, const Point& sizes) {
        return flops(registry.get(kernel), binding, sizes);
      },
      py::arg("registry"), py::arg("kernel"), py::arg("binding"), py::arg("sizes"),
      "Exact flop count of one kernel call.");
  m.def(
      "efficiency",
      [](double time_seconds, double flop_count, const MachineProfile& profile,
         int threads) {
        return efficiency(time_seconds, flop_count, profile, threads);
      },
      py::arg("time_seconds"), py::arg("flops"), py::arg("profile"),
      py::arg("threads") = 1);

  m.def(
      "generate_grid",
      [](const std::string& spec) { return generate_grid(GridSpec::parse(spec)); },
      py::arg("spec"),
      "Evaluation points for an axis spec like 'n=log:32:1024:6;m=64,128'.");
  m.def("log_spaced", &log_spaced, py::arg("lo"), py::arg("hi"), py::arg("count"));

  py::class_<Interval>(m, "Interval")
      .def(py::init([](long long lo, long long hi) { return Interval{lo, hi}; }),
           py::arg("lo"), py::arg("hi"))
      .def(py::init([](std::pair<long long, long long> p) {
        return Interval{p.first, p.second};
      }))
      .def_readwrite("lo", &Interval::lo)
      .def_readwrite("hi", &Interval::hi)
      .def("contains", &Interval::contains, py::arg("value"))
      .def("__repr__", [](const Interval& iv) {
        return "Interval(" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + ")";
      });
  py::implicitly_convertible<py::tuple, Interval>();

  py::enum_<Stat>(m, "Stat")
      .value("MEDIAN", Stat::Median)
      .value("Q05", Stat::Q05)
      .value("Q95", Stat::Q95);

  py::class_<BasisTerm>(m, "BasisTerm")
      .def(py::init<>())
      .def_readwrite("exps", &BasisTerm::exps)
      .def("eval", &BasisTerm::eval, py::arg("point"))
      .def("total_degree", &BasisTerm::total_degree)
      .def("label", &BasisTerm::label)
      .def("__repr__", [](const BasisTerm& t) { return t.label(); });
  m.def("parse_basis", &parse_basis, py::arg("text"));
  m.def("term_pool", &term_pool, py::arg("vars"), py::arg("per_var_cap") = 3,
        py::arg("total_cap") = 3);

  py::class_<PolynomialModel>(m, "PolynomialModel")
      .def(py::init<>())
      .def_readwrite("basis", &PolynomialModel::basis)
      .def("coefficients",
           [](const PolynomialModel& p, Stat s) {
             return p.coefficients[static_cast<int>(s)];
           },
           py::arg("stat") = Stat::Median)
      .def(
          "set_coefficients",
          [](PolynomialModel& p, Stat s, std::vector<double> coeffs) {
            p.coefficients[static_cast<int>(s)] = std::move(coeffs);
          },
          py::arg("stat"), py::arg("coeffs"))
      .def("eval", &PolynomialModel::eval, py::arg("stat"), py::arg("point"));

  m.def(
      "ls_fit",
      [](const std::vector<std::pair<Point, double>>& samples,
         const std::vector<BasisTerm>& basis, bool relative_weighting) {
        return ls_fit(samples, basis,
                      relative_weighting ? Weighting::Relative : Weighting::None);
      },
      py::arg("samples"), py::arg("basis"), py::arg("relative_weighting") = true,
      "Weighted least-squares coefficients for (point, seconds) samples.");

  py::class_<CellDiagnostics>(m, "CellDiagnostics")
      .def_readonly("max_rel_err", &CellDiagnostics::max_rel_err)
      .def_readonly("training_points", &CellDiagnostics::training_points);

  py::class_<Cell>(m, "Cell")
      .def(py::init<>())
      .def_readwrite("bounds", &Cell::bounds)
      .def_readwrite("model", &Cell::model)
      .def_readonly("diagnostics", &Cell::diagnostics)
      .def("contains", &Cell::contains, py::arg("point"));

  py::class_<PiecewiseModel>(m, "PiecewiseModel")
      .def(py::init<>())
      .def_readwrite("domain", &PiecewiseModel::domain)
      .def_readwrite("cells", &PiecewiseModel::cells)
      .def_readwrite("strategy", &PiecewiseModel::strategy)
      .def_readonly("below_target_accuracy", &PiecewiseModel::below_target_accuracy)
      .def_readonly("global_max_rel_err", &PiecewiseModel::global_max_rel_err)
      .def("in_domain", &PiecewiseModel::in_domain, py::arg("point"))
      .def("validate_partition", &PiecewiseModel::validate_partition)
      .def(
          "eval",
          [](const PiecewiseModel& pm, const Point& p, Stat s) {
            bool extrapolated = false;
            double v = pm.locate(p, &extrapolated).model.eval(s, p);
            return py::make_tuple(v, extrapolated);
          },
          py::arg("point"), py::arg("stat") = Stat::Median,
          "Returns (seconds, extrapolated) at a point.");

  m.def(
      "fit_synthetic",
      [](const Domain& domain, TruthFunction truth, const std::string& strategy,
         double eps, double noise_sigma, uint64_t seed, int repetitions,
         double timer_floor, int max_terms, int initial_points,
         long long min_cell_width, int max_cells) {
        OwningSyntheticOracle oracle(std::move(truth), noise_from_sigma(noise_sigma),
                                     seed, repetitions, timer_floor);
        PiecewiseModel model;
        if (strategy == "expansion") {
          ExpansionConfig cfg;
          cfg.eps = eps;
          cfg.max_terms = max_terms;
          cfg.initial_points = initial_points;
          model = model_expansion(domain, oracle, cfg);
        } else if (strategy == "refinement") {
          RefinementConfig cfg;
          cfg.eps = eps;
          cfg.min_cell_width = min_cell_width;
          cfg.max_cells = max_cells;
          model = adaptive_refinement(domain, oracle, cfg);
        } else {
          throw InputError("unknown strategy '" + strategy +
                           "' (expected expansion or refinement)");
        }
        return py::make_tuple(model, oracle.samples_drawn());
      },
      py::arg("domain"), py::arg("truth"), py::arg("strategy") = "expansion",
      py::arg("eps") = 0.05, py::arg("noise_sigma") = 0.0, py::arg("seed") = 0,
      py::arg("repetitions") = 3, py::arg("timer_floor") = 1e-12,
      py::arg("max_terms") = 12, py::arg("initial_points") = 24,
      py::arg("min_cell_width") = 16, py::arg("max_cells") = 64,
      "Fits a piecewise model to a Python truth callable; returns "
      "(model, samples_drawn).");

  py::class_<StrategyResult>(m, "StrategyResult")
      .def_readonly("strategy", &StrategyResult::strategy)
      .def_readonly("ran", &StrategyResult::ran)
      .def_readonly("error", &StrategyResult::error)
      .def_readonly("samples_drawn", &StrategyResult::samples_drawn)
      .def_readonly("build_seconds", &StrategyResult::build_seconds)
      .def_readonly("heldout_max_rel_err", &StrategyResult::heldout_max_rel_err)
      .def_readonly("heldout_mean_rel_err", &StrategyResult::heldout_mean_rel_err)
      .def_readonly("cell_count", &StrategyResult::cell_count)
      .def_readonly("term_count", &StrategyResult::term_count)
      .def_readonly("below_target_accuracy", &StrategyResult::below_target_accuracy);

  py::class_<ComparisonReport>(m, "ComparisonReport")
      .def_readonly("expansion", &ComparisonReport::expansion)
      .def_readonly("refinement", &ComparisonReport::refinement)
      .def("to_csv", &ComparisonReport::to_csv)
      .def("to_text", &ComparisonReport::to_text);

  m.def(
      "compare_strategies",
      [](const Domain& domain, TruthFunction truth, double eps, double noise_sigma,
         uint64_t seed, int repetitions, double timer_floor) {
        ExpansionConfig ec;
        ec.eps = eps;
        RefinementConfig rc;
        rc.eps = eps;
        OracleFactory factory = [&]() -> std::unique_ptr<SamplingOracle> {
          return std::make_unique<OwningSyntheticOracle>(
              truth, noise_from_sigma(noise_sigma), seed, repetitions, timer_floor);
        };
        return compare_strategies(domain, factory, ec, rc);
      },
      py::arg("domain"), py::arg("truth"), py::arg("eps") = 0.05,
      py::arg("noise_sigma") = 0.0, py::arg("seed") = 0, py::arg("repetitions") = 3,
      py::arg("timer_floor") = 1e-12,
      "Runs both strategies against the same synthetic truth.");

  py::class_<ModelKey>(m, "ModelKey")
      .def(py::init([](std::string kernel, FlagBinding binding, std::string machine,
                       int threads) {
             return ModelKey{std::move(kernel), std::move(binding),
                             std::move(machine), threads};
           }),
           py::arg("kernel"), py::arg("binding"), py::arg("machine"),
           py::arg("threads") = 1)
      .def_readwrite("kernel", &ModelKey::kernel)
      .def_readwrite("binding", &ModelKey::binding)
      .def_readwrite("machine", &ModelKey::machine)
      .def_readwrite("threads", &ModelKey::threads)
      .def("__str__", &ModelKey::to_string)
      .def("__eq__", [](const ModelKey& a, const ModelKey& b) { return a == b; });

  py::class_<ModelMetadata>(m, "ModelMetadata")
      .def(py::init<>())
      .def_readwrite("created", &ModelMetadata::created)
      .def_readwrite("strategy", &ModelMetadata::strategy)
      .def_readwrite("sample_count", &ModelMetadata::sample_count)
      .def_readwrite("max_rel_err", &ModelMetadata::max_rel_err)
      .def_readwrite("version", &ModelMetadata::version);

  py::class_<ModelRecord>(m, "ModelRecord")
      .def(py::init<>())
      .def_readwrite("key", &ModelRecord::key)
      .def_readwrite("metadata", &ModelRecord::metadata)
      .def_readwrite("model", &ModelRecord::model);

  py::class_<ModelListing>(m, "ModelListing")
      .def_readonly("key", &ModelListing::key)
      .def_readonly("metadata", &ModelListing::metadata)
      .def_readonly("path", &ModelListing::path);

  m.def("serialize_record", &serialize_record, py::arg("record"));
  m.def("deserialize_record", &deserialize_record, py::arg("json_text"),
        py::arg("origin") = "<string>");
  m.def("record_path", &record_path, py::arg("repo_root"), py::arg("key"));
  m.def("store", &store, py::arg("record"), py::arg("repo_root"),
        py::arg("force") = false, "Stores a model record; returns the file path.");
  m.def("lookup", &lookup, py::arg("key"), py::arg("repo_root"));
  m.def("list_models", &list_models, py::arg("repo_root"),
        py::arg("kernel_filter") = "", py::arg("machine_filter") = "");

  py::class_<KernelCall>(m, "KernelCall")
      .def_readwrite("kernel", &KernelCall::kernel)
      .def_readwrite("binding", &KernelCall::binding)
      .def_readwrite("sizes", &KernelCall::sizes)
      .def_readwrite("threads", &KernelCall::threads);

  py::class_<AlgorithmTrace>(m, "AlgorithmTrace")
      .def_readwrite("algorithm", &AlgorithmTrace::algorithm)
      .def_readwrite("parameters", &AlgorithmTrace::parameters)
      .def_readwrite("calls", &AlgorithmTrace::calls)
      .def("__len__", [](const AlgorithmTrace& t) { return t.calls.size(); })
      .def("to_csv", [](const AlgorithmTrace& t) {
        std::ostringstream out;
        export_trace_csv(t, out);
        return out.str();
      });

  m.def("trace_trinv", &trace_trinv, py::arg("variant"), py::arg("n"), py::arg("b"),
        py::arg("threads") = 1,
        "Call trace of one blocked triangular-inversion variant (1..4).");
  m.def(
      "trace_sylvester",
      [](const std::string& sweep, long long me, long long n, long long b,
         int threads) {
        if (sweep != "row" && sweep != "column")
          throw InputError("sylvester sweep must be 'row' or 'column'");
        return trace_sylvester(
            sweep == "row" ? SylvesterSweep::Row : SylvesterSweep::Column, me, n, b,
            threads);
      },
      py::arg("sweep"), py::arg("m"), py::arg("n"), py::arg("b"),
      py::arg("threads") = 1);
  m.def("trace_flops", &trace_flops, py::arg("trace"), py::arg("registry"));

  py::class_<ModelEval>(m, "ModelEval")
      .def_readonly("low", &ModelEval::low)
      .def_readonly("median", &ModelEval::median)
      .def_readonly("high", &ModelEval::high)
      .def_readonly("extrapolated", &ModelEval::extrapolated)
      .def_readonly("range_repaired", &ModelEval::range_repaired)
      .def_readonly("floor_clamped", &ModelEval::floor_clamped);

  m.def("evaluate_model", &evaluate_model, py::arg("record"), py::arg("sizes"),
        py::arg("profile"));

  py::class_<CallEstimate>(m, "CallEstimate")
      .def_readonly("call", &CallEstimate::call)
      .def_readonly("eval", &CallEstimate::eval)
      .def_readonly("flops", &CallEstimate::flops);

  py::class_<Prediction>(m, "Prediction")
      .def_readonly("total_median", &Prediction::total_median)
      .def_readonly("total_low", &Prediction::total_low)
      .def_readonly("total_high", &Prediction::total_high)
      .def_readonly("breakdown", &Prediction::breakdown)
      .def_readonly("total_flops", &Prediction::total_flops)
      .def_readonly("total_flops_exact", &Prediction::total_flops_exact)
      .def_readonly("efficiency", &Prediction::efficiency)
      .def_readonly("any_extrapolated", &Prediction::any_extrapolated)
      .def_readonly("any_range_repaired", &Prediction::any_range_repaired)
      .def_readonly("any_model_missing", &Prediction::any_model_missing)
      .def_readonly("skipped_keys", &Prediction::skipped_keys)
      .def("to_json", [](const Prediction& p) {
        std::ostringstream out;
        export_prediction_json(p, out);
        return out.str();
      });

  m.def("predict", &predict, py::arg("trace"), py::arg("repo_root"),
        py::arg("registry"), py::arg("profile"), py::arg("threads") = 1,
        py::arg("allow_missing") = false);

  py::class_<VariantSpec>(m, "VariantSpec")
      .def(py::init([](std::string id,
                       std::function<AlgorithmTrace(long long, long long)> trace) {
             return VariantSpec{std::move(id), std::move(trace)};
           }),
           py::arg("id"), py::arg("trace"))
      .def_readwrite("id", &VariantSpec::id)
      .def("trace", [](const VariantSpec& v, long long n, long long b) {
        return v.trace(n, b);
      }, py::arg("n"), py::arg("b"));

  m.def("trinv_variants", &trinv_variants);
  m.def("sylvester_variants", &sylvester_variants);

  py::class_<RankingEntry>(m, "RankingEntry")
      .def_readonly("variant", &RankingEntry::variant)
      .def_readonly("prediction", &RankingEntry::prediction)
      .def_readonly("rank", &RankingEntry::rank)
      .def_readonly("overlaps_next", &RankingEntry::overlaps_next);

  m.def("rank", &rank, py::arg("variants"), py::arg("n"), py::arg("b"),
        py::arg("repo_root"), py::arg("registry"), py::arg("profile"),
        py::arg("threads") = 1, py::arg("allow_missing") = false);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("value", &SweepRow::value)
      .def_readonly("predictions", &SweepRow::predictions);

  py::class_<SweepTable>(m, "SweepTable")
      .def_readonly("parameter", &SweepTable::parameter)
      .def_readonly("fixed", &SweepTable::fixed)
      .def_readonly("rows", &SweepTable::rows)
      .def(
          "to_csv",
          [](const SweepTable& t, bool wide) {
            std::ostringstream out;
            t.to_csv(out, wide);
            return out.str();
          },
          py::arg("wide") = false);

  m.def("tune_blocksize", &tune_blocksize, py::arg("variant"), py::arg("n"),
        py::arg("b_grid"), py::arg("repo_root"), py::arg("registry"),
        py::arg("profile"), py::arg("threads") = 1, py::arg("allow_missing") = false,
        "Returns (best_b, sweep_table).");
  m.def("sweep_n", &sweep_n, py::arg("variants"), py::arg("n_grid"), py::arg("b"),
        py::arg("repo_root"), py::arg("registry"), py::arg("profile"),
        py::arg("threads") = 1, py::arg("allow_missing") = false);

  py::class_<ContextRanking>(m, "ContextRanking")
      .def_readonly("machine", &ContextRanking::machine)
      .def_readonly("threads", &ContextRanking::threads)
      .def_readonly("ok", &ContextRanking::ok)
      .def_readonly("error", &ContextRanking::error)
      .def_readonly("ranking", &ContextRanking::ranking);

  m.def("cross_context", &cross_context, py::arg("variants"), py::arg("n"),
        py::arg("b"), py::arg("repo_root"), py::arg("registry"), py::arg("contexts"),
        py::arg("allow_missing") = false);
}
