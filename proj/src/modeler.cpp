#include "perfmod/modeler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "perfmod/errors.hpp"

namespace perfmod {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double weighted_rss(const std::vector<std::pair<Point, double>>& train,
                    const std::vector<BasisTerm>& basis,
                    const std::vector<double>& coeffs) {
  double rss = 0;
  for (const auto& [p, y] : train) {
    double pred = 0;
    for (size_t j = 0; j < basis.size(); ++j) pred += coeffs[j] * basis[j].eval(p);
    double r = (pred - y) / y;  // relative weighting
    rss += r * r;
  }
  return rss;
}

std::vector<std::string> domain_axes(const Domain& domain) {
  std::vector<std::string> axes;
  for (const auto& [name, iv] : domain) axes.push_back(name);
  return axes;
}

}  // namespace

// ---------------------------------------------------------------------------
// Point-grid helpers

std::vector<long long> distinct_log_points(long long lo, long long hi, int count) {
  if (lo > hi) throw InputError("log points: lo > hi");
  std::vector<long long> pts = log_spaced(lo, hi, count);
  long long span = hi - lo + 1;
  while (static_cast<long long>(pts.size()) < std::min<long long>(count, span)) {
    bool inserted = false;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      if (pts[i + 1] - pts[i] <= 1) continue;
      long long mid = std::llround(std::sqrt(static_cast<double>(pts[i]) *
                                             static_cast<double>(pts[i + 1])));
      mid = std::clamp(mid, pts[i] + 1, pts[i + 1] - 1);
      pts.insert(pts.begin() + i + 1, mid);
      inserted = true;
      ++i;
      if (static_cast<long long>(pts.size()) >= std::min<long long>(count, span)) break;
    }
    if (!inserted) break;
  }
  return pts;
}

std::vector<long long> offset_log_points(long long lo, long long hi, int count) {
  std::vector<long long> full = distinct_log_points(lo, hi, 2 * count + 1);
  std::vector<long long> out;
  for (size_t i = 1; i < full.size(); i += 2) out.push_back(full[i]);
  if (out.empty()) out.push_back(full.empty() ? lo : full.front());
  return out;
}

std::vector<Point> cross_log_grid(const Domain& domain, int target_total, int phase) {
  if (domain.empty()) throw InputError("empty domain");
  int d = static_cast<int>(domain.size());
  int per_axis = std::max(2, static_cast<int>(
      std::ceil(std::pow(static_cast<double>(target_total), 1.0 / d))));

  GridSpec spec;
  for (const auto& [name, iv] : domain) {
    std::vector<long long> base = distinct_log_points(iv.lo, iv.hi, 2 * per_axis);
    std::vector<long long> chosen;
    for (size_t i = (phase % 2); i < base.size(); i += 2) chosen.push_back(base[i]);
    if (chosen.empty()) chosen.push_back(base.front());
    AxisSpec axis;
    axis.name = name;
    axis.scheme = AxisSpec::Scheme::Explicit;
    axis.values = std::move(chosen);
    spec.axes.push_back(std::move(axis));
  }
  return generate_grid(spec);
}

// ---------------------------------------------------------------------------
// ExecutorOracle

ExecutorOracle::ExecutorOracle(Executor& executor, std::string kernel,
                               FlagBinding binding, int threads, int repetitions,
                               int warmup, double timer_floor)
    : executor_(executor), kernel_(std::move(kernel)), binding_(std::move(binding)),
      threads_(threads), repetitions_(repetitions), warmup_(warmup),
      timer_floor_(timer_floor) {
  if (repetitions_ < 3) throw InputError("oracle needs repetitions >= 3");
}

Sample ExecutorOracle::sample_at(const Point& point) {
  std::vector<double> raw =
      executor_.measure(kernel_, binding_, point, warmup_ + repetitions_, threads_);
  drawn_ += raw.size();
  Sample s;
  s.point = point;
  s.raw_times.assign(raw.begin() + warmup_, raw.end());
  bool floored = false;
  for (double& t : s.raw_times)
    if (t < timer_floor_) { t = timer_floor_; floored = true; }
  if (floored) s.flags.push_back("timer_floor_clamped");
  s.recompute_stats();
  return s;
}

// ---------------------------------------------------------------------------
// Model expansion

namespace {

struct TrainingData {
  std::vector<Sample> samples;
  std::vector<std::pair<Point, double>> median() const {
    std::vector<std::pair<Point, double>> out;
    for (const auto& s : samples) out.emplace_back(s.point, s.stats.median);
    return out;
  }
  std::vector<std::pair<Point, double>> stat(Stat st) const {
    std::vector<std::pair<Point, double>> out;
    for (const auto& s : samples)
      out.emplace_back(s.point, st == Stat::Median ? s.stats.median
                               : st == Stat::Q05  ? s.stats.q05
                                                  : s.stats.q95);
    return out;
  }
};

TrainingData draw(SamplingOracle& oracle, const std::vector<Point>& points) {
  TrainingData d;
  for (const Point& p : points) d.samples.push_back(oracle.sample_at(p));
  return d;
}

// Fits all three statistics, shrinking the basis if the design matrix is
// rank deficient over these particular points.
PolynomialModel fit_all_stats(const TrainingData& data, std::vector<BasisTerm> basis) {
  for (;;) {
    try {
      PolynomialModel m;
      m.basis = basis;
      for (Stat st : kAllStats)
        m.coefficients[static_cast<int>(st)] = ls_fit(data.stat(st), basis, Weighting::Relative);
      return m;
    } catch (const InputError&) {
      if (basis.size() <= 1) throw;
      basis.pop_back();  // pool ordering puts high-degree terms last
    }
  }
}

}  // namespace

PiecewiseModel model_expansion(const Domain& domain, SamplingOracle& oracle,
                               const ExpansionConfig& config) {
  for (const auto& [name, iv] : domain)
    if (iv.lo < 1 || iv.lo > iv.hi)
      throw InputError("degenerate domain on axis " + name);

  std::vector<BasisTerm> pool =
      config.pool.empty() ? term_pool(domain_axes(domain)) : config.pool;

  int target = config.initial_points;
  TrainingData training = draw(oracle, cross_log_grid(domain, target, 0));
  TrainingData validation = draw(oracle, cross_log_grid(domain, config.initial_points, 1));

  std::vector<BasisTerm> basis{BasisTerm{}};  // constant
  std::vector<double> coeffs = ls_fit(training.median(), basis, Weighting::Relative);

  int stalls = 0, resamples = 0;
  bool converged = false;
  double max_err = 0;

  for (;;) {
    PolynomialModel probe;
    probe.basis = basis;
    probe.coefficients[static_cast<int>(Stat::Median)] = coeffs;
    probe.coefficients[static_cast<int>(Stat::Q05)] = coeffs;
    probe.coefficients[static_cast<int>(Stat::Q95)] = coeffs;
    max_err = fit_quality(probe, validation.median()).first;
    if (max_err <= config.eps) { converged = true; break; }
    if (static_cast<int>(basis.size()) >= config.max_terms) break;

    double rss = weighted_rss(training.median(), basis, coeffs);
    double best_reduction = -1;
    std::vector<BasisTerm> best_basis;
    std::vector<double> best_coeffs;
    for (const BasisTerm& cand : pool) {
      if (std::find(basis.begin(), basis.end(), cand) != basis.end()) continue;
      std::vector<BasisTerm> trial = basis;
      trial.push_back(cand);
      std::vector<double> c;
      try {
        c = ls_fit(training.median(), trial, Weighting::Relative);
      } catch (const InputError&) {
        continue;  // dependent or under-determined with this training set
      }
      double reduction = rss - weighted_rss(training.median(), trial, c);
      if (reduction > best_reduction) {
        best_reduction = reduction;
        best_basis = std::move(trial);
        best_coeffs = std::move(c);
      }
    }
    if (best_reduction < 0) break;  // pool exhausted

    double rel_reduction = rss > 0 ? best_reduction / rss : 0;
    if (rel_reduction < 0.01) {
      if (++stalls >= 2) {
        if (resamples >= config.max_resamples) break;
        target *= 2;
        training = draw(oracle, cross_log_grid(domain, target, 0));
        coeffs = ls_fit(training.median(), basis, Weighting::Relative);
        ++resamples;
        stalls = 0;
      }
      continue;
    }
    stalls = 0;
    basis = std::move(best_basis);
    coeffs = std::move(best_coeffs);
  }

  Cell cell;
  cell.bounds = domain;
  cell.model = fit_all_stats(training, basis);
  cell.diagnostics.max_rel_err = max_err;
  cell.diagnostics.training_points = static_cast<int>(training.samples.size());

  PiecewiseModel model;
  model.domain = domain;
  model.cells.push_back(std::move(cell));
  model.strategy = "expansion";
  model.below_target_accuracy = !converged;
  model.global_max_rel_err = max_err;
  return model;
}

// ---------------------------------------------------------------------------
// Adaptive refinement

namespace {

struct FittedCell {
  Cell cell;
  TrainingData validation;                 // kept for split-axis selection
  std::vector<double> validation_errors;   // per validation sample, median rel err
};

std::vector<Point> cell_grid(const Domain& bounds, int target_total, int phase) {
  return cross_log_grid(bounds, target_total, phase);
}

double score_model(const PolynomialModel& model, const TrainingData& validation,
                   std::vector<double>* errors) {
  double max_err = 0;
  for (const auto& s : validation.samples) {
    double pred = model.eval(Stat::Median, s.point);
    double rel = std::abs(pred - s.stats.median) / s.stats.median;
    if (errors) errors->push_back(rel);
    max_err = std::max(max_err, rel);
  }
  return max_err;
}

FittedCell fit_cell(const Domain& bounds, SamplingOracle& oracle,
                    const std::vector<BasisTerm>& basis,
                    const PolynomialModel* parent = nullptr) {
  int need = 2 * static_cast<int>(basis.size());
  TrainingData training = draw(oracle, cell_grid(bounds, need, 0));
  TrainingData validation =
      draw(oracle, cell_grid(bounds, static_cast<int>(basis.size()), 1));

  // shrink the basis when the cell cannot field 2x|basis| distinct points
  std::vector<BasisTerm> b = basis;
  while (b.size() > 1 &&
         training.samples.size() < 2 * b.size())
    b.pop_back();

  FittedCell fc;
  fc.cell.bounds = bounds;
  fc.cell.model = fit_all_stats(training, b);
  fc.cell.diagnostics.training_points = static_cast<int>(training.samples.size());
  fc.validation = std::move(validation);
  double max_err = score_model(fc.cell.model, fc.validation, &fc.validation_errors);

  // a point-starved refit can be worse than the model it inherits; keep the
  // parent's fit in that case so splits never regress
  if (parent) {
    std::vector<double> parent_errors;
    double parent_err = score_model(*parent, fc.validation, &parent_errors);
    if (parent_err < max_err) {
      fc.cell.model = *parent;
      fc.validation_errors = std::move(parent_errors);
      max_err = parent_err;
    }
  }
  fc.cell.diagnostics.max_rel_err = max_err;
  return fc;
}

// Axis along which validation errors differ most between the lower and
// upper geometric halves of the cell.
std::string pick_split_axis(const FittedCell& fc, long long min_cell_width,
                            const std::vector<std::string>& axis_order) {
  std::string best;
  double best_spread = -1;
  long long best_width = -1;
  for (const std::string& axis : axis_order) {
    const Interval& iv = fc.cell.bounds.at(axis);
    if (iv.width() <= min_cell_width) continue;
    long long mid = std::llround(std::sqrt(static_cast<double>(iv.lo) *
                                           static_cast<double>(iv.hi)));
    mid = std::clamp(mid, iv.lo, iv.hi - 1);
    double lo_sum = 0, hi_sum = 0;
    int lo_n = 0, hi_n = 0;
    for (size_t i = 0; i < fc.validation.samples.size(); ++i) {
      if (fc.validation.samples[i].point.at(axis) <= mid) {
        lo_sum += fc.validation_errors[i];
        ++lo_n;
      } else {
        hi_sum += fc.validation_errors[i];
        ++hi_n;
      }
    }
    double spread = (lo_n && hi_n) ? std::abs(lo_sum / lo_n - hi_sum / hi_n) : 0.0;
    if (spread > best_spread + 1e-15 ||
        (std::abs(spread - best_spread) <= 1e-15 && iv.width() > best_width)) {
      best = axis;
      best_spread = spread;
      best_width = iv.width();
    }
  }
  return best;
}

}  // namespace

PiecewiseModel adaptive_refinement(const Domain& domain, SamplingOracle& oracle,
                                   const RefinementConfig& config) {
  for (const auto& [name, iv] : domain)
    if (iv.lo < 1 || iv.lo > iv.hi)
      throw InputError("degenerate domain on axis " + name);

  std::vector<BasisTerm> basis =
      config.fixed_basis.empty() ? term_pool(domain_axes(domain)) : config.fixed_basis;
  std::vector<std::string> axis_order =
      config.axis_order.empty() ? domain_axes(domain) : config.axis_order;

  std::vector<FittedCell> cells;
  cells.push_back(fit_cell(domain, oracle, basis));
  std::set<size_t> unsplittable;

  for (;;) {
    if (static_cast<int>(cells.size()) >= config.max_cells) break;
    size_t worst = SIZE_MAX;
    double worst_err = config.eps;
    for (size_t i = 0; i < cells.size(); ++i) {
      if (unsplittable.count(i)) continue;
      if (cells[i].cell.diagnostics.max_rel_err > worst_err) {
        worst_err = cells[i].cell.diagnostics.max_rel_err;
        worst = i;
      }
    }
    if (worst == SIZE_MAX) break;

    std::string axis = pick_split_axis(cells[worst], config.min_cell_width, axis_order);
    if (axis.empty()) { unsplittable.insert(worst); continue; }

    const Interval iv = cells[worst].cell.bounds.at(axis);
    long long mid = std::llround(std::sqrt(static_cast<double>(iv.lo) *
                                           static_cast<double>(iv.hi)));
    mid = std::clamp(mid, iv.lo, iv.hi - 1);

    Domain lo_bounds = cells[worst].cell.bounds;
    Domain hi_bounds = cells[worst].cell.bounds;
    lo_bounds[axis] = {iv.lo, mid};
    hi_bounds[axis] = {mid + 1, iv.hi};

    PolynomialModel parent = cells[worst].cell.model;
    cells[worst] = fit_cell(lo_bounds, oracle, basis, &parent);
    cells.push_back(fit_cell(hi_bounds, oracle, basis, &parent));
    unsplittable.clear();  // indices shifted; re-derive on subsequent passes
  }

  PiecewiseModel model;
  model.domain = domain;
  model.strategy = "refinement";
  for (auto& fc : cells) {
    model.global_max_rel_err =
        std::max(model.global_max_rel_err, fc.cell.diagnostics.max_rel_err);
    model.cells.push_back(std::move(fc.cell));
  }
  model.below_target_accuracy = model.global_max_rel_err > config.eps;
  std::sort(model.cells.begin(), model.cells.end(), [](const Cell& a, const Cell& b) {
    return a.bounds < b.bounds;
  });
  model.validate_partition();
  return model;
}

// ---------------------------------------------------------------------------
// Strategy comparison

namespace {

StrategyResult score(const std::string& name, const PiecewiseModel& model,
                     size_t samples, double seconds,
                     const std::vector<std::pair<Point, double>>& heldout) {
  StrategyResult r;
  r.strategy = name;
  r.ran = true;
  r.samples_drawn = samples;
  r.build_seconds = seconds;
  r.cell_count = static_cast<int>(model.cells.size());
  r.term_count = model.cells.empty() ? 0
                                     : static_cast<int>(model.cells.front().model.basis.size());
  r.below_target_accuracy = model.below_target_accuracy;
  double sum = 0;
  for (const auto& [p, y] : heldout) {
    const Cell& c = model.locate(p);
    double rel = std::abs(c.model.eval(Stat::Median, p) - y) / y;
    r.heldout_max_rel_err = std::max(r.heldout_max_rel_err, rel);
    sum += rel;
  }
  if (!heldout.empty()) r.heldout_mean_rel_err = sum / heldout.size();
  return r;
}

}  // namespace

ComparisonReport compare_strategies(const Domain& domain, const OracleFactory& oracles,
                                    const ExpansionConfig& expansion_config,
                                    const RefinementConfig& refinement_config,
                                    int heldout_per_axis) {
  GridSpec heldout_spec;
  for (const auto& [name, iv] : domain) {
    AxisSpec axis;
    axis.name = name;
    axis.scheme = AxisSpec::Scheme::Explicit;
    axis.values = offset_log_points(iv.lo, iv.hi, heldout_per_axis);
    heldout_spec.axes.push_back(std::move(axis));
  }
  std::vector<Point> heldout_points = generate_grid(heldout_spec);
  auto heldout_oracle = oracles();
  std::vector<std::pair<Point, double>> heldout;
  for (const Point& p : heldout_points)
    heldout.emplace_back(p, heldout_oracle->sample_at(p).stats.median);

  ComparisonReport report;
  using clock = std::chrono::steady_clock;
  {
    auto oracle = oracles();
    auto t0 = clock::now();
    try {
      PiecewiseModel m = model_expansion(domain, *oracle, expansion_config);
      double sec = std::chrono::duration<double>(clock::now() - t0).count();
      report.expansion = score("expansion", m, oracle->samples_drawn(), sec, heldout);
    } catch (const std::exception& e) {
      report.expansion.strategy = "expansion";
      report.expansion.error = e.what();
    }
  }
  {
    auto oracle = oracles();
    auto t0 = clock::now();
    try {
      PiecewiseModel m = adaptive_refinement(domain, *oracle, refinement_config);
      double sec = std::chrono::duration<double>(clock::now() - t0).count();
      report.refinement = score("refinement", m, oracle->samples_drawn(), sec, heldout);
    } catch (const std::exception& e) {
      report.refinement.strategy = "refinement";
      report.refinement.error = e.what();
    }
  }
  return report;
}

std::string ComparisonReport::to_csv() const {
  std::ostringstream out;
  out << "strategy,samples,heldout_max_rel_err,heldout_mean_rel_err,cells,terms,"
         "below_target_accuracy,error\n";
  for (const StrategyResult* r : {&expansion, &refinement}) {
    out << r->strategy << "," << r->samples_drawn << ","
        << fmt17(r->heldout_max_rel_err) << "," << fmt17(r->heldout_mean_rel_err) << ","
        << r->cell_count << "," << r->term_count << ","
        << (r->below_target_accuracy ? 1 : 0) << "," << r->error << "\n";
  }
  return out.str();
}

std::string ComparisonReport::to_text() const {
  std::ostringstream out;
  for (const StrategyResult* r : {&expansion, &refinement}) {
    out << r->strategy << ":";
    if (!r->ran) {
      out << " FAILED (" << r->error << ")\n";
      continue;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  " samples=%zu build=%.3fs heldout_max=%.4f heldout_mean=%.4f "
                  "cells=%d terms=%d%s\n",
                  r->samples_drawn, r->build_seconds, r->heldout_max_rel_err,
                  r->heldout_mean_rel_err, r->cell_count, r->term_count,
                  r->below_target_accuracy ? " [below_target_accuracy]" : "");
    out << buf;
  }
  return out.str();
}

}  // namespace perfmod
