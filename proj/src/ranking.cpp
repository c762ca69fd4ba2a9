#include "perfmod/ranking.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "perfmod/errors.hpp"

namespace perfmod {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string pred_flags(const Prediction& p) {
  std::string f;
  if (p.any_extrapolated) f += "extrapolated;";
  if (p.any_range_repaired) f += "range_repaired;";
  if (p.any_model_missing) f += "model_missing;";
  if (!f.empty()) f.pop_back();
  return f;
}

}  // namespace

std::vector<VariantSpec> trinv_variants() {
  std::vector<VariantSpec> out;
  for (int v = 1; v <= 4; ++v)
    out.push_back({"trinv-v" + std::to_string(v),
                   [v](long long n, long long b) { return trace_trinv(v, n, b); }});
  return out;
}

std::vector<VariantSpec> sylvester_variants() {
  return {{"sylvester-row",
           [](long long n, long long b) {
             return trace_sylvester(SylvesterSweep::Row, n, n, b);
           }},
          {"sylvester-column", [](long long n, long long b) {
             return trace_sylvester(SylvesterSweep::Column, n, n, b);
           }}};
}

std::vector<RankingEntry> rank(const std::vector<VariantSpec>& variants,
                               long long n, long long b,
                               const std::string& repo_root,
                               const KernelRegistry& registry,
                               const MachineProfile& profile, int threads,
                               bool allow_missing) {
  if (variants.empty()) throw InputError("rank: no variants given");
  std::vector<RankingEntry> entries;
  for (const VariantSpec& v : variants) {
    RankingEntry e;
    e.variant = v.id;
    e.prediction =
        predict(v.trace(n, b), repo_root, registry, profile, threads, allow_missing);
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(),
            [](const RankingEntry& a, const RankingEntry& b) {
              if (a.prediction.total_median != b.prediction.total_median)
                return a.prediction.total_median < b.prediction.total_median;
              return a.variant < b.variant;
            });
  for (size_t i = 0; i < entries.size(); ++i) {
    entries[i].rank = static_cast<int>(i) + 1;
    if (i + 1 < entries.size())
      entries[i].overlaps_next =
          entries[i].prediction.total_high >= entries[i + 1].prediction.total_low;
  }
  return entries;
}

void SweepTable::to_csv(std::ostream& out, bool wide) const {
  if (wide) {
    out << parameter;
    if (!rows.empty())
      for (const auto& [id, p] : rows.front().predictions) out << "," << id;
    out << "\n";
    for (const SweepRow& r : rows) {
      out << r.value;
      for (const auto& [id, p] : r.predictions) out << "," << fmt(p.total_median);
      out << "\n";
    }
    return;
  }
  out << "param,variant,median_s,low_s,high_s,efficiency,flags\n";
  for (const SweepRow& r : rows)
    for (const auto& [id, p] : r.predictions)
      out << r.value << "," << id << "," << fmt(p.total_median) << ","
          << fmt(p.total_low) << "," << fmt(p.total_high) << ","
          << fmt(p.efficiency) << "," << pred_flags(p) << "\n";
}

std::pair<long long, SweepTable> tune_blocksize(const VariantSpec& variant,
                                                long long n,
                                                const std::vector<long long>& b_grid,
                                                const std::string& repo_root,
                                                const KernelRegistry& registry,
                                                const MachineProfile& profile,
                                                int threads, bool allow_missing) {
  if (b_grid.empty()) throw InputError("tune: empty block-size grid");
  for (long long b : b_grid)
    if (b < 1 || b > n)
      throw InputError("tune: block size " + std::to_string(b) + " outside [1, n]");

  SweepTable table;
  table.parameter = "b";
  table.fixed = {{"n", n}};
  long long best_b = 0;
  double best_median = 0;
  std::vector<long long> grid = b_grid;
  std::sort(grid.begin(), grid.end());
  for (long long b : grid) {
    SweepRow row;
    row.value = b;
    Prediction p =
        predict(variant.trace(n, b), repo_root, registry, profile, threads, allow_missing);
    if (best_b == 0 || p.total_median < best_median) {
      best_b = b;
      best_median = p.total_median;
    }
    row.predictions.emplace_back(variant.id, std::move(p));
    table.rows.push_back(std::move(row));
  }
  return {best_b, std::move(table)};
}

SweepTable sweep_n(const std::vector<VariantSpec>& variants,
                   const std::vector<long long>& n_grid, long long b,
                   const std::string& repo_root, const KernelRegistry& registry,
                   const MachineProfile& profile, int threads, bool allow_missing) {
  if (n_grid.empty()) throw InputError("sweep: empty n grid");
  SweepTable table;
  table.parameter = "n";
  table.fixed = {{"b", b}};
  std::vector<long long> grid = n_grid;
  std::sort(grid.begin(), grid.end());
  for (long long n : grid) {
    if (b > n)
      throw InputError("sweep: block size exceeds n=" + std::to_string(n));
    SweepRow row;
    row.value = n;
    for (const VariantSpec& v : variants)
      row.predictions.emplace_back(
          v.id, predict(v.trace(n, b), repo_root, registry, profile, threads,
                        allow_missing));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<ContextRanking> cross_context(
    const std::vector<VariantSpec>& variants, long long n, long long b,
    const std::string& repo_root, const KernelRegistry& registry,
    const std::vector<std::pair<MachineProfile, int>>& contexts,
    bool allow_missing) {
  std::vector<ContextRanking> out;
  for (const auto& [profile, threads] : contexts) {
    ContextRanking cr;
    cr.machine = profile.id;
    cr.threads = threads;
    try {
      cr.ranking = rank(variants, n, b, repo_root, registry, profile, threads,
                        allow_missing);
      cr.ok = true;
    } catch (const std::exception& e) {
      cr.error = e.what();
    }
    out.push_back(std::move(cr));
  }
  return out;
}

}  // namespace perfmod
