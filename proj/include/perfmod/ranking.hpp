#ifndef PERFMOD_RANKING_HPP_
#define PERFMOD_RANKING_HPP_

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "perfmod/predictor.hpp"

namespace perfmod {

// A ranked algorithm: a variant id plus the trace generator output for the
// requested parameters.
struct VariantSpec {
  std::string id;  // e.g. "trinv-v1"
  std::function<AlgorithmTrace(long long n, long long b)> trace;
};

// The four blocked triangular-inversion variants.
std::vector<VariantSpec> trinv_variants();
// Row/column sweeps of the blocked Sylvester solver (square case: m = n).
std::vector<VariantSpec> sylvester_variants();

struct RankingEntry {
  std::string variant;
  Prediction prediction;
  int rank{0};  // 1-based, ascending total_median
  bool overlaps_next{false};  // [low, high] intersects the next-ranked entry
};

// Ascending by total_median, ties broken by variant id.
std::vector<RankingEntry> rank(const std::vector<VariantSpec>& variants,
                               long long n, long long b,
                               const std::string& repo_root,
                               const KernelRegistry& registry,
                               const MachineProfile& profile, int threads,
                               bool allow_missing = false);

struct SweepRow {
  long long value{0};  // swept parameter value
  std::vector<std::pair<std::string, Prediction>> predictions;  // per variant
};

struct SweepTable {
  std::string parameter;  // "n" or "b"
  std::map<std::string, long long> fixed;
  std::vector<SweepRow> rows;

  // long format: param,variant,median_s,low_s,high_s,efficiency,flags
  void to_csv(std::ostream& out, bool wide = false) const;
};

// Sweeps b over b_grid for one variant; b* = argmin total_median,
// smallest b on ties.
std::pair<long long, SweepTable> tune_blocksize(const VariantSpec& variant,
                                                long long n,
                                                const std::vector<long long>& b_grid,
                                                const std::string& repo_root,
                                                const KernelRegistry& registry,
                                                const MachineProfile& profile,
                                                int threads,
                                                bool allow_missing = false);

// Sweeps n at fixed b for several variants.
SweepTable sweep_n(const std::vector<VariantSpec>& variants,
                   const std::vector<long long>& n_grid, long long b,
                   const std::string& repo_root, const KernelRegistry& registry,
                   const MachineProfile& profile, int threads,
                   bool allow_missing = false);

struct ContextRanking {
  std::string machine;
  int threads{1};
  bool ok{false};
  std::string error;
  std::vector<RankingEntry> ranking;
};

// Independent rankings per (machine profile, thread count); one context
// failing leaves the others intact.
std::vector<ContextRanking> cross_context(
    const std::vector<VariantSpec>& variants, long long n, long long b,
    const std::string& repo_root, const KernelRegistry& registry,
    const std::vector<std::pair<MachineProfile, int>>& contexts,
    bool allow_missing = false);

}  // namespace perfmod

#endif  // PERFMOD_RANKING_HPP_
