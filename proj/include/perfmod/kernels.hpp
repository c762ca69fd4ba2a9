#ifndef PERFMOD_KERNELS_HPP_
#define PERFMOD_KERNELS_HPP_

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "perfmod/rational.hpp"

namespace perfmod {

// A point in a kernel's size-argument space, keyed by size-parameter name.
using Point = std::map<std::string, long long>;

// Flag name -> chosen value; must bind every flag of the kernel.
using FlagBinding = std::map<std::string, std::string>;

// Arithmetic expression over size parameters (+ - * / ^, integer literals),
// evaluated exactly over rationals.
class FlopExpr {
public:
  static FlopExpr parse(const std::string& text);
  Rational eval(const Point& sizes) const;
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

struct FlagDecl {
  std::string name;
  std::vector<std::string> values;  // non-empty, finite
};

// Flop formula guarded by flag values; the first rule whose guard matches
// the binding applies. An empty guard matches everything.
struct FlopRule {
  std::map<std::string, std::string> guard;
  FlopExpr formula;
};

struct KernelSignature {
  std::string name;
  std::vector<FlagDecl> flag_params;
  std::vector<std::string> size_params;
  std::vector<FlopRule> flop_rules;

  bool has_flag(const std::string& flag, const std::string& value) const;
};

struct MachineProfile {
  std::string id;
  double peak_flops_per_core{0};
  int core_count{1};
  double timer_floor{1e-7};  // seconds; smallest trustworthy measurement

  void validate() const;
  // key=value lines: id, peak_flops_per_core, core_count, timer_floor
  static MachineProfile load(const std::string& path);
  static MachineProfile parse(std::istream& in, const std::string& origin);
};

// Immutable after load; safe for concurrent reads.
class KernelRegistry {
public:
  // GEMM, TRMM, TRSM, TRTRI, TRSYL-UNB with standard flags.
  static KernelRegistry builtin();

  static KernelRegistry load(const std::string& path);
  static KernelRegistry parse(std::istream& in, const std::string& origin);

  void add(KernelSignature sig);          // throws InputError on duplicate name
  const KernelSignature& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

private:
  std::map<std::string, KernelSignature> kernels_;
};

// Validates the binding and sizes, then evaluates the kernel's flop formula.
Rational flops(const KernelSignature& kernel, const FlagBinding& binding,
               const Point& sizes);

// flops / (time * peak_flops_per_core * threads). Not clamped; values > 1
// are surfaced as-is (warn_over_peak set) since they signal a bad model.
double efficiency(double time_seconds, double flop_count,
                  const MachineProfile& profile, int threads,
                  bool* warn_over_peak = nullptr);

// Canonical "name=value,..." rendering (sorted by flag name).
std::string flag_string(const FlagBinding& binding, char sep = ',');
FlagBinding parse_flag_string(const std::string& text);
std::string point_string(const Point& p);

}  // namespace perfmod

#endif  // PERFMOD_KERNELS_HPP_
