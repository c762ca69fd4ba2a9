#ifndef PERFMOD_POLYNOMIAL_HPP_
#define PERFMOD_POLYNOMIAL_HPP_

#include <array>
#include <map>
#include <string>
#include <vector>

#include "perfmod/kernels.hpp"

namespace perfmod {

enum class Stat { Median = 0, Q05 = 1, Q95 = 2 };
constexpr std::array<Stat, 3> kAllStats{Stat::Median, Stat::Q05, Stat::Q95};
const char* stat_name(Stat s);

// One monomial over the size parameters; exponent 0 entries are omitted.
struct BasisTerm {
  std::map<std::string, int> exps;

  double eval(const Point& p) const;
  int total_degree() const;
  std::string label() const;  // "1", "n^3", "m*n^2", ...
  bool operator==(const BasisTerm&) const = default;
  bool operator<(const BasisTerm& o) const { return exps < o.exps; }
};

// Polynomial over a fixed basis, with one coefficient vector per modeled
// statistic (median, q05, q95). Coefficients are seconds per monomial unit.
struct PolynomialModel {
  std::vector<BasisTerm> basis;
  std::array<std::vector<double>, 3> coefficients;

  double eval(Stat stat, const Point& p) const;
};

enum class Weighting { None, Relative };

// Weighted linear least squares over the monomial basis, solved via
// column-pivoted QR. Relative weighting uses w_i = 1/y_i^2.
// Throws InputError naming the dependent terms on rank deficiency.
std::vector<double> ls_fit(const std::vector<std::pair<Point, double>>& samples,
                           const std::vector<BasisTerm>& basis,
                           Weighting weighting = Weighting::Relative);

// (max_rel_err, mean_rel_err) of the median statistic on validation data.
std::pair<double, double> fit_quality(const PolynomialModel& model,
                                      const std::vector<std::pair<Point, double>>& validation);

// All monomials over `vars` with per-variable exponent <= per_var_cap and
// total degree <= total_cap, constant included; deterministic order
// (ascending total degree, then lexicographic).
std::vector<BasisTerm> term_pool(const std::vector<std::string>& vars,
                                 int per_var_cap = 3, int total_cap = 3);

// Parses "1 + n^3" / "m*n*k, m, 1" style comma- or plus-separated term lists.
std::vector<BasisTerm> parse_basis(const std::string& text);

}  // namespace perfmod

#endif  // PERFMOD_POLYNOMIAL_HPP_
