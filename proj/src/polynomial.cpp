#include "perfmod/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "perfmod/errors.hpp"

namespace perfmod {

const char* stat_name(Stat s) {
  switch (s) {
    case Stat::Median: return "median";
    case Stat::Q05: return "q05";
    case Stat::Q95: return "q95";
  }
  return "?";
}

double BasisTerm::eval(const Point& p) const {
  double v = 1.0;
  for (const auto& [var, e] : exps) {
    auto it = p.find(var);
    if (it == p.end())
      throw InputError("basis term references unbound size '" + var + "'");
    double x = static_cast<double>(it->second);
    for (int k = 0; k < e; ++k) v *= x;
  }
  return v;
}

int BasisTerm::total_degree() const {
  int d = 0;
  for (const auto& [var, e] : exps) d += e;
  return d;
}

std::string BasisTerm::label() const {
  if (exps.empty()) return "1";
  std::string out;
  for (const auto& [var, e] : exps) {
    if (e == 0) continue;
    if (!out.empty()) out += "*";
    out += var;
    if (e > 1) out += "^" + std::to_string(e);
  }
  return out.empty() ? "1" : out;
}

double PolynomialModel::eval(Stat stat, const Point& p) const {
  const auto& c = coefficients[static_cast<int>(stat)];
  if (c.size() != basis.size())
    throw InputError("polynomial model: coefficient/basis length mismatch");
  double v = 0;
  for (size_t j = 0; j < basis.size(); ++j) v += c[j] * basis[j].eval(p);
  return v;
}

std::vector<double> ls_fit(const std::vector<std::pair<Point, double>>& samples,
                           const std::vector<BasisTerm>& basis, Weighting weighting) {
  const size_t m = samples.size(), n = basis.size();
  if (n == 0) throw InputError("ls_fit: empty basis");
  if (m < n) throw InputError("ls_fit: fewer samples than basis terms");
  for (size_t j = 0; j + 1 < n; ++j)
    for (size_t k = j + 1; k < n; ++k)
      if (basis[j] == basis[k])
        throw InputError("ls_fit: duplicate basis term " + basis[j].label());

  Eigen::MatrixXd A(m, n);
  Eigen::VectorXd y(m);
  for (size_t i = 0; i < m; ++i) {
    double w = 1.0;
    if (weighting == Weighting::Relative) {
      if (samples[i].second <= 0)
        throw InputError("ls_fit: relative weighting requires positive values");
      w = 1.0 / samples[i].second;
    }
    for (size_t j = 0; j < n; ++j) A(i, j) = w * basis[j].eval(samples[i].first);
    y(i) = w * samples[i].second;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (static_cast<size_t>(qr.rank()) < n) {
    // columns permuted past the numerical rank are the dependent ones
    const auto& perm = qr.colsPermutation().indices();
    std::string deps;
    for (Eigen::Index j = qr.rank(); j < static_cast<Eigen::Index>(n); ++j) {
      if (!deps.empty()) deps += ", ";
      deps += basis[perm[j]].label();
    }
    throw InputError("ls_fit: rank-deficient design matrix; dependent terms: " + deps);
  }
  Eigen::VectorXd c = qr.solve(y);
  return std::vector<double>(c.data(), c.data() + n);
}

std::pair<double, double> fit_quality(const PolynomialModel& model,
                                      const std::vector<std::pair<Point, double>>& validation) {
  if (validation.empty()) throw InputError("fit_quality: empty validation set");
  double max_err = 0, sum_err = 0;
  for (const auto& [p, value] : validation) {
    if (value <= 0) throw InputError("fit_quality: validation values must be positive");
    double rel = std::abs(model.eval(Stat::Median, p) - value) / value;
    max_err = std::max(max_err, rel);
    sum_err += rel;
  }
  return {max_err, sum_err / validation.size()};
}

std::vector<BasisTerm> term_pool(const std::vector<std::string>& vars,
                                 int per_var_cap, int total_cap) {
  std::vector<BasisTerm> pool;
  std::vector<int> exps(vars.size(), 0);
  for (;;) {
    int total = 0;
    for (int e : exps) total += e;
    if (total <= total_cap) {
      BasisTerm t;
      for (size_t i = 0; i < vars.size(); ++i)
        if (exps[i] > 0) t.exps[vars[i]] = exps[i];
      pool.push_back(std::move(t));
    }
    size_t i = 0;
    while (i < exps.size() && exps[i] == per_var_cap) exps[i++] = 0;
    if (i == exps.size()) break;
    ++exps[i];
  }
  std::sort(pool.begin(), pool.end(), [](const BasisTerm& a, const BasisTerm& b) {
    if (a.total_degree() != b.total_degree()) return a.total_degree() < b.total_degree();
    return a.exps < b.exps;
  });
  return pool;
}

std::vector<BasisTerm> parse_basis(const std::string& text) {
  std::vector<BasisTerm> out;
  std::string norm = text;
  std::replace(norm.begin(), norm.end(), '+', ',');
  std::stringstream ss(norm);
  std::string part;
  while (std::getline(ss, part, ',')) {
    // strip whitespace
    std::string t;
    for (char c : part)
      if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) continue;
    BasisTerm term;
    if (t != "1") {
      std::stringstream fs(t);
      std::string factor;
      while (std::getline(fs, factor, '*')) {
        size_t caret = factor.find('^');
        std::string var = factor.substr(0, caret);
        int e = 1;
        if (caret != std::string::npos) e = std::stoi(factor.substr(caret + 1));
        if (var.empty() || e < 0) throw InputError("bad basis term: '" + t + "'");
        term.exps[var] += e;
      }
    }
    out.push_back(std::move(term));
  }
  if (out.empty()) throw InputError("empty basis");
  return out;
}

}  // namespace perfmod
