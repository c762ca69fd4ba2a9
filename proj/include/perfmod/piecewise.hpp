#ifndef PERFMOD_PIECEWISE_HPP_
#define PERFMOD_PIECEWISE_HPP_

#include <map>
#include <string>
#include <vector>

#include "perfmod/polynomial.hpp"

namespace perfmod {

// Closed integer interval.
struct Interval {
  long long lo{1}, hi{1};
  long long width() const { return hi - lo; }
  bool contains(long long v) const { return v >= lo && v <= hi; }
  auto operator<=>(const Interval&) const = default;
};

using Domain = std::map<std::string, Interval>;

struct CellDiagnostics {
  double max_rel_err{0};
  int training_points{0};
};

struct Cell {
  Domain bounds;
  PolynomialModel model;
  CellDiagnostics diagnostics;

  bool contains(const Point& p) const;
};

// Axis-aligned partition of the size domain; cells have pairwise disjoint
// integer bounds and cover the domain exactly.
struct PiecewiseModel {
  Domain domain;
  std::vector<Cell> cells;
  std::string strategy;  // "expansion" | "refinement"
  bool below_target_accuracy{false};
  double global_max_rel_err{0};

  bool in_domain(const Point& p) const;
  // Cell containing p; if p lies outside the domain, the cell containing
  // the clamped point (nearest cell), with *extrapolated set.
  const Cell& locate(const Point& p, bool* extrapolated = nullptr) const;
  void validate_partition() const;  // throws InputError on tiling violations
};

}  // namespace perfmod

#endif  // PERFMOD_PIECEWISE_HPP_
