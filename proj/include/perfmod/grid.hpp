#ifndef PERFMOD_GRID_HPP_
#define PERFMOD_GRID_HPP_

#include <string>
#include <vector>

#include "perfmod/kernels.hpp"

namespace perfmod {

struct AxisSpec {
  enum class Scheme { Linear, Logarithmic, Explicit };
  std::string name;
  Scheme scheme{Scheme::Linear};
  long long lo{1}, hi{1};
  int count{1};
  std::vector<long long> values;  // Explicit only; sorted ascending, >= 1

  void validate() const;
  std::vector<long long> points() const;
};

struct GridSpec {
  enum class Traversal { Cross, Diagonal };
  std::vector<AxisSpec> axes;
  Traversal traversal{Traversal::Cross};

  // Axis syntax: "n=lin:100:300:3", "n=log:10:1000:3", "n=64,128,256";
  // multiple axes separated by ';'. A leading "diag;" selects diagonal
  // traversal (axes zipped positionally; equal point counts required).
  static GridSpec parse(const std::string& text);
};

// Deterministic point list. Logarithmic axes produce geometrically spaced
// integers, rounded to nearest and deduplicated.
std::vector<Point> generate_grid(const GridSpec& spec);

// Geometrically spaced distinct integers in [lo, hi]; count is a target,
// the result may be shorter after integer collapse.
std::vector<long long> log_spaced(long long lo, long long hi, int count);

}  // namespace perfmod

#endif  // PERFMOD_GRID_HPP_
