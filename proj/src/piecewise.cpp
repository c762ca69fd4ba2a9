#include "perfmod/piecewise.hpp"

#include <algorithm>

#include "perfmod/errors.hpp"

namespace perfmod {

bool Cell::contains(const Point& p) const {
  for (const auto& [axis, iv] : bounds) {
    auto it = p.find(axis);
    if (it == p.end() || !iv.contains(it->second)) return false;
  }
  return true;
}

bool PiecewiseModel::in_domain(const Point& p) const {
  for (const auto& [axis, iv] : domain) {
    auto it = p.find(axis);
    if (it == p.end() || !iv.contains(it->second)) return false;
  }
  return true;
}

const Cell& PiecewiseModel::locate(const Point& p, bool* extrapolated) const {
  if (cells.empty()) throw InputError("piecewise model has no cells");
  Point q = p;
  bool outside = false;
  for (const auto& [axis, iv] : domain) {
    auto it = q.find(axis);
    if (it == q.end())
      throw InputError("evaluation point misses size '" + axis + "'");
    if (it->second < iv.lo) { it->second = iv.lo; outside = true; }
    if (it->second > iv.hi) { it->second = iv.hi; outside = true; }
  }
  if (extrapolated) *extrapolated = outside;
  for (const auto& c : cells)
    if (c.contains(q)) return c;
  throw InputError("piecewise model does not cover point " + point_string(q));
}

void PiecewiseModel::validate_partition() const {
  if (cells.empty()) throw InputError("piecewise model has no cells");
  for (const auto& c : cells) {
    if (c.bounds.size() != domain.size())
      throw InputError("cell bounds axes differ from domain axes");
    for (const auto& [axis, iv] : c.bounds) {
      auto it = domain.find(axis);
      if (it == domain.end() || iv.lo < it->second.lo || iv.hi > it->second.hi ||
          iv.lo > iv.hi)
        throw InputError("cell bounds exceed domain on axis " + axis);
    }
  }
  for (size_t i = 0; i + 1 < cells.size(); ++i)
    for (size_t j = i + 1; j < cells.size(); ++j) {
      bool overlap = true;
      for (const auto& [axis, iv] : cells[i].bounds) {
        const Interval& jv = cells[j].bounds.at(axis);
        if (iv.hi < jv.lo || jv.hi < iv.lo) { overlap = false; break; }
      }
      if (overlap) throw InputError("overlapping cells in piecewise model");
    }
  // volume check: disjoint integer cells cover iff volumes add up
  auto volume = [](const Domain& d) {
    long double v = 1;
    for (const auto& [axis, iv] : d) v *= static_cast<long double>(iv.hi - iv.lo + 1);
    return v;
  };
  long double total = 0;
  for (const auto& c : cells) total += volume(c.bounds);
  if (total != volume(domain))
    throw InputError("piecewise model cells do not cover the domain");
}

}  // namespace perfmod
