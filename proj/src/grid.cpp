#include "perfmod/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "perfmod/errors.hpp"

namespace perfmod {

void AxisSpec::validate() const {
  if (name.empty()) throw InputError("grid axis without a name");
  if (scheme == Scheme::Explicit) {
    if (values.empty()) throw InputError("axis " + name + ": empty explicit list");
    for (size_t i = 0; i < values.size(); ++i) {
      if (values[i] < 1)
        throw InputError("axis " + name + ": explicit point < 1");
      if (i > 0 && values[i] <= values[i - 1])
        throw InputError("axis " + name + ": explicit list must be strictly ascending (duplicate point " +
                         std::to_string(values[i]) + ")");
    }
  } else {
    if (lo < 1 || lo > hi)
      throw InputError("axis " + name + ": need 1 <= lo <= hi");
    if (count < 1) throw InputError("axis " + name + ": point count must be >= 1");
  }
}

std::vector<long long> log_spaced(long long lo, long long hi, int count) {
  std::vector<long long> out;
  if (count == 1 || lo == hi) return {lo};
  double llo = std::log(static_cast<double>(lo));
  double lhi = std::log(static_cast<double>(hi));
  for (int i = 0; i < count; ++i) {
    double v = std::exp(llo + (lhi - llo) * i / (count - 1));
    long long p = std::llround(v);
    p = std::clamp(p, lo, hi);
    if (out.empty() || p != out.back()) out.push_back(p);
  }
  return out;
}

std::vector<long long> AxisSpec::points() const {
  validate();
  switch (scheme) {
    case Scheme::Explicit: return values;
    case Scheme::Logarithmic: return log_spaced(lo, hi, count);
    case Scheme::Linear: {
      std::vector<long long> out;
      if (count == 1 || lo == hi) return {lo};
      for (int i = 0; i < count; ++i) {
        long long p = std::llround(lo + static_cast<double>(hi - lo) * i / (count - 1));
        if (out.empty() || p != out.back()) out.push_back(p);
      }
      return out;
    }
  }
  throw InputError("corrupt axis spec");
}

std::vector<Point> generate_grid(const GridSpec& spec) {
  if (spec.axes.empty()) throw InputError("grid with no axes");
  std::vector<std::vector<long long>> lists;
  for (const auto& a : spec.axes) lists.push_back(a.points());

  std::vector<Point> out;
  if (spec.traversal == GridSpec::Traversal::Diagonal) {
    for (const auto& l : lists)
      if (l.size() != lists[0].size())
        throw InputError("diagonal traversal requires equal point counts on every axis");
    for (size_t i = 0; i < lists[0].size(); ++i) {
      Point p;
      for (size_t a = 0; a < lists.size(); ++a) p[spec.axes[a].name] = lists[a][i];
      out.push_back(std::move(p));
    }
  } else {
    std::vector<size_t> idx(lists.size(), 0);
    for (;;) {
      Point p;
      for (size_t a = 0; a < lists.size(); ++a) p[spec.axes[a].name] = lists[a][idx[a]];
      out.push_back(std::move(p));
      size_t a = lists.size();
      while (a > 0) {
        --a;
        if (++idx[a] < lists[a].size()) break;
        idx[a] = 0;
        if (a == 0) { a = SIZE_MAX; break; }
      }
      if (a == SIZE_MAX) break;
    }
  }
  if (out.empty()) throw InputError("grid produced no points");
  return out;
}

GridSpec GridSpec::parse(const std::string& text) {
  GridSpec spec;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part == "diag") { spec.traversal = Traversal::Diagonal; continue; }
    if (part.empty()) continue;
    size_t eq = part.find('=');
    if (eq == std::string::npos)
      throw InputError("grid axis must be name=spec: '" + part + "'");
    AxisSpec axis;
    axis.name = part.substr(0, eq);
    std::string rest = part.substr(eq + 1);
    auto fields = [&] {
      std::vector<std::string> f;
      std::stringstream fs(rest);
      std::string x;
      while (std::getline(fs, x, ':')) f.push_back(x);
      return f;
    }();
    try {
      if (fields.size() == 4 && (fields[0] == "lin" || fields[0] == "log")) {
        axis.scheme = fields[0] == "lin" ? AxisSpec::Scheme::Linear
                                         : AxisSpec::Scheme::Logarithmic;
        axis.lo = std::stoll(fields[1]);
        axis.hi = std::stoll(fields[2]);
        axis.count = std::stoi(fields[3]);
      } else if (fields.size() == 1) {
        axis.scheme = AxisSpec::Scheme::Explicit;
        std::stringstream vs(fields[0]);
        std::string v;
        while (std::getline(vs, v, ',')) axis.values.push_back(std::stoll(v));
      } else {
        throw InputError("bad grid axis spec: '" + part + "'");
      }
    } catch (const std::invalid_argument&) {
      throw InputError("bad number in grid axis spec: '" + part + "'");
    }
    axis.validate();
    spec.axes.push_back(std::move(axis));
  }
  if (spec.axes.empty()) throw InputError("empty grid spec");
  return spec;
}

}  // namespace perfmod
