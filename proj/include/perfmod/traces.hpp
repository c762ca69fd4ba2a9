#ifndef PERFMOD_TRACES_HPP_
#define PERFMOD_TRACES_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "perfmod/kernels.hpp"
#include "perfmod/rational.hpp"

namespace perfmod {

struct KernelCall {
  std::string kernel;
  FlagBinding binding;
  Point sizes;
  int threads{1};
};

// Ordered kernel-call sequence a blocked algorithm would issue.
struct AlgorithmTrace {
  std::string algorithm;               // "trinv-v3", "sylvester-column", ...
  std::map<std::string, long long> parameters;  // n, b (and m for Sylvester)
  std::vector<KernelCall> calls;
};

// Blocked lower-triangular inversion L <- L^-1, four mathematically
// equivalent variants. Blocks of size b, last block min(b, n - i); calls
// with any zero dimension are omitted.
AlgorithmTrace trace_trinv(int variant, long long n, long long b, int threads = 1);

enum class SylvesterSweep { Row, Column };

// Blocked solve of L X + X U = C (L lower m x m, U upper n x n).
AlgorithmTrace trace_sylvester(SylvesterSweep sweep, long long m, long long n,
                               long long b, int threads = 1);

// Exact flop total of the trace under the registry's formulas.
Rational trace_flops(const AlgorithmTrace& trace, const KernelRegistry& registry);

// CSV audit format: seq,kernel,flags,sizes,threads
void export_trace_csv(const AlgorithmTrace& trace, std::ostream& out);

}  // namespace perfmod

#endif  // PERFMOD_TRACES_HPP_
