#include "perfmod/traces.hpp"

#include <algorithm>
#include <ostream>

#include "perfmod/errors.hpp"

namespace perfmod {

namespace {

KernelCall trtri(long long n, int threads) {
  return {"TRTRI", {{"uplo", "L"}, {"diag", "N"}}, {{"n", n}}, threads};
}

KernelCall trmm(const std::string& side, long long m, long long n, int threads) {
  return {"TRMM",
          {{"side", side}, {"uplo", "L"}, {"transa", "N"}, {"diag", "N"}},
          {{"m", m}, {"n", n}},
          threads};
}

KernelCall trsm(const std::string& side, long long m, long long n, int threads) {
  return {"TRSM",
          {{"side", side}, {"uplo", "L"}, {"transa", "N"}, {"diag", "N"}},
          {{"m", m}, {"n", n}},
          threads};
}

KernelCall gemm(long long m, long long n, long long k, int threads) {
  return {"GEMM",
          {{"transa", "N"}, {"transb", "N"}},
          {{"m", m}, {"n", n}, {"k", k}},
          threads};
}

KernelCall trsyl(long long m, long long n, int threads) {
  return {"TRSYL-UNB",
          {{"trana", "N"}, {"tranb", "N"}},
          {{"m", m}, {"n", n}},
          threads};
}

}  // namespace

AlgorithmTrace trace_trinv(int variant, long long n, long long b, int threads) {
  if (variant < 1 || variant > 4)
    throw InputError("trinv variant must be 1..4");
  if (n < 1) throw InputError("trinv: n must be >= 1");
  if (b < 1 || b > n) throw InputError("trinv: need 1 <= b <= n");

  AlgorithmTrace trace;
  trace.algorithm = "trinv-v" + std::to_string(variant);
  trace.parameters = {{"n", n}, {"b", b}};

  for (long long i = 0; i < n; i += b) {
    long long bi = std::min(b, n - i);
    long long r = n - i - bi;
    switch (variant) {
      case 1:
        // panel row-block against the finished leading inverse, then the
        // current diagonal block
        if (i > 0) trace.calls.push_back(trmm("R", bi, i, threads));
        if (i > 0) trace.calls.push_back(trsm("L", bi, i, threads));
        trace.calls.push_back(trtri(bi, threads));
        break;
      case 2:
        // same blocks, opposite application order
        if (i > 0) trace.calls.push_back(trsm("L", bi, i, threads));
        if (i > 0) trace.calls.push_back(trmm("R", bi, i, threads));
        trace.calls.push_back(trtri(bi, threads));
        break;
      case 3:
        // eager two-sided updates: finish the panel row, push the rest
        // into the trailing block via GEMM
        trace.calls.push_back(trtri(bi, threads));
        if (i > 0) trace.calls.push_back(trmm("L", bi, i, threads));
        if (r > 0 && i > 0) trace.calls.push_back(gemm(r, i, bi, threads));
        if (r > 0) trace.calls.push_back(trmm("R", r, bi, threads));
        break;
      case 4:
        // finalize whole column blocks against the original trailing triangle
        trace.calls.push_back(trtri(bi, threads));
        if (r > 0) trace.calls.push_back(trmm("R", r, bi, threads));
        if (r > 0) trace.calls.push_back(trsm("L", r, bi, threads));
        break;
    }
  }
  return trace;
}

AlgorithmTrace trace_sylvester(SylvesterSweep sweep, long long m, long long n,
                               long long b, int threads) {
  if (m < 1 || n < 1) throw InputError("sylvester: m and n must be >= 1");
  if (b < 1 || b > std::min(m, n))
    throw InputError("sylvester: need 1 <= b <= min(m, n)");

  AlgorithmTrace trace;
  trace.algorithm = sweep == SylvesterSweep::Column ? "sylvester-column" : "sylvester-row";
  trace.parameters = {{"m", m}, {"n", n}, {"b", b}};

  if (sweep == SylvesterSweep::Column) {
    for (long long j = 0; j < n; j += b) {
      long long bj = std::min(b, n - j);
      long long r = n - j - bj;
      trace.calls.push_back(trsyl(m, bj, threads));
      if (r > 0) trace.calls.push_back(gemm(m, r, bj, threads));  // C2 -= X1 * U12
    }
  } else {
    for (long long i = 0; i < m; i += b) {
      long long bi = std::min(b, m - i);
      long long r = m - i - bi;
      trace.calls.push_back(trsyl(bi, n, threads));
      if (r > 0) trace.calls.push_back(gemm(r, n, bi, threads));  // C2 -= L21 * X1
    }
  }
  return trace;
}

Rational trace_flops(const AlgorithmTrace& trace, const KernelRegistry& registry) {
  Rational total(0);
  for (const KernelCall& c : trace.calls)
    total += flops(registry.get(c.kernel), c.binding, c.sizes);
  return total;
}

void export_trace_csv(const AlgorithmTrace& trace, std::ostream& out) {
  out << "seq,kernel,flags,sizes,threads\n";
  for (size_t i = 0; i < trace.calls.size(); ++i) {
    const KernelCall& c = trace.calls[i];
    out << (i + 1) << "," << c.kernel << "," << flag_string(c.binding, ';') << ","
        << [&] {
             std::string s = point_string(c.sizes);
             std::replace(s.begin(), s.end(), ',', ';');
             return s;
           }()
        << "," << c.threads << "\n";
  }
}

}  // namespace perfmod
