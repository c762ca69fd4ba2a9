#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "perfmod/errors.hpp"
#include "perfmod/traces.hpp"
#include "reference_linalg.hpp"

using namespace perfmod;

namespace {

std::string brief(const KernelCall& c) {
  std::string s = c.kernel;
  auto side = c.binding.find("side");
  if (side != c.binding.end()) s += "-" + side->second;
  s += "(";
  bool first = true;
  for (const auto& [k, v] : c.sizes) {
    if (!first) s += ",";
    first = false;
    s += std::to_string(v);
  }
  return s + ")";
}

std::vector<std::string> briefs(const AlgorithmTrace& t) {
  std::vector<std::string> out;
  for (const KernelCall& c : t.calls) out.push_back(brief(c));
  return out;
}

}  // namespace

TEST_CASE("trinv variant 1 unrolled for n=4, b=2") {
  AlgorithmTrace t = trace_trinv(1, 4, 2);
  CHECK(t.algorithm == "trinv-v1");
  CHECK(briefs(t) == std::vector<std::string>{
                         "TRTRI(2)", "TRMM-R(2,2)", "TRSM-L(2,2)", "TRTRI(2)"});
}

TEST_CASE("trinv variant 2 swaps the panel update order") {
  AlgorithmTrace t = trace_trinv(2, 4, 2);
  CHECK(briefs(t) == std::vector<std::string>{
                         "TRTRI(2)", "TRSM-L(2,2)", "TRMM-R(2,2)", "TRTRI(2)"});
}

TEST_CASE("trinv variant 3 unrolled for n=4, b=2") {
  AlgorithmTrace t = trace_trinv(3, 4, 2);
  CHECK(briefs(t) == std::vector<std::string>{
                         "TRTRI(2)", "TRMM-R(2,2)", "TRTRI(2)", "TRMM-L(2,2)"});
}

TEST_CASE("trinv variant 4 unrolled for n=4, b=2") {
  AlgorithmTrace t = trace_trinv(4, 4, 2);
  CHECK(briefs(t) == std::vector<std::string>{
                         "TRTRI(2)", "TRMM-R(2,2)", "TRSM-L(2,2)", "TRTRI(2)"});
}

TEST_CASE("block size n degenerates to a single unblocked call") {
  for (int v = 1; v <= 4; ++v) {
    AlgorithmTrace t = trace_trinv(v, 9, 9);
    REQUIRE(t.calls.size() == 1);
    CHECK(t.calls[0].kernel == "TRTRI");
    CHECK(t.calls[0].sizes.at("n") == 9);
  }
}

TEST_CASE("ragged last block sizes") {
  // n=7, b=3 -> blocks 3,3,1
  AlgorithmTrace t = trace_trinv(1, 7, 3);
  std::vector<long long> diag;
  for (const KernelCall& c : t.calls)
    if (c.kernel == "TRTRI") diag.push_back(c.sizes.at("n"));
  CHECK(diag == std::vector<long long>{3, 3, 1});
}

TEST_CASE("every trinv trace sums to exactly n^3/3 flops") {
  KernelRegistry reg = KernelRegistry::builtin();
  CHECK(trace_flops(trace_trinv(3, 4, 2), reg) == Rational(64, 3));
  for (int v = 1; v <= 4; ++v)
    for (long long n : {1LL, 2LL, 3LL, 5LL, 7LL, 16LL, 33LL, 100LL, 1000LL, 4096LL})
      for (long long b : {1LL, 2LL, 3LL, (n + 1) / 2, n}) {
        if (b < 1 || b > n) continue;
        CHECK(trace_flops(trace_trinv(v, n, b), reg) == Rational(n * n * n, 3));
      }
}

TEST_CASE("sylvester column sweep unrolled for m=n=4, b=2") {
  AlgorithmTrace t = trace_sylvester(SylvesterSweep::Column, 4, 4, 2);
  CHECK(t.algorithm == "sylvester-column");
  REQUIRE(t.calls.size() == 3);
  CHECK(t.calls[0].kernel == "TRSYL-UNB");
  CHECK(t.calls[0].sizes == Point{{"m", 4}, {"n", 2}});
  CHECK(t.calls[1].kernel == "GEMM");
  CHECK(t.calls[1].sizes == Point{{"k", 2}, {"m", 4}, {"n", 2}});
  CHECK(t.calls[2].sizes == Point{{"m", 4}, {"n", 2}});
}

TEST_CASE("sylvester sweeps sum to exactly m*n*(m+n) flops") {
  KernelRegistry reg = KernelRegistry::builtin();
  for (SylvesterSweep sweep : {SylvesterSweep::Column, SylvesterSweep::Row})
    for (long long m : {1LL, 3LL, 8LL, 17LL, 64LL})
      for (long long n : {1LL, 5LL, 8LL, 33LL})
        for (long long b : {1LL, 2LL, 5LL, std::min(m, n)}) {
          if (b < 1 || b > std::min(m, n)) continue;
          CHECK(trace_flops(trace_sylvester(sweep, m, n, b), reg) ==
                Rational(m * n * (m + n)));
        }
}

TEST_CASE("blocked inversion variants are numerically correct") {
  // the traces are executable: running the same call sequences on real data
  // must reproduce the inverse
  const double eps = std::numeric_limits<double>::epsilon();
  for (int v = 1; v <= 4; ++v)
    for (int n : {5, 8, 13})
      for (long long b : {1LL, 3LL, static_cast<long long>(n)}) {
        refla::Matrix a = refla::random_lower(n, 1000 + v * 100 + n);
        refla::Matrix orig = a;
        refla::blocked_trinv(v, a, b);
        double res = refla::inverse_residual(orig, a);
        INFO("variant ", v, " n=", n, " b=", b, " residual=", res);
        CHECK(res <= 64.0 * n * eps);
      }
}

TEST_CASE("all variants agree with the unblocked inverse") {
  refla::Matrix a0 = refla::random_lower(11, 77);
  refla::Matrix ref = a0;
  refla::trtri_lower(refla::view(ref, 0, 0, 11, 11));
  for (int v = 1; v <= 4; ++v) {
    refla::Matrix a = a0;
    refla::blocked_trinv(v, a, 4);
    for (int i = 0; i < 11; ++i)
      for (int j = 0; j <= i; ++j)
        CHECK(a.at(i, j) == doctest::Approx(ref.at(i, j)).epsilon(1e-10));
  }
}

TEST_CASE("blocked sylvester sweeps solve the equation") {
  for (int m : {4, 7, 10})
    for (int n : {4, 9})
      for (long long b : {1LL, 3LL, static_cast<long long>(std::min(m, n))}) {
        refla::Matrix l = refla::random_lower(m, 5 + m);
        refla::Matrix u = refla::random_upper(n, 11 + n);
        refla::Matrix c = refla::random_dense(m, n, 3);
        refla::Matrix c0 = c;
        refla::blocked_sylvester_column(l, u, c, b);
        CHECK(refla::sylvester_residual(l, u, c, c0) < 1e-10);

        refla::Matrix c2 = c0;
        refla::blocked_sylvester_row(l, u, c2, b);
        CHECK(refla::sylvester_residual(l, u, c2, c0) < 1e-10);
      }
}

TEST_CASE("trace CSV export") {
  std::ostringstream out;
  export_trace_csv(trace_trinv(4, 4, 2), out);
  CHECK(out.str() ==
        "seq,kernel,flags,sizes,threads\n"
        "1,TRTRI,diag=N;uplo=L,n=2,1\n"
        "2,TRMM,diag=N;side=R;transa=N;uplo=L,m=2;n=2,1\n"
        "3,TRSM,diag=N;side=L;transa=N;uplo=L,m=2;n=2,1\n"
        "4,TRTRI,diag=N;uplo=L,n=2,1\n");
}

TEST_CASE("trace input validation") {
  CHECK_THROWS_AS(trace_trinv(0, 4, 2), InputError);
  CHECK_THROWS_AS(trace_trinv(5, 4, 2), InputError);
  CHECK_THROWS_AS(trace_trinv(1, 4, 5), InputError);
  CHECK_THROWS_AS(trace_trinv(1, 4, 0), InputError);
  CHECK_THROWS_AS(trace_sylvester(SylvesterSweep::Row, 4, 8, 5), InputError);
}
