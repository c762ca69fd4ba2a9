#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "perfmod/errors.hpp"
#include "perfmod/polynomial.hpp"

using namespace perfmod;

namespace {

// Independent oracle: plain normal-equations solve, no QR.
std::vector<double> normal_equations_fit(
    const std::vector<std::pair<Point, double>>& samples,
    const std::vector<BasisTerm>& basis, Weighting weighting) {
  const size_t m = samples.size(), n = basis.size();
  Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd atb = Eigen::VectorXd::Zero(n);
  for (size_t i = 0; i < m; ++i) {
    double w = weighting == Weighting::Relative
                   ? 1.0 / (samples[i].second * samples[i].second)
                   : 1.0;
    Eigen::VectorXd row(n);
    for (size_t j = 0; j < n; ++j) row(j) = basis[j].eval(samples[i].first);
    ata += w * row * row.transpose();
    atb += w * row * samples[i].second;
  }
  Eigen::VectorXd c = ata.ldlt().solve(atb);
  return std::vector<double>(c.data(), c.data() + n);
}

}  // namespace

TEST_CASE("exact linear data") {
  std::vector<std::pair<Point, double>> data = {
      {{{"n", 1}}, 5.0}, {{{"n", 2}}, 7.0}, {{{"n", 3}}, 9.0}};
  std::vector<BasisTerm> basis = parse_basis("1, n");
  std::vector<double> c = ls_fit(data, basis, Weighting::None);
  CHECK(c[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(c[1] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("exact cubic recovery") {
  std::vector<std::pair<Point, double>> data;
  for (long long n = 1; n <= 8; ++n)
    data.push_back({{{"n", n}}, 4.0 + 0.5 * n * n * n});
  std::vector<double> c = ls_fit(data, parse_basis("1, n^3"), Weighting::Relative);
  CHECK(std::abs(c[0] - 4.0) / 4.0 < 1e-8);
  CHECK(std::abs(c[1] - 0.5) / 0.5 < 1e-8);
}

TEST_CASE("exact recovery across the whole term pool") {
  // any noiseless polynomial over the pool is reproduced within 1e-8 relative
  std::vector<BasisTerm> pool = term_pool({"m", "n"});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(0.1, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> truth(pool.size());
    for (double& v : truth) v = coef(rng);
    std::vector<std::pair<Point, double>> data;
    for (long long m = 1; m <= 8; ++m)
      for (long long n = 1; n <= 8; ++n) {
        Point p{{"m", m}, {"n", n}};
        double y = 0;
        for (size_t j = 0; j < pool.size(); ++j) y += truth[j] * pool[j].eval(p);
        data.push_back({p, y});
      }
    std::vector<double> c = ls_fit(data, pool, Weighting::Relative);
    for (size_t j = 0; j < pool.size(); ++j)
      CHECK(std::abs(c[j] - truth[j]) / truth[j] < 1e-8);
  }
}

TEST_CASE("matches the normal-equations oracle on noisy data") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<std::pair<Point, double>> data;
  for (long long n = 1; n <= 20; ++n) {
    double y = (1e-6 + 2e-9 * n * n * n) * (1.0 + noise(rng));
    data.push_back({{{"n", n}}, y});
  }
  std::vector<BasisTerm> basis = parse_basis("1, n, n^3");
  for (Weighting w : {Weighting::None, Weighting::Relative}) {
    std::vector<double> qr = ls_fit(data, basis, w);
    std::vector<double> ref = normal_equations_fit(data, basis, w);
    for (size_t j = 0; j < basis.size(); ++j)
      CHECK(std::abs(qr[j] - ref[j]) <=
            1e-9 * std::max(1.0, std::abs(ref[j])));
  }
}

TEST_CASE("rank deficiency names the dependent terms") {
  // only a single distinct m value: m and 1 are linearly dependent
  std::vector<std::pair<Point, double>> data;
  for (long long n = 1; n <= 6; ++n) data.push_back({{{"m", 4}, {"n", n}}, 1.0 + n});
  CHECK_THROWS_WITH_AS(ls_fit(data, parse_basis("1, m, n"), Weighting::None),
                       doctest::Contains("dependent terms"), InputError);
}

TEST_CASE("ls_fit preconditions") {
  std::vector<std::pair<Point, double>> two = {{{{"n", 1}}, 1.0}, {{{"n", 2}}, 2.0}};
  CHECK_THROWS_AS(ls_fit(two, parse_basis("1, n, n^2"), Weighting::None), InputError);
  std::vector<std::pair<Point, double>> neg = {{{{"n", 1}}, -1.0}, {{{"n", 2}}, 2.0}};
  CHECK_THROWS_AS(ls_fit(neg, parse_basis("1"), Weighting::Relative), InputError);
}

TEST_CASE("fit_quality") {
  PolynomialModel m;
  m.basis = parse_basis("1");
  std::vector<std::pair<Point, double>> val = {{{{"n", 1}}, 2.0}, {{{"n", 2}}, 2.0}};

  SUBCASE("perfect model") {
    m.coefficients = {{std::vector<double>{2.0}, {2.0}, {2.0}}};
    auto [mx, mean] = fit_quality(m, val);
    CHECK(mx == 0.0);
    CHECK(mean == 0.0);
  }
  SUBCASE("constant relative offset") {
    m.coefficients = {{std::vector<double>{2.2}, {2.2}, {2.2}}};
    auto [mx, mean] = fit_quality(m, val);
    CHECK(mx == doctest::Approx(0.1));
    CHECK(mean == doctest::Approx(0.1));
  }
}

TEST_CASE("fit_quality mixed errors") {
  PolynomialModel m;
  m.basis = parse_basis("1");
  m.coefficients = {{std::vector<double>{2.0}, {2.0}, {2.0}}};
  // point 1 exact, point 2 off by 10% relative
  std::vector<std::pair<Point, double>> val = {{{{"n", 1}}, 2.0},
                                               {{{"n", 2}}, 2.0 / 0.9}};
  auto [mx, mean] = fit_quality(m, val);
  CHECK(mx == doctest::Approx(0.10));
  CHECK(mean == doctest::Approx(0.05));
}

TEST_CASE("term pool spans the BLAS-3 cost shapes") {
  std::vector<BasisTerm> pool = term_pool({"m", "n", "k"});
  auto has = [&](const std::string& label) {
    for (const BasisTerm& t : pool)
      if (t.label() == label) return true;
    return false;
  };
  CHECK(has("1"));
  CHECK(has("k*m*n"));
  CHECK(has("n^3"));
  CHECK(has("m*n^2"));
  CHECK(has("m^2*n"));
  CHECK_FALSE(has("m^2*n^2"));  // total degree cap
  // per-variable cap
  for (const BasisTerm& t : pool)
    for (const auto& [var, e] : t.exps) CHECK(e <= 3);
  // no duplicates
  for (size_t i = 0; i + 1 < pool.size(); ++i)
    for (size_t j = i + 1; j < pool.size(); ++j) CHECK(!(pool[i] == pool[j]));
}

TEST_CASE("basis parsing") {
  std::vector<BasisTerm> b = parse_basis("1 + n^3 + m*n");
  REQUIRE(b.size() == 3);
  CHECK(b[0].label() == "1");
  CHECK(b[1].label() == "n^3");
  CHECK(b[2].label() == "m*n");
  CHECK_THROWS_AS(parse_basis(""), InputError);
}
