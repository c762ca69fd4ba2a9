#include <doctest.h>

#include "perfmod/errors.hpp"
#include "perfmod/grid.hpp"

using namespace perfmod;

TEST_CASE("linear axis") {
  GridSpec spec = GridSpec::parse("n=lin:100:300:3");
  std::vector<Point> pts = generate_grid(spec);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].at("n") == 100);
  CHECK(pts[1].at("n") == 200);
  CHECK(pts[2].at("n") == 300);
}

TEST_CASE("logarithmic axis") {
  std::vector<Point> pts = generate_grid(GridSpec::parse("n=log:10:1000:3"));
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].at("n") == 10);
  CHECK(pts[1].at("n") == 100);
  CHECK(pts[2].at("n") == 1000);
}

TEST_CASE("explicit duplicate points rejected") {
  CHECK_THROWS_AS(generate_grid(GridSpec::parse("n=5,5,7")), InputError);
  CHECK_THROWS_AS(generate_grid(GridSpec::parse("n=7,5")), InputError);  // unsorted
  CHECK_THROWS_AS(generate_grid(GridSpec::parse("n=0,5")), InputError);
}

TEST_CASE("cross product traversal") {
  std::vector<Point> pts = generate_grid(GridSpec::parse("m=1,2;n=10,20,30"));
  REQUIRE(pts.size() == 6);
  CHECK(pts.front() == Point{{"m", 1}, {"n", 10}});
  CHECK(pts.back() == Point{{"m", 2}, {"n", 30}});
}

TEST_CASE("diagonal traversal zips axes") {
  std::vector<Point> pts = generate_grid(GridSpec::parse("diag;m=1,2;n=10,20"));
  REQUIRE(pts.size() == 2);
  CHECK(pts[0] == Point{{"m", 1}, {"n", 10}});
  CHECK(pts[1] == Point{{"m", 2}, {"n", 20}});
  CHECK_THROWS_AS(generate_grid(GridSpec::parse("diag;m=1,2;n=10,20,30")), InputError);
}

TEST_CASE("log collapse deduplicates") {
  // tiny range: many requested points collapse to few distinct integers
  std::vector<Point> pts = generate_grid(GridSpec::parse("n=log:2:4:10"));
  for (size_t i = 1; i < pts.size(); ++i)
    CHECK(pts[i].at("n") > pts[i - 1].at("n"));
  CHECK(pts.front().at("n") >= 2);
  CHECK(pts.back().at("n") <= 4);
}

TEST_CASE("grid generation is deterministic") {
  GridSpec spec = GridSpec::parse("m=log:7:911:9;n=lin:3:100:5");
  CHECK(generate_grid(spec) == generate_grid(spec));
}

TEST_CASE("bad specs") {
  CHECK_THROWS_AS(GridSpec::parse(""), InputError);
  CHECK_THROWS_AS(GridSpec::parse("n=lin:10:5:3"), InputError);   // lo > hi
  CHECK_THROWS_AS(GridSpec::parse("n=lin:0:5:3"), InputError);    // lo < 1
  CHECK_THROWS_AS(GridSpec::parse("n=lin:1:5:0"), InputError);    // count < 1
  CHECK_THROWS_AS(GridSpec::parse("n=lin:1:x:2"), InputError);
}
