#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cadlag/errors.hpp"
#include "cadlag/paths.hpp"
#include "cadlag/tightness.hpp"
#include "support/oracles.hpp"
#include "support/random_laws.hpp"

using namespace cadlag;

namespace {

CadlagPath bump_path() {
  // 1 on [1,2), 0 elsewhere on [0,3]
  return CadlagPath::scalar(TimeHorizon::finite(3.0), {0, 1, 2}, {0, 1, 0});
}

}  // namespace

TEST_CASE("eval at a jump") {
  auto w = CadlagPath::scalar(TimeHorizon::finite(2.0), {0, 1}, {0, 2});
  CHECK(eval(w, 0, 1.0, Side::right) == 2.0);
  CHECK(eval(w, 0, 1.0, Side::left) == 0.0);
  CHECK(eval(w, 0, 0.5) == 0.0);
  CHECK(eval(w, 0, 2.0) == 2.0);
  CHECK_THROWS_AS(eval(w, 0, 2.5), DomainError);
}

TEST_CASE("restriction") {
  const auto w = bump_path();
  auto r = restrict_path(w, 0.5);
  CHECK(r.horizon() == TimeHorizon::finite(0.5));
  CHECK(r.coordinate(0).breakpoints == std::vector<double>{0});
  CHECK(r.coordinate(0).values == std::vector<double>{0});
  CHECK(restrict_path(w, 3.0) == w);
  auto mid = restrict_path(w, 1.5);
  CHECK(mid.coordinate(0).breakpoints == std::vector<double>{0, 1});
  CHECK(mid.coordinate(0).values == std::vector<double>{0, 1});
  CHECK(mid.horizon().end() == 1.5);
  CHECK_THROWS(restrict_path(w, 0.0));
}

TEST_CASE("sup norm, l1 value and total variation") {
  const auto h = TimeHorizon::finite(3.0);
  CHECK(sup_norm(CadlagPath::constant(h, {0.0})) == 0.0);
  auto w = CadlagPath::scalar(h, {0, 1, 2}, {0, 2, 0});
  CHECK(sup_norm(w) == 2.0);
  CadlagPath two(h, {{{0, 1}, {1, -3}}, {{0}, {2}}});
  CHECK(sup_norm(two) == 3.0);

  CHECK(l1_value(CadlagPath::constant(h, {0, 0}), 1.7) == 0.0);
  CHECK(l1_value(CadlagPath::constant(h, {1, -2}), 1.0) == 3.0);
  CHECK(l1_value(CadlagPath::constant(h, {-0.5, 0.5, 1}), 0.0) == 2.0);

  CHECK(total_variation(CadlagPath::constant(h, {-2.5})) == 2.5);
  CHECK(total_variation(w) == 4.0);
  CadlagPath tv(h, {{{0}, {1}}, {{0, 1}, {0, -1}}});
  CHECK(total_variation(tv) == 2.0);
}

TEST_CASE("upcrossing examples") {
  const auto h = TimeHorizon::finite(3.0);
  auto c = CadlagPath::constant(h, {1.0});
  CHECK(upcrossings(c, 0, 0.5, 1.5) == 0);
  CHECK(upcrossings(c, 0, -5, 5) == 0);
  auto w = CadlagPath::scalar(h, {0, 1, 2}, {0, 2, 0});
  CHECK(upcrossings(w, 0, 0.5, 1.5) == 1);
  auto mono = CadlagPath::scalar(h, {0, 1, 2}, {0, 1, 2});
  CHECK(upcrossings(mono, 0, 0.5, 1.5) == 1);
  CHECK_THROWS_AS(upcrossings(w, 0, 1.0, 1.0), DomainError);
}

TEST_CASE("partition upcrossings use disjoint ordered cells") {
  // values 0, -1, 2, 3 on unit segments; cells [0,2) and [2,4]
  auto w = CadlagPath::scalar(TimeHorizon::finite(4.0), {0, 1, 2, 3}, {0, -1, 2, 3});
  CHECK(upcrossings(w, 0, -0.5, 1.0, Partition({0, 2, 4})) == 1);
  CHECK(upcrossings(w, 0, -0.5, 1.0, Partition({0, 4})) == 0);
  CHECK(upcrossings(w, 0, -0.5, 1.0) == 1);
}

TEST_CASE("construction validates and canonicalises") {
  const auto h = TimeHorizon::finite(2.0);
  CHECK_THROWS_AS(CadlagPath::scalar(h, {0.5, 1}, {0, 1}), ValidationError);
  CHECK_THROWS_AS(CadlagPath::scalar(h, {0, 1, 1}, {0, 1, 2}), ValidationError);
  CHECK_THROWS_AS(CadlagPath::scalar(h, {0, 3}, {0, 1}), ValidationError);
  CHECK_THROWS_AS(CadlagPath::scalar(h, {0, 1}, {0}), ValidationError);
  CHECK_THROWS_AS(TimeHorizon::finite(0.0), ValidationError);
  auto merged = CadlagPath::scalar(h, {0, 0.5, 1}, {1, 1, 2});
  CHECK(merged.coordinate(0).breakpoints == std::vector<double>{0, 1});
  CHECK(merged == CadlagPath::scalar(h, {0, 1}, {1, 2}));
  CHECK(merged.jump_times() == std::vector<double>{1});
  CHECK_THROWS(Partition({0.1, 1}));
  CHECK_THROWS(Partition({0, 1, 1}));
}

TEST_CASE("half-line paths") {
  auto h = TimeHorizon::half_line(20.0);
  auto w = CadlagPath::scalar(h, {0, 1}, {0, 1});
  CHECK(eval(w, 0, 100.0) == 1.0);
  auto r = restrict_path(w, 5.0);
  CHECK(r.horizon().is_finite());
  CHECK(r.coordinate(0).values == std::vector<double>{0, 1});
}

TEST_CASE("properties on random step paths") {
  std::mt19937_64 rng(11);
  const auto levels = default_levels();
  for (int trial = 0; trial < 300; ++trial) {
    const double T = 4.0;
    auto w = testsupport::random_step_path(rng, T, 8);
    const auto& c = w.coordinate(0);

    for (std::size_t j = 0; j < c.breakpoints.size(); ++j) {
      const double s = c.breakpoints[j];
      const double next = j + 1 < c.breakpoints.size() ? c.breakpoints[j + 1] : T;
      for (double frac : {0.25, 0.5, 0.999}) {
        CHECK(eval(w, 0, s) == eval(w, 0, s + frac * (next - s)));
      }
    }

    const double t = 0.25 + std::floor(testsupport::uniform(rng, 0, 15)) * 0.25;
    const double t2 = t / 2;
    CHECK(restrict_path(restrict_path(w, t), t2) == restrict_path(w, t2));
    CHECK(sup_norm(restrict_path(w, t)) <= sup_norm(w));
    if (t >= c.breakpoints.back()) CHECK(sup_norm(restrict_path(w, t)) == sup_norm(w));

    if (c.values.front() == 0.0) CHECK(total_variation(w) >= sup_norm(w));

    for (auto [a, b] : levels) {
      const auto n = upcrossings(w, 0, a, b);
      CHECK(n == testsupport::brute_upcrossings(c.values, a, b));
      auto full = c.breakpoints;
      full.push_back(T);
      CHECK(n == upcrossings(w, 0, a, b, Partition(full)));
      // wider levels cannot increase the count
      CHECK(upcrossings(w, 0, a - 0.5, b + 0.5) <= n);
      // any coarser partition undercounts
      std::vector<double> coarse{0.0};
      for (std::size_t j = 1; j < c.breakpoints.size(); j += 2) coarse.push_back(c.breakpoints[j]);
      coarse.push_back(T);
      CHECK(upcrossings(w, 0, a, b, Partition(coarse)) <= n);
    }
  }
}
