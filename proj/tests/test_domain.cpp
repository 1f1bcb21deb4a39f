#include "doctest.h"

#include <cmath>
#include <random>

#include "fklab/domain.hpp"
#include "fklab/errors.hpp"
#include "oracles.hpp"

using namespace fklab;
using oracle::pi;

namespace {

// Polygon through n boundary points of d.
std::vector<std::array<double, 2>> polygon(const StarDomain& d, int n) {
  std::vector<std::array<double, 2>> v(n);
  for (int j = 0; j < n; ++j) {
    const Point p = d.boundary_point(2 * pi * j / n);
    v[j] = {p.x, p.y};
  }
  return v;
}

}  // namespace

TEST_CASE("volume") {
  CHECK(volume(StarDomain{}) == doctest::Approx(pi));
  CHECK(volume(StarDomain(BoundaryProfile::constant(0.3))) == doctest::Approx(pi * 1.69));
  CHECK(volume(StarDomain(BoundaryProfile::cosine(3, 0.2))) == doctest::Approx(1.02 * pi).epsilon(1e-14));

  std::mt19937_64 rng(21);
  for (int i = 0; i < 10; ++i) {
    const StarDomain d(oracle::random_profile(rng, 6, 0.05), {0.2, -0.4});
    const double poly = oracle::polygon_moments(polygon(d, 20000)).first;
    CHECK(volume(d) == doctest::Approx(poly).epsilon(1e-7));
  }
}

TEST_CASE("barycenter") {
  CHECK(norm(barycenter(StarDomain{})) < 1e-15);
  const Point c = barycenter(StarDomain::disk({0.3, -0.1}));
  CHECK(c.x == doctest::Approx(0.3));
  CHECK(c.y == doctest::Approx(-0.1));

  const double s = 0.1;
  const Point b = barycenter(StarDomain(BoundaryProfile::cosine(1, s)));
  CHECK(b.x == doctest::Approx(s * (1 + s * s / 4) / (1 + s * s / 2)).epsilon(1e-14));
  CHECK(std::abs(b.y) < 1e-16);

  std::mt19937_64 rng(22);
  for (int i = 0; i < 10; ++i) {
    const StarDomain d(oracle::random_profile(rng, 5, 0.08), {-0.5, 0.25});
    const auto [area, g] = oracle::polygon_moments(polygon(d, 20000));
    const Point x = barycenter(d);
    CHECK(x.x == doctest::Approx(g[0]).epsilon(1e-7));
    CHECK(x.y == doctest::Approx(g[1]).epsilon(1e-7));
  }

  for (double eps : {0.0, 0.05, 0.3, 0.9}) CHECK(norm(barycenter(ellipse(eps))) <= 1e-12);
}

TEST_CASE("profile relative to an offset center") {
  const auto fit0 = profile_relative_to(StarDomain{}, {0, 0});
  CHECK(fit0.profile.sup_bound() == 0.0);

  // unit circle seen from (0.2, 0): r = -0.2 cos t + sqrt(1 - 0.04 sin^2 t)
  const auto fit = profile_relative_to(StarDomain{}, {0.2, 0.0}, 24);
  for (int j = 0; j < 37; ++j) {
    const double t = 2 * pi * j / 37 + 0.01;
    const double exact = -0.2 * std::cos(t) + std::sqrt(1 - 0.04 * std::sin(t) * std::sin(t));
    CHECK(1 + fit.profile(t) == doctest::Approx(exact).epsilon(1e-9));
  }
  CHECK(fit.tail_energy < 1e-18);

  const StarDomain d(BoundaryProfile::cosine(2, 0.05));
  const auto same = profile_relative_to(d, barycenter(d));
  CHECK(same.profile.a(2) == doctest::Approx(0.05).epsilon(1e-12));

  CHECK_THROWS_AS(profile_relative_to(StarDomain{}, {1.5, 0.0}), NotStarShaped);
  // a strongly non-convex boundary seen from far off-center
  const StarDomain star(BoundaryProfile::cosine(5, 0.6));
  CHECK_THROWS_AS(profile_relative_to(star, {0.35, 0.0}), NotStarShaped);
}

TEST_CASE("recenter and rescale") {
  const auto unit = recenter_rescale(StarDomain::disk({1.0, 1.0}, 2.0));
  CHECK(unit.profile.sup_bound() < 1e-12);
  CHECK(norm(unit.center) == 0.0);
  CHECK(volume(unit) == doctest::Approx(pi).epsilon(1e-12));

  const auto c2 = recenter_rescale(StarDomain(BoundaryProfile::cosine(2, 0.1)));
  const double f = 1.0 / std::sqrt(1.005);
  CHECK(c2.profile.a(2) == doctest::Approx(0.1 * f).epsilon(1e-12));
  CHECK(1 + c2.profile.a0 == doctest::Approx(f).epsilon(1e-12));

  // off-center input, compared against a polygon resampling of the original
  const StarDomain d(BoundaryProfile::cosine(1, 0.1) + BoundaryProfile::sine(3, 0.04));
  const auto r = recenter_rescale(d);
  CHECK(volume(r) == doctest::Approx(pi).epsilon(1e-10));
  CHECK(norm(barycenter(r)) <= 1e-8);
  const auto [area, g] = oracle::polygon_moments(polygon(d, 40000));
  const double scale = std::sqrt(pi / area);
  // a boundary point of the original maps to scale (p - g) and lies on the new boundary
  for (int j = 0; j < 23; ++j) {
    const Point p = d.boundary_point(2 * pi * j / 23);
    const Point q = scale * (p - Point{g[0], g[1]});
    CHECK(norm(q) == doctest::Approx(r.radius(std::atan2(q.y, q.x))).epsilon(1e-7));
  }

  const auto again = recenter_rescale(r);
  CHECK(std::abs(again.profile.a0 - r.profile.a0) <= 1e-8);
  for (int k = 1; k <= r.profile.max_mode(); ++k) {
    CHECK(std::abs(again.profile.a(k) - r.profile.a(k)) <= 1e-8);
    CHECK(std::abs(again.profile.b(k) - r.profile.b(k)) <= 1e-8);
  }
}

TEST_CASE("ellipse family") {
  const auto e0 = ellipse(0.0);
  for (double t : {0.0, 1.0, 2.5}) CHECK(e0.radius(t) == doctest::Approx(1.0));
  const auto e = ellipse(0.1);
  CHECK(e.radius(pi / 2) / e.radius(0.0) == doctest::Approx(1.0 / std::sqrt(1.1)).epsilon(1e-14));
  for (double eps : {0.01, 0.1, 0.5, 0.99}) CHECK(volume(ellipse(eps)) == doctest::Approx(pi).epsilon(1e-10));
  CHECK_THROWS_AS(ellipse(-0.1), InvalidInput);
  CHECK_THROWS_AS(ellipse(1.0), InvalidInput);
}

TEST_CASE("volume-corrected profiles") {
  CHECK(volume_corrected_profile(3, 0.0).is_zero());
  CHECK(volume_corrected_profile(2, 0.2).a0 == doctest::Approx(std::sqrt(0.98) - 1).epsilon(1e-14));
  CHECK(volume(StarDomain(volume_corrected_profile(2, 0.05))) == doctest::Approx(pi).epsilon(1e-12));
  CHECK_THROWS_AS(volume_corrected_profile(2, 1.0), InvalidInput);
  CHECK_THROWS_AS(volume_corrected_profile(0, 0.1), InvalidInput);

  std::mt19937_64 rng(23);
  for (int i = 0; i < 20; ++i) {
    const auto p = volume_correct(oracle::random_profile(rng, 8, 0.05, 1));
    CHECK(volume(StarDomain(p)) == doctest::Approx(pi).epsilon(1e-13));
  }
}

TEST_CASE("volume flow") {
  const auto p = volume_corrected_profile(2, 0.1);
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    CHECK(std::abs(volume(volume_flow(p, t)) - pi) <= 1e-10);
  }
  const auto d0 = volume_flow(p, 0.0);
  const auto d1 = volume_flow(p, 1.0);
  for (double th : {0.0, 0.4, 2.0, 5.0}) {
    CHECK(d0.radius(th) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d1.radius(th) == doctest::Approx(1.0 + p(th)).epsilon(1e-14));
  }

  // interpolation identity for arbitrary volumes, volume by polygon quadrature
  std::mt19937_64 rng(24);
  for (int i = 0; i < 30; ++i) {
    auto q = oracle::random_profile(rng, 5, 0.3 / 11.0);
    const double vq = volume(StarDomain(q));
    for (double t : {0.1, 0.6, 0.9}) {
      const double v = volume(volume_flow(q, t));
      CHECK(std::abs(v - (pi + t * (vq - pi))) <= 1e-12);
    }
    const double poly = oracle::polygon_moments(polygon(volume_flow(q, 0.6), 20000)).first;
    CHECK(volume(volume_flow(q, 0.6)) == doctest::Approx(poly).epsilon(1e-7));
  }
  CHECK_THROWS_AS(volume_flow(p, 1.5), InvalidInput);
  CHECK_THROWS_AS(volume_flow(BoundaryProfile::constant(-1.0), 1.0), InvalidInput);

  const FlowFamily fam{p};
  CHECK(fam.at(0.5).radius(0.0) == volume_flow(p, 0.5).radius(0.0));
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(StarDomain(BoundaryProfile::constant(-1.0)).validate(), InvalidInput);
  CHECK_THROWS_AS(StarDomain::disk({}, 0.0), InvalidInput);
  CHECK_NOTHROW(StarDomain(BoundaryProfile::cosine(2, 0.5)).validate());
}
