#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "fklab/asymmetry.hpp"
#include "fklab/errors.hpp"
#include "oracles.hpp"

using namespace fklab;
using oracle::pi;

namespace {

// Area of the intersection of two unit disks whose centers are dist apart.
double lens_area(double dist) {
  return 2.0 * std::acos(dist / 2.0) - 0.5 * dist * std::sqrt(4.0 - dist * dist);
}

StarDomain near_sphere(std::mt19937_64& rng, double sup) {
  auto p = oracle::random_profile(rng, 8, 1.0, 2);
  p *= sup / p.sup_bound();
  return recenter_rescale(StarDomain(volume_correct(p)));
}

}  // namespace

TEST_CASE("intersection with a ball against lens and Monte Carlo oracles") {
  const StarDomain disk;
  for (double dist : {0.0, 0.1, 0.5, 1.3, 1.9}) {
    const double inter = intersection_with_ball(disk, {dist * std::cos(0.7), dist * std::sin(0.7)});
    CHECK(inter == doctest::Approx(lens_area(dist)).epsilon(1e-12));
  }
  CHECK(intersection_with_ball(disk, {2.5, 0.0}) == 0.0);

  // forced center d = 0.5 on the unit disk
  const double forced = fraenkel_at(disk, {0.5, 0.0});
  CHECK(forced == doctest::Approx(0.6299247).epsilon(1e-6));
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.5);
  const int n = 4000000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double x = u(rng), y = u(rng) - 0.25;
    const bool in_a = x * x + y * y < 1.0;
    const bool in_b = (x - 0.5) * (x - 0.5) + y * y < 1.0;
    hits += in_a != in_b;
  }
  const double mc = hits * (2.5 * 2.5) / n / pi;
  const double sigma = std::sqrt(mc * pi / 6.25 * (1 - mc * pi / 6.25) / n) * 6.25 / pi;
  CHECK(std::abs(forced - mc) <= 4 * sigma);

  // off-center star domain: compare with the mesh route
  const StarDomain d(BoundaryProfile::cosine(3, 0.15) + BoundaryProfile::sine(2, 0.1), {0.1, -0.2});
  const auto m = polar_mesh(d, 128);
  for (Point x : {Point{0.1, -0.2}, Point{0.4, 0.1}, Point{-0.9, 0.0}}) {
    CHECK(symmetric_difference_with_ball(d, x) ==
          doctest::Approx(symmetric_difference_mesh(m, x)).epsilon(1e-3));
  }
}

TEST_CASE("simplex search") {
  auto f = [](Point p) { return std::pow(p.x - 0.3, 2) + 3 * std::pow(p.y + 0.7, 2) + 0.5 * p.x * p.y; };
  const auto r = minimize_simplex(f, {1.0, 1.0}, {0.1, 1e-9, 5000});
  CHECK(r.converged);
  // exact minimizer of the quadratic
  const double det = 2 * 6 - 0.25;
  const double x = (2 * 0.3 * 6 - 0.5 * (-6 * 0.7)) / det;
  const double y = (2 * (-4.2) - 0.5 * 0.6) / det;
  CHECK(r.argmin.x == doctest::Approx(x).epsilon(1e-6));
  CHECK(r.argmin.y == doctest::Approx(y).epsilon(1e-6));
  CHECK_THROWS_AS(minimize_simplex(f, {}, {0.0, 1e-6, 10}), InvalidInput);
}

TEST_CASE("Fraenkel asymmetry") {
  const auto r0 = fraenkel(StarDomain::disk({0.3, 0.2}));
  CHECK(r0.value <= 1e-9);
  CHECK(r0.center.x == doctest::Approx(0.3).epsilon(1e-5));
  CHECK(r0.center.y == doctest::Approx(0.2).epsilon(1e-5));

  CHECK_THROWS_AS(fraenkel(StarDomain::disk({}, 1.1)), InvalidInput);

  // ellipses: the optimal ball is centered by symmetry; midpoint-rule oracle of
  // |E Delta B_1(0)| = |E| + pi - 2 int min(r, 1)^2 / 2
  std::vector<double> ratio;
  for (double eps : {0.02, 0.05, 0.1, 0.2}) {
    const auto e = ellipse(eps);
    const auto fr = fraenkel(e);
    const double inter = oracle::circle_quadrature([&](double t) { return 0.5 * std::pow(std::min(e.radius(t), 1.0), 2); }, 1 << 16);
    const double oracle_value = (2 * pi - 2 * inter) / pi;
    CHECK(fr.value == doctest::Approx(oracle_value).epsilon(1e-6));
    CHECK(norm(fr.center) <= 1e-5);
    CHECK(fr.value > 0.0);
    CHECK(fr.value < 2.0);
    ratio.push_back(fr.value / eps);
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  CHECK(*hi / *lo - 1 <= 0.15);
}

TEST_CASE("beta constant") {
  CHECK(std::abs(beta_const(2) - pi / 3) <= 1e-10);
  CHECK(std::abs(beta_quadrature(2) - beta_const(2)) <= 1e-10);
  CHECK(beta_const(3) == doctest::Approx(pi / 3).epsilon(1e-14));
  CHECK(beta_quadrature(3) == doctest::Approx(pi / 3).epsilon(1e-14));
  CHECK_THROWS_AS(beta_const(1), InvalidInput);
}

TEST_CASE("alpha on disks") {
  CHECK(std::abs(alpha(StarDomain::disk({0.7, -0.2}))) <= 1e-9);
  const double a11 = pi / 3 + 2 * pi * (std::pow(1.1, 3) / 3 - 1.1 * 1.1 / 2);
  CHECK(std::abs(alpha(StarDomain::disk({}, 1.1)) - a11) <= 1e-6);
  CHECK(alpha(StarDomain::disk({}, 1.1)) == doctest::Approx(0.0335103216).epsilon(1e-8));
  const double a09 = pi / 3 + 2 * pi * (std::pow(0.9, 3) / 3 - 0.9 * 0.9 / 2);
  CHECK(alpha(StarDomain::disk({-1.0, 2.0}, 0.9)) == doctest::Approx(a09).epsilon(1e-10));
  CHECK(a09 == doctest::Approx(0.0293215314).epsilon(1e-8));
}

TEST_CASE("alpha agrees with the mesh quadrature and the symmetric-difference form") {
  for (double eps : {0.1, 0.3}) {
    const auto e = ellipse(eps);
    const double a = alpha(e);
    const double am = alpha_mesh(polar_mesh(e, 128), {0.0, 0.0});
    CHECK(a == doctest::Approx(am).epsilon(2e-3));
    // int over Omega Delta B of ||x| - 1| in polar form about the center
    const double sd = oracle::circle_quadrature([&](double t) {
      const double r = e.radius(t);
      auto shell = [](double s) { return s * s * s / 3 - s * s / 2; };
      return std::abs(shell(r) - shell(1.0));
    }, 1 << 16);
    CHECK(a == doctest::Approx(sd).epsilon(1e-8));
  }
}

TEST_CASE("asymmetries are translation invariant") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 3; ++i) {
    const auto d = near_sphere(rng, 0.05);
    const auto t = translate(d, {0.37, -0.58});
    const auto r1 = asymmetry_report(d), r2 = asymmetry_report(t);
    CHECK(std::abs(r1.fraenkel - r2.fraenkel) <= 1e-9);
    CHECK(std::abs(r1.alpha - r2.alpha) <= 1e-9);
    CHECK(std::abs(r1.sym_diff_to_unit_ball_at_barycenter - r2.sym_diff_to_unit_ball_at_barycenter) <= 1e-9);
    CHECK(norm(r2.barycenter - r1.barycenter - Point{0.37, -0.58}) <= 1e-9);
  }
}

TEST_CASE("alpha lower and upper bounds") {
  std::mt19937_64 rng(33);
  double lower_ratio = 1e300, upper_ratio = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto p = oracle::random_profile(rng, 8, 1.0, 2);
    p *= 0.05 / p.sup_bound();
    p = volume_correct(p);
    const StarDomain d(p);
    const double a = alpha(d);
    CHECK(a >= 0.0);
    CHECK(annular_lower_bound(d) <= a + 1e-12);
    const double sd = symmetric_difference_with_ball(d, barycenter(d));
    lower_ratio = std::min(lower_ratio, a / (sd * sd));
    upper_ratio = std::max(upper_ratio, a / boundary_l2_sq(p));
  }
  CHECK(lower_ratio > 0.0);
  CHECK(upper_ratio < 1.0);

  for (double eps : {0.02, 0.2, 0.6}) CHECK(annular_lower_bound(ellipse(eps)) <= alpha(ellipse(eps)));
  CHECK(annular_lower_bound(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(annular_lower_bound(-1.0, 0.0), InvalidInput);
}

TEST_CASE("alpha is Lipschitz in the symmetric difference for nested sets") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double cmax = 0.0;
  for (int i = 0; i < 40; ++i) {
    auto inner = oracle::random_profile(rng, 6, 0.05, 1);
    inner.a0 = -0.2 + 0.3 * u(rng);
    // outer = inner + nonnegative bump (Fejer-type kernel at a random angle)
    BoundaryProfile bump = BoundaryProfile::constant(0.05 * u(rng));
    const double phase = 2 * pi * u(rng), amp = 0.1 * u(rng);
    for (int k = 1; k <= 4; ++k) {
      bump += BoundaryProfile::cosine(k, amp * (1 - k / 5.0) * std::cos(k * phase));
      bump += BoundaryProfile::sine(k, amp * (1 - k / 5.0) * std::sin(k * phase));
    }
    bump.a0 += amp * 0.5;
    const StarDomain d1(inner), d2(inner + bump);
    const double sym = volume(d2) - volume(d1);
    CHECK(sym > 0.0);
    cmax = std::max(cmax, std::abs(alpha(d1) - alpha(d2)) / sym);
  }
  CHECK(cmax < 4.0);
}

TEST_CASE("f_eta") {
  CHECK(f_eta(pi, 0.3) == 0.0);
  CHECK(f_eta(pi + 0.1, 0.2) == doctest::Approx(0.5));
  CHECK(f_eta(pi - 0.1, 0.2) == doctest::Approx(-0.02));
  CHECK_THROWS_AS(f_eta(1.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(f_eta(1.0, 1.5), InvalidInput);
  CHECK_THROWS_AS(f_eta(-1.0, 0.5), InvalidInput);

  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> s(0.0, 3 * pi), e(1e-3, 1.0);
  for (int i = 0; i < 1000; ++i) {
    double s1 = s(rng), s2 = s(rng);
    if (s1 < s2) std::swap(s1, s2);
    const double eta = e(rng);
    const double diff = f_eta(s1, eta) - f_eta(s2, eta);
    CHECK(eta * (s1 - s2) <= diff + 1e-12);
    CHECK(diff <= (s1 - s2) / eta + 1e-12);
  }
}

TEST_CASE("radial penalty and coercivity") {
  CHECK(radial_g(1.0, 0.5) == doctest::Approx(-pi / 16));
  CHECK(ball_energy(2) == doctest::Approx(-pi / 16));
  const auto th = eta_thresholds(2.0);
  CHECK(th.outer == doctest::Approx(2.0));
  CHECK(th.inner == doctest::Approx(1.0 / 16.0));
  CHECK(eta_threshold(2.0) == doctest::Approx(1.0 / 16.0));

  std::vector<double> grid;
  for (int i = 1; i <= 400; ++i) grid.push_back(2.0 * i / 400);

  const auto good = radial_coercivity(0.5 * eta_threshold(2.0), grid);
  CHECK(good.minimum_at_one);
  CHECK(good.r_at_min == 1.0);
  CHECK(good.g_min == doctest::Approx(-pi / 16));
  CHECK(good.left_slope > 0.0);
  CHECK(good.right_slope > 0.0);
  CHECK(std::isfinite(good.c4));
  CHECK(good.c4 > 0.0);

  // above the threshold the minimum leaves r = 1
  const auto bad = radial_coercivity(0.125, grid);
  CHECK_FALSE(bad.minimum_at_one);
  CHECK(bad.r_at_min < 1.0);
  // half of the outer-only threshold is not enough on its own
  CHECK_FALSE(radial_coercivity(0.5 * th.outer, grid).minimum_at_one);

  CHECK_THROWS_AS(radial_coercivity(0.01, {0.5, 0.9}), InvalidInput);
  CHECK_THROWS_AS(radial_coercivity(0.01, {-0.5, 1.5}), InvalidInput);
}

TEST_CASE("penalized functionals") {
  const double eta = 0.03;
  CHECK(penalized_F(StarDomain{}, eta, 64) == doctest::Approx(-pi / 16).epsilon(0.005));
  for (double r : {0.8, 1.2}) {
    CHECK(penalized_F(StarDomain::disk({}, r), eta, 64) == doctest::Approx(radial_g(r, eta)).epsilon(0.005));
  }
  const auto e = ellipse(0.1);
  CHECK(penalized_F(e, eta, 32) == doctest::Approx(energy_of(solve_torsion(polar_mesh(e, 32)).first)).epsilon(1e-12));

  const double F = -0.2;
  CHECK(penalized_G(F, 0.1, 0.1, 0.5) == doctest::Approx(F + 0.1));
  CHECK(penalized_G(F, 0.0, 0.1, 0.5) == doctest::Approx(F + std::sqrt(0.01 + 0.25 * 0.01)));
  const double Gd = penalized_G(StarDomain{}, eta, 0.1, 0.5, 32);
  CHECK(Gd - penalized_F(StarDomain{}, eta, 32) == doctest::Approx(0.1118034).epsilon(1e-6));
  CHECK_THROWS_AS(penalized_G(F, 0.0, 0.0, 0.5), InvalidInput);
  CHECK_THROWS_AS(penalized_G(F, 0.0, 0.1, 1.0), InvalidInput);

  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double F1 = -u(rng), F2 = -u(rng), a1 = u(rng), a2 = u(rng);
    const double eps = 0.01 + u(rng), sigma = 0.01 + 0.98 * u(rng);
    const double G1 = penalized_G(F1, a1, eps, sigma), G2 = penalized_G(F2, a2, eps, sigma);
    CHECK(G1 >= F1);
    CHECK(std::abs(G1 - G2) <= std::abs(F1 - F2) + sigma * std::abs(a1 - a2) + 1e-14);
  }
}
