#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "fklab/errors.hpp"
#include "fklab/stability.hpp"
#include "oracles.hpp"

using namespace fklab;
using oracle::pi;

namespace {

StabilityEvaluator& shared() {
  static StabilityEvaluator ev;
  return ev;
}

StabilityEvaluator& coarse() {
  static StabilityEvaluator ev([] {
    MeshPlan p;
    p.rings = 32;
    p.rings_fine = 64;
    return p;
  }());
  return ev;
}

// (E(ellipse) - E(B1)) / pi^2 for the volume-pi ellipse x^2 + (1 + eps) y^2 <= c
double ellipse_deficit(double eps) {
  const double a = std::pow(1 + eps, 0.25);
  const double b = a / std::sqrt(1 + eps);
  return (oracle::ellipse_energy(a, b) + pi / 16) / (pi * pi);
}

}  // namespace

TEST_CASE("Richardson extrapolation and observed order") {
  const double Q = 0.7, C = 3.0;
  auto at = [&](double h, double p) { return Q + C * std::pow(h, p); };
  const auto e2 = richardson(at(0.4, 2), at(0.2, 2), at(0.1, 2));
  CHECK(e2.value == doctest::Approx(Q).epsilon(1e-14));
  CHECK(e2.order == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(e2.flagged);

  const auto e1 = richardson(at(0.4, 1), at(0.2, 1), at(0.1, 1));
  CHECK(e1.order == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e1.flagged);

  const auto flat = richardson(0.5, 0.5, 0.5);
  CHECK(std::isnan(flat.order));
  CHECK_FALSE(flat.flagged);
  CHECK(flat.value == 0.5);

  CHECK(richardson(1.0, 0.0, 1.0).flagged);  // oscillating levels

  MeshPlan bad;
  bad.rings_fine = 100;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad.rings = 6;
  bad.rings_fine = 12;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("energy deficit") {
  auto& ev = shared();
  const double tol = 2e-4 * (pi / 16) / (pi * pi);
  CHECK(std::abs(ev.energy_deficit(StarDomain{}).value) <= tol);
  CHECK(std::abs(ev.energy_deficit(StarDomain::disk({0.3, -0.2}, 1.7)).value) <= tol);

  for (double eps : {0.05, 0.1, 0.2}) {
    const auto D = ev.energy_deficit(ellipse(eps));
    CHECK(D.value > 0.0);
    CHECK(D.value == doctest::Approx(ellipse_deficit(eps)).epsilon(1e-4));
    // extrapolation beats the finest level
    CHECK(std::abs(D.value - ellipse_deficit(eps)) < std::abs(D.fine - ellipse_deficit(eps)));
  }

  const auto base = ev.energy_deficit(ellipse(0.1)).value;
  CHECK(ev.energy_deficit(dilate(ellipse(0.1), 1.9)).value == doctest::Approx(base).epsilon(1e-9));
  CHECK(ev.energy_deficit(dilate(ellipse(0.1), 0.6)).value == doctest::Approx(base).epsilon(1e-9));

  CHECK_THROWS_AS(ev.energy_difference(dilate(ellipse(0.1), 1.1)), InvalidInput);
}

TEST_CASE("matched deficit converges with second order on the ellipse family") {
  // observed order from three consecutive levels past the preasymptotic range
  MeshPlan plan;
  plan.rings = 128;
  plan.rings_fine = 256;
  StabilityEvaluator ev(plan);
  for (double eps : {0.1, 0.2}) {
    const auto D = ev.energy_deficit(ellipse(eps));
    CHECK(D.order >= 1.8);
    CHECK_FALSE(D.flagged);
  }
}

TEST_CASE("Kohler-Jobin exponent") {
  CHECK(kj_exponent(1, 2) == 1.0);
  CHECK(kj_exponent(2, 2) == 0.5);
  CHECK(kj_exponent(6, 3) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  for (double q = 1.0; q < 6.0; q += 0.25) {
    const double t = kj_exponent(q, 3);
    CHECK(t > 0.0);
    CHECK(t <= 1.0);
  }
  CHECK_THROWS_AS(kj_exponent(0.5, 2), InvalidInput);
}

TEST_CASE("full report on the disk") {
  const auto r = shared().evaluate(StarDomain{}, {1.5, 2.0, 3.0}, "disk", 0.0);
  CHECK(r.id() == "disk:0");
  CHECK(r.deficit_E == 0.0);
  CHECK(r.deficit_lambda == 0.0);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(r.deficit_FK[j] == 0.0);
    CHECK(std::abs(r.kj_slack[j]) <= 1e-12);
    CHECK(std::abs(r.cappio[j].lhs) <= 1e-12);
    CHECK(std::abs(r.cappio[j].rhs) <= 1e-12);
    CHECK(r.cappio[j].holds);
  }
  CHECK(r.fraenkel <= 1e-6);
  CHECK(std::isnan(r.ratio_E_A2));
  CHECK(std::isnan(r.ratio_FK_A2[1]));
  CHECK(std::isnan(r.extrap_order));
  CHECK(sign_violations(r).empty());
  CHECK(r.energy == doctest::Approx(-pi / 16).epsilon(1e-5));
  CHECK(r.lambda == doctest::Approx(oracle::j01 * oracle::j01).epsilon(1e-5));
  CHECK(r.lambda_q[0] == doctest::Approx(oracle::ball_poincare_radial(1.5)).epsilon(1e-4));
  CHECK(r.lambda_q[2] == doctest::Approx(oracle::ball_poincare_radial(3.0)).epsilon(1e-4));
}

TEST_CASE("ellipse report: deficits, chain, cross-checks") {
  auto& ev = shared();
  const auto r = ev.evaluate(ellipse(0.1), {1.0, 1.5, 2.0, 3.0}, "ellipse", 0.1);
  CHECK(r.volume == doctest::Approx(pi).epsilon(1e-12));
  CHECK(r.deficit_E == doctest::Approx(ellipse_deficit(0.1)).epsilon(1e-4));
  CHECK(r.energy == doctest::Approx(r.ball_energy + pi * pi * r.deficit_E).epsilon(1e-12));

  // q = 1: lambda_{2,1} = -1 / (2E), so the FK deficit follows from the energies
  const double from_E = pi * pi * (-1 / (2 * r.energy) + 1 / (2 * r.ball_energy));
  CHECK(r.deficit_FK[0] == doctest::Approx(from_E).epsilon(1e-6));
  CHECK(std::abs(r.kj_slack[0]) <= 1e-9);
  // q = 2 is the Faber-Krahn deficit
  CHECK(r.deficit_FK[2] == doctest::Approx(r.deficit_lambda).epsilon(1e-6));

  for (std::size_t j = 1; j < 4; ++j) {
    CHECK(r.deficit_FK[j] > 0.0);
    CHECK(r.kj_slack[j] > 0.0);
    CHECK(r.cappio[j].rhs > 0.0);
    CHECK(r.cappio[j].lhs >= r.cappio[j].rhs);
    CHECK(r.ratio_FK_A2[j] > 0.0);
  }
  CHECK(r.ratio_E_A2 > 0.0);
  CHECK(r.ratio_E_A2 == doctest::Approx(r.deficit_E / (r.fraenkel * r.fraenkel)));
  CHECK(r.annular_bound <= r.alpha);
  CHECK(sign_violations(r).empty());

  // scaled copy: same invariants, values of the domain itself rescale
  const auto s = ev.evaluate(dilate(ellipse(0.1), 1.5), {2.0});
  CHECK(s.deficit_E == doctest::Approx(r.deficit_E).epsilon(1e-9));
  CHECK(s.deficit_FK[0] == doctest::Approx(r.deficit_FK[2]).epsilon(1e-8));
  CHECK(s.energy == doctest::Approx(r.energy * std::pow(1.5, 4)).epsilon(1e-10));
  CHECK(s.lambda == doctest::Approx(r.lambda / 2.25).epsilon(1e-8));
  CHECK(s.lambda_q[0] == doctest::Approx(r.lambda_q[2] / 2.25).epsilon(1e-8));

  // sign violations are reported
  auto bad = r;
  bad.deficit_E = -1e-3;
  bad.kj_slack[2] = -1.0;
  CHECK(sign_violations(bad).size() == 2u);
  auto broken = r;
  broken.deficit_FK[3] = 0.0;  // positive energy deficit but no FK deficit
  CHECK(sign_violations(broken).size() == 1u);

  CHECK_THROWS_AS(ev.evaluate(ellipse(0.1), {0.5}), InvalidInput);
  CHECK_THROWS_AS(ev.evaluate(ellipse(0.1), {5.0}), InvalidInput);
}

TEST_CASE("standalone deficit operations") {
  MeshPlan p;
  p.rings = 32;
  p.rings_fine = 64;
  CHECK(std::abs(fk_deficit(StarDomain{}, 2.0, p).value) <= 1e-12);
  CHECK(fk_deficit(ellipse(0.1), 2.0, p).value > 0.0);
  CHECK(fk_deficit(ellipse(0.1), 2.0, p).value ==
        doctest::Approx(coarse().evaluate(ellipse(0.1), {2.0}).deficit_FK[0]).epsilon(1e-9));
  CHECK(energy_deficit(ellipse(0.1), p).value > 0.0);

  // Kohler-Jobin slack shrinks with eps
  double prev = 1e300;
  for (double eps : {0.2, 0.1, 0.05, 0.02}) {
    const double s = kj_slack(ellipse(eps), 2.0, p);
    CHECK(s > 0.0);
    CHECK(s < prev);
    prev = s;
  }
  CHECK(std::abs(kj_slack(StarDomain{}, 2.0, p)) <= 1e-12);
  CHECK_THROWS_AS(kj_slack(ellipse(0.1), 1.0, p), InvalidInput);

  const auto c0 = cappio_check(StarDomain{}, 2.0, p);
  CHECK(std::abs(c0.lhs) <= 1e-12);
  CHECK(std::abs(c0.rhs) <= 1e-12);
  const auto c1 = cappio_check(ellipse(0.1), 2.0, p);
  CHECK(c1.rhs > 0.0);
  CHECK(c1.lhs >= c1.rhs);
  const auto c2 = cappio_check(ellipse(0.2), 3.0, p);
  CHECK(c2.lhs >= c2.rhs);
  CHECK(c2.holds);
  CHECK_THROWS_AS(cappio_check(dilate(ellipse(0.1), 2.0), 2.0, p), InvalidInput);
}

TEST_CASE("second-order expansion along mode-k profiles") {
  auto& ev = shared();
  const std::vector<double> s{0.02, 0.04, 0.06, 0.08, 0.1};
  const auto k1 = taylor_validation(ev, 1, s);
  CHECK(std::abs(k1.limit) <= 0.02 * pi / 8);
  for (int k : {2, 3}) {
    const auto f = taylor_validation(ev, k, s);
    CHECK(f.target == doctest::Approx(pi * (k - 1) / 8));
    CHECK(f.limit == doctest::Approx(f.target).epsilon(0.05));
    // the second-order closed form, independently of the spectral one
    const auto p = BoundaryProfile::cosine(k);
    CHECK(f.target == doctest::Approx(0.5 * hessian_form(p, 2)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(taylor_validation(ev, 0, s), InvalidInput);
  CHECK_THROWS_AS(taylor_validation(ev, 2, {0.05, 0.2, 0.1}), InvalidInput);
  CHECK_THROWS_AS(taylor_validation(ev, 2, {0.05, 0.1}), InvalidInput);
}

TEST_CASE("nearly spherical margins") {
  auto& ev = shared();
  CHECK(fuglede_bound(2) == 1.0 / 128);
  CHECK(fuglede_margin(ev, volume_corrected_profile(2, 0.03)) == doctest::Approx(1.0 / 24).epsilon(0.01));
  CHECK(fuglede_margin(ev, volume_corrected_profile(5, 0.03)) == doctest::Approx(1.0 / 12).epsilon(0.01));

  std::mt19937_64 rng(5);
  for (int i = 0; i < 4; ++i) {
    const auto p = recenter_rescale(StarDomain(volume_correct(random_mode_mix(rng, 0.03)))).profile;
    const double m = fuglede_margin(ev, p);
    CHECK(m >= fuglede_bound(2));
    // remainder of the expansion is O(||phi||_inf) relative to the Hessian term
    CHECK(m == doctest::Approx(coercivity_margin(p, 2) / 2).epsilon(0.05));
  }

  CHECK_THROWS_AS(fuglede_margin(ev, volume_corrected_profile(2, 0.08)), InvalidInput);
  CHECK_THROWS_AS(fuglede_margin(ev, BoundaryProfile::cosine(2, 0.03)), InvalidInput);
  CHECK_THROWS_AS(fuglede_margin(ev, volume_correct(BoundaryProfile::cosine(1, 0.03))), InvalidInput);
}

TEST_CASE("sharpness along the ellipse family") {
  auto& ev = shared();
  std::vector<double> eps;
  for (int i = 0; i < 8; ++i) eps.push_back(0.02 * std::pow(10.0, i / 7.0));
  const auto r = sharpness_fit(ev, eps);
  CHECK(r.slope >= 1.85);
  CHECK(r.slope <= 2.15);
  CHECK(r.asym_ratio_spread <= 0.15);
  CHECK(r.ratios_positive);

  // slope of the closed-form deficits over the same points
  std::vector<double> lx, ly;
  for (double e : eps) {
    lx.push_back(std::log(e));
    ly.push_back(std::log(ellipse_deficit(e)));
  }
  CHECK(r.slope == doctest::Approx(fit_line(lx, ly).slope).epsilon(1e-3));

  CHECK_THROWS_AS(sharpness_fit(ev, {0.02, 0.05, 0.1, 0.2}), InvalidInput);
  CHECK_THROWS_AS(sharpness_fit(ev, {0.01, 0.05, 0.1, 0.15, 0.2}), InvalidInput);
}

TEST_CASE("line fit") {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.residual <= 1e-14);
  CHECK_THROWS_AS(fit_line({1, 1}, {0, 1}), InvalidInput);
  CHECK_THROWS_AS(fit_line({1}, {0}), InvalidInput);
}

TEST_CASE("families") {
  const auto el = ellipse_family(0.02, 0.2, 8);
  CHECK(el.size() == 8u);
  CHECK(el.front().param == doctest::Approx(0.02));
  CHECK(el.back().param == doctest::Approx(0.2));
  for (std::size_t i = 1; i < el.size(); ++i) {
    CHECK(el[i].param / el[i - 1].param == doctest::Approx(std::pow(10.0, 1.0 / 7)));
  }
  CHECK_THROWS_AS(ellipse_family(0.0, 0.2, 3), InvalidInput);

  std::mt19937_64 rng(1);
  double mean = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += u / 10000;
  }
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));

  const auto a = random_family(6, 7, 0.01, 0.045);
  const auto b = random_family(6, 7, 0.01, 0.045);
  const auto c = random_family(6, 8, 0.01, 0.045);
  CHECK(a.size() == 6u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(format_profile(a[i].domain.profile) == format_profile(b[i].domain.profile));
    CHECK(format_profile(a[i].domain.profile) != format_profile(c[i].domain.profile));
    CHECK(a[i].param == double(i));
    CHECK(volume(a[i].domain) == doctest::Approx(pi).epsilon(1e-12));
    CHECK(norm(barycenter(a[i].domain)) <= 1e-8);
    CHECK(a[i].domain.profile.sup_on_grid() <= 0.05);
  }
  std::mt19937_64 r2(3);
  const auto m = random_mode_mix(r2, 0.03);
  CHECK(m.sup_on_grid() == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(m.a0 == 0.0);
  CHECK(m.a(1) == 0.0);
  CHECK(m.b(1) == 0.0);
}

TEST_CASE("sigma scan is deterministic and ordered") {
  auto members = ellipse_family(0.05, 0.2, 3);
  for (auto& m : random_family(3, 11, 0.02, 0.04)) members.push_back(m);

  SweepOptions one;
  one.qs = {2.0};
  one.threads = 1;
  SweepOptions many = one;
  many.threads = 3;
  int calls = 0;
  many.progress = [&](std::size_t, const DeficitReport&) { ++calls; };

  const auto r1 = sigma_scan(members, coarse(), one);
  const auto r2 = sigma_scan(members, coarse(), many);
  CHECK(calls == 6);
  REQUIRE(r1.reports.size() == 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(r1.reports[i].id() == r2.reports[i].id());
    CHECK(r1.reports[i].family == members[i].family);
    CHECK(r1.reports[i].deficit_E == r2.reports[i].deficit_E);
    CHECK(r1.reports[i].deficit_FK[0] == r2.reports[i].deficit_FK[0]);
    CHECK(r1.reports[i].fraenkel == r2.reports[i].fraenkel);
    CHECK(sign_violations(r1.reports[i]).empty());
  }
  CHECK(r1.min_ratio_E > 0.0);
  CHECK(r1.min_ratio_FK[0] > 0.0);
  CHECK(r1.min_ratio_E_A4 >= r1.min_ratio_E);
  CHECK(r1.kj_slack.size() == 1u);
  CHECK(r1.kj_slack[0].size() == 6u);
  CHECK(std::isfinite(r1.exponent));
  CHECK(r1.exponent_residual >= 0.0);

  auto broken = members;
  broken.insert(broken.begin() + 2, FamilyMember{"bad", 4.0, StarDomain(BoundaryProfile::constant(-1.5))});
  try {
    sigma_scan(broken, coarse(), many);
    FAIL("expected failure");
  } catch (const NumericalFailure& e) {
    CHECK(std::string(e.what()).find("bad:4") != std::string::npos);
  }
}
