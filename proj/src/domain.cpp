#include "fklab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fklab/errors.hpp"

namespace fklab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFitTailEnergy = 1e-22;
constexpr int kMaxFitModes = 512;

// Radius of d along the ray from c in direction theta, found by bisection on
// g(t) = |p - o| - r(arg(p - o)), p = c + t e(theta). Throws NotStarShaped when
// g changes sign more than once on a coarse scan.
double ray_exit(const StarDomain& d, Point c, double theta, double t_max) {
  const Point e = unit(theta);
  auto g = [&](double t) {
    const Point rel = c + t * e - d.center;
    const double rho = norm(rel);
    if (rho == 0.0) return -d.radius(0.0);
    return rho - d.radius(std::atan2(rel.y, rel.x));
  };
  constexpr int kScan = 96;
  double prev = g(0.0);
  if (prev >= 0.0) throw NotStarShaped("reference point lies outside the domain");
  double lo = -1.0, hi = -1.0;
  int crossings = 0;
  for (int i = 1; i <= kScan; ++i) {
    const double t = t_max * i / kScan;
    const double cur = g(t);
    if ((prev < 0.0) != (cur < 0.0)) {
      ++crossings;
      if (crossings == 1) {
        lo = t_max * (i - 1) / kScan;
        hi = t;
      }
    }
    prev = cur;
  }
  if (crossings != 1) {
    throw NotStarShaped("ray at angle " + std::to_string(theta) + " meets the boundary " +
                        std::to_string(crossings) + " times");
  }
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double max_radius(const StarDomain& d) {
  const int n = std::max(256, 4 * d.resolution());
  double r = 0.0;
  for (int j = 0; j < n; ++j) r = std::max(r, d.radius(kTwoPi * j / n));
  return r;
}

int exact_points(const StarDomain& d, int degree_multiplier) {
  return std::max(64, degree_multiplier * d.profile.max_mode() + 8);
}

}  // namespace

StarDomain StarDomain::disk(Point c, double radius) {
  if (!(radius > 0.0)) throw InvalidInput("disk radius must be positive");
  StarDomain d;
  d.center = c;
  d.scale = radius;
  return d;
}

double StarDomain::radius(double theta) const {
  const double base = 1.0 + profile(theta);
  switch (law) {
    case RadialLaw::Linear:
      return scale * base;
    case RadialLaw::SquareRoot:
      return scale * std::sqrt(base);
    case RadialLaw::InverseSquareRoot:
      return scale / std::sqrt(base);
  }
  return scale * base;
}

bool StarDomain::contains(Point p) const {
  const Point rel = p - center;
  const double rho = norm(rel);
  if (rho == 0.0) return true;
  return rho < radius(std::atan2(rel.y, rel.x));
}

void StarDomain::validate() const {
  if (!profile.all_finite()) throw InvalidInput("domain profile has non-finite coefficients");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidInput("domain scale must be positive");
  const int n = resolution();
  for (int j = 0; j < n; ++j) {
    const double theta = kTwoPi * j / n;
    const double base = 1.0 + profile(theta);
    if (!(base > 0.0)) {
      throw InvalidInput("radial function is not positive at angle " + std::to_string(theta));
    }
  }
}

StarDomain translate(StarDomain d, Point shift) {
  d.center += shift;
  return d;
}

StarDomain dilate(StarDomain d, double factor) {
  if (!(factor > 0.0)) throw InvalidInput("dilation factor must be positive");
  d.center *= factor;
  d.scale *= factor;
  return d;
}

double periodic_integral(const std::function<double(double)>& f, int start, double rel_tol) {
  int n = std::max(start, 8);
  auto trapezoid = [&](int m) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += f(kTwoPi * j / m);
    return s * kTwoPi / m;
  };
  double prev = trapezoid(n);
  while (n < (1 << 20)) {
    n *= 2;
    const double cur = trapezoid(n);
    if (std::abs(cur - prev) <= rel_tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  throw NumericalFailure("periodic integral did not converge");
}

double volume(const StarDomain& d) {
  const auto& p = d.profile;
  const double s2 = d.scale * d.scale;
  switch (d.law) {
    case RadialLaw::Linear: {
      double sum = 0.0;
      for (int k = 1; k <= p.max_mode(); ++k) sum += p.a(k) * p.a(k) + p.b(k) * p.b(k);
      return s2 * kPi * ((1.0 + p.a0) * (1.0 + p.a0) + 0.5 * sum);
    }
    case RadialLaw::SquareRoot:
      return s2 * kPi * (1.0 + p.a0);
    case RadialLaw::InverseSquareRoot:
      return 0.5 * s2 * periodic_integral([&](double t) { return 1.0 / (1.0 + p(t)); });
  }
  return 0.0;
}

Point barycenter(const StarDomain& d) {
  // x_Omega - center = (1/|Omega|) (1/3) int r^3 (cos, sin) dtheta.
  double mx = 0.0, my = 0.0;
  if (d.law == RadialLaw::Linear) {
    // r^3 e(theta) is a trigonometric polynomial of degree 3K+1.
    const int n = exact_points(d, 4);
    for (int j = 0; j < n; ++j) {
      const double t = kTwoPi * j / n;
      const double r = d.radius(t);
      mx += r * r * r * std::cos(t);
      my += r * r * r * std::sin(t);
    }
    mx *= kTwoPi / n;
    my *= kTwoPi / n;
  } else {
    mx = periodic_integral([&](double t) { return std::pow(d.radius(t), 3) * std::cos(t); });
    my = periodic_integral([&](double t) { return std::pow(d.radius(t), 3) * std::sin(t); });
  }
  const double v = volume(d);
  return d.center + Point{mx, my} * (1.0 / (3.0 * v));
}

ProfileFit profile_relative_to(const StarDomain& d, Point c, int extra_modes) {
  d.validate();
  if (extra_modes < 0) throw InvalidInput("extra_modes must be non-negative");
  const bool same_center = norm(c - d.center) == 0.0;
  if (same_center && d.law == RadialLaw::Linear) {
    ProfileFit fit;
    fit.profile = d.scale * (BoundaryProfile::constant(1.0) + d.profile) -
                  BoundaryProfile::constant(1.0);
    fit.samples = 0;
    return fit;
  }
  const double t_max = 1.5 * (max_radius(d) + norm(c - d.center)) + 1e-12;
  int modes = std::max(1, d.profile.max_mode() + extra_modes);
  ProfileFit fit;
  while (true) {
    const int n = 4 * modes + 1;
    std::vector<double> samples(n);
    for (int j = 0; j < n; ++j) {
      const double theta = kTwoPi * j / n;
      samples[j] = (same_center ? d.radius(theta) : ray_exit(d, c, theta, t_max)) - 1.0;
    }
    fit.samples = n;
    fit.profile = fit_fourier(samples, modes);
    double tail = 0.0;
    for (int j = 0; j < n; ++j) {
      const double e = samples[j] - fit.profile(kTwoPi * j / n);
      tail += e * e;
    }
    fit.tail_energy = tail * kTwoPi / n;
    if (fit.tail_energy <= kFitTailEnergy || modes >= kMaxFitModes) break;
    modes = std::min(2 * modes, kMaxFitModes);
  }
  fit.profile.trim();
  return fit;
}

StarDomain recenter_rescale(const StarDomain& d) {
  d.validate();
  StarDomain cur = d;
  for (int pass = 0; pass < 4; ++pass) {
    const Point c = barycenter(cur);
    const bool done = cur.law == RadialLaw::Linear && cur.scale == 1.0 && norm(cur.center) == 0.0 &&
                      norm(c) <= 1e-13;
    if (done) break;
    ProfileFit fit = profile_relative_to(cur, c);
    cur = StarDomain(std::move(fit.profile));
  }
  const double factor = std::sqrt(kPi / volume(cur));
  cur.profile = factor * (BoundaryProfile::constant(1.0) + cur.profile) -
                BoundaryProfile::constant(1.0);
  if (norm(barycenter(cur)) > 1e-8) {
    throw NumericalFailure("recentering did not converge: barycenter still at distance " +
                           std::to_string(norm(barycenter(cur))));
  }
  return cur;
}

StarDomain ellipse(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw InvalidInput("ellipse parameter must lie in [0, 1)");
  // r^-2 = cos^2 + (1 + eps) sin^2 = 1 + eps/2 - (eps/2) cos 2 theta.
  StarDomain d;
  d.law = RadialLaw::InverseSquareRoot;
  d.profile = BoundaryProfile::constant(0.5 * eps) + BoundaryProfile::cosine(2, -0.5 * eps);
  d.profile.trim();
  // area before scaling is pi (1 + eps)^{-1/2}
  d.scale = std::pow(1.0 + eps, 0.25);
  return d;
}

StarDomain volume_flow(const BoundaryProfile& p, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("flow parameter must lie in [0, 1]");
  const auto one = BoundaryProfile::constant(1.0);
  const auto r = one + p;
  BoundaryProfile psi = t * (multiply(r, r) - one);
  StarDomain d;
  d.law = RadialLaw::SquareRoot;
  d.profile = std::move(psi);
  const int n = std::max(64, 8 * d.profile.max_mode() + 1);
  for (int j = 0; j < n; ++j) {
    if (!(1.0 + d.profile(kTwoPi * j / n) > 0.0)) {
      throw InvalidInput("degenerate radicand in the volume flow at t = " + std::to_string(t));
    }
  }
  return d;
}

BoundaryProfile volume_corrected_profile(int k, double s) {
  if (k < 1) throw InvalidInput("mode index must be >= 1");
  if (!(std::abs(s) < 1.0)) throw InvalidInput("amplitude must satisfy |s| < 1");
  if (s == 0.0) return {};
  BoundaryProfile p = BoundaryProfile::cosine(k, s);
  p.a0 = std::sqrt(1.0 - 0.5 * s * s) - 1.0;
  return p;
}

BoundaryProfile volume_correct(BoundaryProfile p) {
  double sum = 0.0;
  for (int k = 1; k <= p.max_mode(); ++k) sum += p.a(k) * p.a(k) + p.b(k) * p.b(k);
  if (!(0.5 * sum < 1.0)) throw InvalidInput("profile oscillation too large to volume-correct");
  p.a0 = std::sqrt(1.0 - 0.5 * sum) - 1.0;
  return p;
}

}  // namespace fklab
