#include "fklab/asymmetry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fklab/errors.hpp"

namespace fklab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_dim(int dim) {
  if (dim < 2) throw InvalidInput("dimension must be >= 2, got " + std::to_string(dim));
}

struct Gauss {
  std::array<double, 8> x{}, w{};  // on [0, 1]
};

// 8-point Gauss-Legendre rule mapped to [0, 1].
const Gauss& gauss8() {
  static const Gauss g = [] {
    Gauss r;
    constexpr int n = 8;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 1.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.x[i] = 0.5 * (x + 1.0);
      r.w[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }();
  return g;
}

double gauss_interval(const std::function<double(double)>& f, double a, double b) {
  const auto& g = gauss8();
  double s = 0.0;
  for (int i = 0; i < 8; ++i) s += g.w[i] * f(a + (b - a) * g.x[i]);
  return s * (b - a);
}

// Gauss rule after t = a + (b - a) x^2, exact for sqrt(t - a) times a smooth function.
double gauss_sqrt_left(const std::function<double(double)>& f, double a, double b) {
  const auto& g = gauss8();
  double s = 0.0;
  for (int i = 0; i < 8; ++i) s += g.w[i] * f(a + (b - a) * g.x[i] * g.x[i]) * 2.0 * g.x[i];
  return s * (b - a);
}

double gauss_sqrt_right(const std::function<double(double)>& f, double a, double b) {
  const auto& g = gauss8();
  double s = 0.0;
  for (int i = 0; i < 8; ++i) s += g.w[i] * f(b - (b - a) * g.x[i] * g.x[i]) * 2.0 * g.x[i];
  return s * (b - a);
}

struct Break {
  double at;
  bool sqrt_type;
};

// Integral over [0, 2 pi) of a function that is smooth except where one of the
// components of `kinks` changes sign. Sign changes are located on a uniform
// grid, refined by bisection and used as Gauss breakpoints. Components flagged
// in `sqrt_mask` behave like a square root of the distance to their zero.
template <std::size_t K>
double piecewise_integral(const std::function<double(double)>& f,
                          const std::function<std::array<double, K>(double)>& kinks, int cells,
                          unsigned sqrt_mask) {
  double total = 0.0;
  std::vector<Break> breaks;
  auto prev = kinks(0.0);
  for (int c = 0; c < cells; ++c) {
    const double a = kTwoPi * c / cells, b = kTwoPi * (c + 1) / cells;
    const auto next = kinks(b);
    breaks.assign({{a, false}, {b, false}});
    for (std::size_t k = 0; k < K; ++k) {
      if ((prev[k] < 0.0) == (next[k] < 0.0)) continue;
      double lo = a, hi = b;
      const bool lo_neg = prev[k] < 0.0;
      while (hi - lo > 1e-15 * (1.0 + hi)) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ((kinks(mid)[k] < 0.0) == lo_neg ? lo : hi) = mid;
      }
      breaks.push_back({0.5 * (lo + hi), ((sqrt_mask >> k) & 1u) != 0});
    }
    std::sort(breaks.begin(), breaks.end(), [](const Break& x, const Break& y) { return x.at < y.at; });
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      const Break& l = breaks[i];
      const Break& r = breaks[i + 1];
      if (!(r.at > l.at)) continue;
      if (l.sqrt_type && r.sqrt_type) {
        const double m = 0.5 * (l.at + r.at);
        total += gauss_sqrt_left(f, l.at, m) + gauss_sqrt_right(f, m, r.at);
      } else if (l.sqrt_type) {
        total += gauss_sqrt_left(f, l.at, r.at);
      } else if (r.sqrt_type) {
        total += gauss_sqrt_right(f, l.at, r.at);
      } else {
        total += gauss_interval(f, l.at, r.at);
      }
    }
    prev = next;
  }
  return total;
}

int angular_cells(const StarDomain& d) { return std::max(360, 4 * d.resolution()); }

}  // namespace

double unit_ball_volume(int dim) {
  if (dim < 1) throw InvalidInput("dimension must be >= 1");
  return std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

double ball_energy(int dim) {
  check_dim(dim);
  return -unit_ball_volume(dim) / (2.0 * dim * (dim + 2.0));
}

// --- ball intersections ---------------------------------------------------------

double intersection_with_ball(const StarDomain& d, Point x, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("ball radius must be positive");
  d.validate();
  const Point v = x - d.center;
  const double vv = dot(v, v), r2 = radius * radius;
  // Along the ray t e(theta) the ball occupies [p - sqrt(D), p + sqrt(D)] with
  // p = e . v and D = p^2 - |v|^2 + radius^2.
  auto chord = [&](double th, double& lo, double& hi, double& disc) {
    const double p = dot(unit(th), v);
    disc = p * p - vv + r2;
    const double s = std::sqrt(std::max(disc, 0.0));
    lo = p - s;
    hi = p + s;
  };
  auto f = [&](double th) {
    double lo, hi, disc;
    chord(th, lo, hi, disc);
    if (disc <= 0.0) return 0.0;
    const double a = std::max(0.0, lo), b = std::min(d.radius(th), hi);
    return b > a ? 0.5 * (b * b - a * a) : 0.0;
  };
  // p itself marks where a ball through the center starts to cover the ray
  auto kinks = [&](double th) {
    double lo, hi, disc;
    chord(th, lo, hi, disc);
    const double r = d.radius(th);
    return std::array<double, 6>{disc, lo, hi, r - hi, r - lo, 0.5 * (lo + hi)};
  };
  return piecewise_integral<6>(f, kinks, angular_cells(d), 1u);
}

double symmetric_difference_with_ball(const StarDomain& d, Point x, double radius) {
  const double inter = intersection_with_ball(d, x, radius);
  return std::max(0.0, volume(d) + kPi * radius * radius - 2.0 * inter);
}

double symmetric_difference_mesh(const TriMesh& mesh, Point x) {
  return mesh.area() + kPi - 2.0 * area_inside_disk(mesh, x, 1.0);
}

// --- simplex search -------------------------------------------------------------

SimplexResult minimize_simplex(const std::function<double(Point)>& f, Point start,
                               const SimplexOptions& options) {
  if (!(options.initial_step > 0.0) || !(options.tolerance > 0.0)) {
    throw InvalidInput("simplex step and tolerance must be positive");
  }
  std::array<Point, 3> v = {start, start + Point{options.initial_step, 0.0},
                            start + Point{0.0, options.initial_step}};
  std::array<double, 3> fv{};
  int evals = 0;
  auto eval = [&](Point p) {
    ++evals;
    return f(p);
  };
  for (int i = 0; i < 3; ++i) fv[i] = eval(v[i]);

  SimplexResult res;
  while (evals < options.max_evaluations) {
    // order best .. worst
    std::array<int, 3> idx = {0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const std::array<Point, 3> sv = {v[idx[0]], v[idx[1]], v[idx[2]]};
    const std::array<double, 3> sf = {fv[idx[0]], fv[idx[1]], fv[idx[2]]};
    v = sv;
    fv = sf;
    const double diam = std::max(norm(v[1] - v[0]), norm(v[2] - v[0]));
    if (diam < options.tolerance) {
      res.converged = true;
      break;
    }
    const Point centroid = 0.5 * (v[0] + v[1]);
    const Point xr = centroid + (centroid - v[2]);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const Point xe = centroid + 2.0 * (centroid - v[2]);
      const double fe = eval(xe);
      if (fe < fr) {
        v[2] = xe;
        fv[2] = fe;
      } else {
        v[2] = xr;
        fv[2] = fr;
      }
      continue;
    }
    if (fr < fv[1]) {
      v[2] = xr;
      fv[2] = fr;
      continue;
    }
    // contraction, outside or inside
    const bool outside = fr < fv[2];
    const Point xc = outside ? centroid + 0.5 * (xr - centroid) : centroid + 0.5 * (v[2] - centroid);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[2])) {
      v[2] = xc;
      fv[2] = fc;
      continue;
    }
    for (int i = 1; i < 3; ++i) {
      v[i] = v[0] + 0.5 * (v[i] - v[0]);
      fv[i] = eval(v[i]);
    }
  }
  const int best = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.argmin = v[best];
  res.value = fv[best];
  res.evaluations = evals;
  return res;
}

// --- Fraenkel -------------------------------------------------------------------

double fraenkel_at(const StarDomain& d, Point x) { return symmetric_difference_with_ball(d, x) / kPi; }

FraenkelResult fraenkel(const StarDomain& d, const FraenkelOptions& options) {
  const double vol = volume(d);
  if (std::abs(vol - kPi) > options.volume_tolerance * kPi) {
    throw InvalidInput("Fraenkel asymmetry needs |Omega| = pi, got " + std::to_string(vol));
  }
  const Point xb = barycenter(d);
  const double s = options.start_radius;
  const std::array<Point, 5> starts = {xb, xb + Point{s, 0.0}, xb - Point{s, 0.0}, xb + Point{0.0, s},
                                       xb - Point{0.0, s}};
  auto objective = [&](Point x) { return fraenkel_at(d, x); };
  FraenkelResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const Point& p : starts) {
    const auto r = minimize_simplex(objective, p, options.simplex);
    best.evaluations += r.evaluations;
    if (r.value < best.value) {
      best.value = r.value;
      best.center = r.argmin;
    }
  }
  return best;
}

// --- alpha ----------------------------------------------------------------------

double beta_const(int dim) {
  check_dim(dim);
  return unit_ball_volume(dim) / (dim + 1.0);
}

double beta_quadrature(int dim) {
  check_dim(dim);
  const double area = dim * unit_ball_volume(dim);
  return area * gauss_interval([dim](double r) { return (1.0 - r) * std::pow(r, dim - 1); }, 0.0, 1.0);
}

double alpha(const StarDomain& d) {
  const Point xb = barycenter(d);
  const auto fit = profile_relative_to(d, xb);
  const auto& p = fit.profile;
  // the integrand is a trigonometric polynomial of degree 3K: the trapezoid rule is exact
  const int n = std::max(64, 4 * p.max_mode() + 8);
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const double r = 1.0 + p(kTwoPi * j / n);
    s += r * r * (r / 3.0 - 0.5);
  }
  return beta_const(2) + s * kTwoPi / n;
}

double alpha_mesh(const TriMesh& mesh, Point x) {
  return beta_const(2) + integrate(mesh, [x](Point q) { return norm(q - x) - 1.0; });
}

double annular_lower_bound(double outside_measure, double missing_measure) {
  if (!(outside_measure >= 0.0) || !(missing_measure >= 0.0)) {
    throw InvalidInput("measures must be non-negative");
  }
  const double r1 = std::sqrt(1.0 + outside_measure / kPi);
  const double r2 = std::sqrt(std::max(0.0, 1.0 - missing_measure / kPi));
  auto shell = [](double r) { return (r * r * r - 1.0) / 3.0 - (r * r - 1.0) / 2.0; };
  return kTwoPi * (shell(r1) + shell(r2));
}

double annular_lower_bound(const StarDomain& d) {
  const Point xb = barycenter(d);
  const double inter = intersection_with_ball(d, xb, 1.0);
  return annular_lower_bound(std::max(0.0, volume(d) - inter), std::max(0.0, kPi - inter));
}

AsymmetryReport asymmetry_report(const StarDomain& d, const FraenkelOptions& options) {
  AsymmetryReport rep;
  const auto fr = fraenkel(d, options);
  rep.fraenkel = fr.value;
  rep.fraenkel_center = fr.center;
  rep.evaluations = fr.evaluations;
  rep.center_tolerance = options.simplex.tolerance;
  rep.barycenter = barycenter(d);
  rep.alpha = alpha(d);
  rep.sym_diff_to_unit_ball_at_barycenter = symmetric_difference_with_ball(d, rep.barycenter);
  return rep;
}

// --- penalization ---------------------------------------------------------------

double f_eta(double s, double eta, int dim) {
  check_dim(dim);
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidInput("eta must lie in (0, 1]");
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidInput("volume argument must be non-negative");
  const double w = unit_ball_volume(dim);
  return s <= w ? eta * (s - w) : (s - w) / eta;
}

double radial_g(double r, double eta, int dim) {
  if (!(r > 0.0)) throw InvalidInput("radius must be positive");
  return std::pow(r, dim + 2) * ball_energy(dim) + f_eta(unit_ball_volume(dim) * std::pow(r, dim), eta, dim);
}

EtaThresholds eta_thresholds(double R, int dim) {
  check_dim(dim);
  if (!(R > 1.0)) throw InvalidInput("outer radius must exceed 1");
  const double w = unit_ball_volume(dim), e = std::abs(ball_energy(dim));
  EtaThresholds t;
  t.outer = dim * w / ((dim + 2.0) * R * R * e);
  t.inner = e / w;
  t.combined = std::min(t.outer, t.inner);
  return t;
}

double eta_threshold(double R, int dim) { return eta_thresholds(R, dim).combined; }

RadialCoercivity radial_coercivity(double eta, const std::vector<double>& r_grid, int dim) {
  std::vector<double> grid;
  grid.reserve(r_grid.size() + 1);
  for (double r : r_grid) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("radial grid must be positive and finite");
    grid.push_back(r);
  }
  grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() >= 1.0 || grid.back() <= 1.0) {
    throw InvalidInput("radial grid needs points on both sides of r = 1");
  }
  RadialCoercivity out;
  out.g_one = radial_g(1.0, eta, dim);
  out.g_min = std::numeric_limits<double>::infinity();
  out.left_slope = out.right_slope = std::numeric_limits<double>::infinity();
  for (double r : grid) {
    const double g = radial_g(r, eta, dim);
    if (g < out.g_min) {
      out.g_min = g;
      out.r_at_min = r;
    }
    if (r < 1.0) out.left_slope = std::min(out.left_slope, (g - out.g_one) / (1.0 - r));
    if (r > 1.0) out.right_slope = std::min(out.right_slope, (g - out.g_one) / (r - 1.0));
  }
  const double slope = std::min(out.left_slope, out.right_slope);
  out.c4 = slope > 0.0 ? 1.0 / slope : std::numeric_limits<double>::infinity();
  out.minimum_at_one = out.r_at_min == 1.0 && slope > 0.0;
  return out;
}

double penalized_F(double energy, double vol, double eta) { return energy + f_eta(vol, eta); }

double penalized_F(const StarDomain& d, double eta, int rings, const SolverOptions& options) {
  FemProblem prob(polar_mesh(d, rings), options);
  return penalized_F(energy_of(prob.torsion().first), volume(d), eta);
}

double penalized_G(double F, double alpha_value, double eps, double sigma) {
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  if (!(sigma > 0.0 && sigma < 1.0)) throw InvalidInput("sigma must lie in (0, 1)");
  const double dev = alpha_value - eps;
  return F + std::sqrt(eps * eps + sigma * sigma * dev * dev);
}

double penalized_G(const StarDomain& d, double eta, double eps, double sigma, int rings,
                   const SolverOptions& options) {
  return penalized_G(penalized_F(d, eta, rings, options), alpha(d), eps, sigma);
}

}  // namespace fklab
