#include "fklab/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include <Eigen/Dense>

#include "fklab/errors.hpp"

namespace fklab {

namespace {

constexpr double kPi = std::numbers::pi;

enum Kind { kEnergy = 0, kLambda = 1, kLambdaQ = 2 };

struct LevelValues {
  double energy = 0.0;
  double lambda = 0.0;
  std::vector<double> lambda_q;
};

LevelValues solve_level(const StarDomain& d, int rings, bool eigen, const std::vector<double>& qs,
                        const SolverOptions& options) {
  FemProblem prob(polar_mesh(d, rings), options);
  LevelValues v;
  v.energy = energy_of(prob.torsion().first);
  if (eigen) v.lambda = prob.principal_eigenvalue().value;
  for (double q : qs) v.lambda_q.push_back(prob.poincare_sobolev(q).value);
  return v;
}

std::vector<int> levels(const MeshPlan& plan) { return {plan.rings / 2, plan.rings, plan.rings_fine}; }

void check_q(double q, const MeshPlan& plan) {
  if (!(q >= 1.0 && q <= plan.solver.q_max)) {
    throw InvalidInput("q = " + std::to_string(q) + " outside the solver range [1, " +
                       std::to_string(plan.solver.q_max) + "]");
  }
}

// Dilate about the origin to volume pi; returns the factor.
double normalize(const StarDomain& d, StarDomain& out) {
  d.validate();
  const double vol = volume(d);
  const double t = std::sqrt(kPi / vol);
  out = dilate(d, t);
  return t;
}

void require_unit_volume(const StarDomain& d) {
  const double vol = volume(d);
  if (std::abs(vol - kPi) > 1e-9 * kPi) {
    throw InvalidInput("domain volume " + std::to_string(vol) + " differs from pi");
  }
}

}  // namespace

SolverOptions deficit_solver_options() {
  SolverOptions o;
  o.cg_tol = 1e-12;
  o.eig_tol = 1e-11;
  o.descent_tol = 1e-11;
  return o;
}

void MeshPlan::validate() const {
  if (rings < 8 || rings % 2 != 0) throw InvalidInput("mesh rings must be even and at least 8");
  if (rings_fine != 2 * rings) throw InvalidInput("rings_fine must equal 2 * rings");
  if (!(order_low < order_high)) throw InvalidInput("empty observed-order band");
}

Extrapolated richardson(double half, double coarse, double fine, const MeshPlan& plan) {
  Extrapolated e;
  e.half = half;
  e.coarse = coarse;
  e.fine = fine;
  e.value = fine + (fine - coarse) / 3.0;
  const double d1 = half - coarse;
  const double d2 = coarse - fine;
  if (std::abs(d2) <= plan.order_floor) return e;
  if (d1 / d2 <= 0.0) {
    e.flagged = true;
    return e;
  }
  e.order = std::log2(d1 / d2);
  e.flagged = e.order < plan.order_low || e.order > plan.order_high;
  return e;
}

// --- ball reference -------------------------------------------------------------

BallReference::BallReference(SolverOptions options) : options_(options) {}

double BallReference::energy(int rings) { return lookup(kEnergy, rings, 0.0); }
double BallReference::lambda(int rings) { return lookup(kLambda, rings, 0.0); }
double BallReference::lambda_q(int rings, double q) { return lookup(kLambdaQ, rings, q); }

double BallReference::lookup(int kind, int rings, double q) {
  const auto key = std::make_tuple(kind, rings, q);
  std::promise<double> promise;
  std::shared_future<double> result;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      result = promise.get_future().share();
      cache_.emplace(key, result);
      owner = true;
    } else {
      result = it->second;
    }
  }
  if (owner) {
    try {
      FemProblem prob(polar_mesh(StarDomain{}, rings), options_);
      double v = 0.0;
      if (kind == kEnergy) v = energy_of(prob.torsion().first);
      if (kind == kLambda) v = prob.principal_eigenvalue().value;
      if (kind == kLambdaQ) v = prob.poincare_sobolev(q).value;
      promise.set_value(v);
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return result.get();
}

// --- reports --------------------------------------------------------------------

std::string DeficitReport::id() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", param);
  return family + ":" + buf;
}

double kj_exponent(double q, int dim) {
  if (!(q >= 1.0)) throw InvalidInput("kj_exponent requires q >= 1");
  if (dim < 2) throw InvalidInput("kj_exponent requires dim >= 2");
  const double n = dim;
  return (1.0 / q - (n - 2.0) / (2.0 * n)) * 2.0 * n / (n + 2.0);
}

StabilityEvaluator::StabilityEvaluator(MeshPlan plan) : plan_(plan), ball_(plan.solver) {
  plan_.validate();
}

DeficitReport StabilityEvaluator::evaluate(const StarDomain& d, const std::vector<double>& qs,
                                           const std::string& family, double param) {
  for (double q : qs) check_q(q, plan_);
  StarDomain dn;
  const double t = normalize(d, dn);

  DeficitReport r;
  r.family = family;
  r.param = param;
  r.volume = volume(d);
  r.q = qs;
  r.mesh_rings = plan_.rings;
  r.mesh_rings_fine = plan_.rings_fine;

  const auto ls = levels(plan_);
  std::vector<LevelValues> dom, ball;
  for (int rings : ls) {
    dom.push_back(solve_level(dn, rings, true, qs, plan_.solver));
    LevelValues b;
    b.energy = ball_.energy(rings);
    b.lambda = ball_.lambda(rings);
    for (double q : qs) b.lambda_q.push_back(ball_.lambda_q(rings, q));
    ball.push_back(std::move(b));
  }

  auto extrap = [&](auto get) { return richardson(get(0), get(1), get(2), plan_); };

  const double En = extrap([&](int i) { return dom[i].energy; }).value;
  const double lamn = extrap([&](int i) { return dom[i].lambda; }).value;
  r.ball_energy = extrap([&](int i) { return ball[i].energy; }).value;
  r.ball_lambda = extrap([&](int i) { return ball[i].lambda; }).value;
  r.energy = En / std::pow(t, 4);
  r.lambda = lamn * t * t;

  r.deficit_E_levels = extrap([&](int i) { return (dom[i].energy - ball[i].energy) / (kPi * kPi); });
  r.deficit_E = r.deficit_E_levels.value;
  r.extrap_order = r.deficit_E_levels.order;
  r.order_flagged = r.deficit_E_levels.flagged;
  r.deficit_lambda = kPi * extrap([&](int i) { return dom[i].lambda - ball[i].lambda; }).value;

  const AsymmetryReport asym = asymmetry_report(dn, plan_.fraenkel);
  r.fraenkel = asym.fraenkel;
  r.alpha = asym.alpha;
  r.annular_bound = annular_lower_bound(dn);
  const bool ratios = r.fraenkel >= kRatioAsymmetryFloor;
  const double a2 = r.fraenkel * r.fraenkel;
  r.ratio_E_A2 = ratios ? r.deficit_E / a2 : kNaN;

  for (std::size_t j = 0; j < qs.size(); ++j) {
    const double q = qs[j];
    const double lq = extrap([&](int i) { return dom[i].lambda_q[j]; }).value;
    const double lqb = extrap([&](int i) { return ball[i].lambda_q[j]; }).value;
    const double fk =
        std::pow(kPi, 2.0 / q) * extrap([&](int i) { return dom[i].lambda_q[j] - ball[i].lambda_q[j]; }).value;
    const double theta = kj_exponent(q);
    r.lambda_q.push_back(lq * std::pow(t, 4.0 / q));
    r.ball_lambda_q.push_back(lqb);
    r.deficit_FK.push_back(fk);
    r.ratio_FK_A2.push_back(ratios ? fk / a2 : kNaN);
    r.kj_slack.push_back(lq * std::pow(-En, theta) - lqb * std::pow(-r.ball_energy, theta));
    CappioCheck c;
    c.q = q;
    c.lhs = lq / lqb - 1.0;
    c.rhs = std::pow(r.ball_energy / En, theta) - 1.0;
    c.holds = c.lhs >= c.rhs - kSignRelTolerance;
    r.cappio.push_back(c);
  }
  return r;
}

Extrapolated StabilityEvaluator::energy_difference(const StarDomain& d) {
  require_unit_volume(d);
  const auto ls = levels(plan_);
  double v[3];
  for (int i = 0; i < 3; ++i) {
    v[i] = solve_level(d, ls[i], false, {}, plan_.solver).energy - ball_.energy(ls[i]);
  }
  return richardson(v[0], v[1], v[2], plan_);
}

Extrapolated StabilityEvaluator::energy_deficit(const StarDomain& d) {
  StarDomain dn;
  normalize(d, dn);
  Extrapolated e = energy_difference(dn);
  for (double* x : {&e.value, &e.half, &e.coarse, &e.fine}) *x /= kPi * kPi;
  return e;
}

Extrapolated StabilityEvaluator::fk_deficit(const StarDomain& d, double q) {
  check_q(q, plan_);
  StarDomain dn;
  normalize(d, dn);
  const auto ls = levels(plan_);
  const double c = std::pow(kPi, 2.0 / q);
  double v[3];
  for (int i = 0; i < 3; ++i) {
    const double lq = solve_level(dn, ls[i], false, {q}, plan_.solver).lambda_q[0];
    v[i] = c * (lq - ball_.lambda_q(ls[i], q));
  }
  return richardson(v[0], v[1], v[2], plan_);
}

Extrapolated energy_deficit(const StarDomain& d, const MeshPlan& plan) {
  return StabilityEvaluator(plan).energy_deficit(d);
}

Extrapolated fk_deficit(const StarDomain& d, double q, const MeshPlan& plan) {
  return StabilityEvaluator(plan).fk_deficit(d, q);
}

double kj_slack(const StarDomain& d, double q, const MeshPlan& plan) {
  if (!(q > 1.0)) throw InvalidInput("kj_slack requires q > 1");
  StabilityEvaluator ev(plan);
  return ev.evaluate(d, {q}).kj_slack[0];
}

CappioCheck cappio_check(const StarDomain& d, double q, const MeshPlan& plan) {
  if (!(q > 1.0)) throw InvalidInput("cappio_check requires q > 1");
  require_unit_volume(d);
  StabilityEvaluator ev(plan);
  return ev.evaluate(d, {q}).cappio[0];
}

std::vector<std::string> sign_violations(const DeficitReport& r, double rel_tol) {
  std::vector<std::string> out;
  auto add = [&](const std::string& what, double value, double tol) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: %s = %.6e below -%.3e", r.id().c_str(), what.c_str(), value, tol);
    out.emplace_back(buf);
  };
  const double tol_E = rel_tol * std::abs(r.ball_energy) / (kPi * kPi);
  if (r.deficit_E < -tol_E) add("energy deficit", r.deficit_E, tol_E);
  const double tol_l = rel_tol * kPi * r.ball_lambda;
  if (r.deficit_lambda < -tol_l) add("Faber-Krahn deficit", r.deficit_lambda, tol_l);
  for (std::size_t j = 0; j < r.q.size(); ++j) {
    const double q = r.q[j];
    const std::string tag = "(q=" + std::to_string(q) + ")";
    const double tol_fk = rel_tol * std::pow(kPi, 2.0 / q) * r.ball_lambda_q[j];
    if (r.deficit_FK[j] < -tol_fk) add("FK deficit " + tag, r.deficit_FK[j], tol_fk);
    const double tol_kj = rel_tol * r.ball_lambda_q[j] * std::pow(-r.ball_energy, kj_exponent(q));
    if (r.kj_slack[j] < -tol_kj) add("KJ slack " + tag, r.kj_slack[j], tol_kj);
    const auto& c = r.cappio[j];
    if (c.lhs - c.rhs < -rel_tol) add("concavity lhs - rhs " + tag, c.lhs - c.rhs, rel_tol);
    if (r.deficit_E > tol_E && !(r.deficit_FK[j] > 0.0)) {
      add("FK deficit with positive energy deficit " + tag, r.deficit_FK[j], 0.0);
    }
  }
  return out;
}

// --- second-order expansion -----------------------------------------------------

TaylorFit taylor_validation(StabilityEvaluator& ev, int k, const std::vector<double>& s_values,
                            double max_rel_residual) {
  if (k < 1) throw InvalidInput("taylor_validation requires k >= 1");
  if (s_values.size() < 3) throw InvalidInput("taylor_validation needs at least three amplitudes");
  for (double s : s_values) {
    if (!(s > 0.0 && s <= 0.1)) throw InvalidInput("amplitudes must lie in (0, 0.1]");
  }
  TaylorFit fit;
  fit.k = k;
  fit.s = s_values;
  fit.target = kPi * (k - 1) / 8.0;
  for (double s : s_values) {
    const StarDomain d(volume_corrected_profile(k, s));
    fit.ratio.push_back(ev.energy_difference(d).value / (s * s));
  }
  const int n = static_cast<int>(s_values.size());
  const int cols = n >= 5 ? 3 : 2;
  Eigen::MatrixXd A(n, cols);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double s2 = s_values[i] * s_values[i];
    A(i, 0) = 1.0;
    A(i, 1) = s2;
    if (cols == 3) A(i, 2) = s2 * s2;
    b(i) = fit.ratio[i];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  fit.limit = c(0);
  fit.residual = std::sqrt((A * c - b).squaredNorm() / n);
  if (fit.residual > max_rel_residual * std::max(std::abs(fit.limit), kPi / 8)) {
    throw NumericalFailure("second-order fit residual " + std::to_string(fit.residual) +
                           " too large for mode " + std::to_string(k));
  }
  return fit;
}

TaylorFit taylor_validation(int k, const std::vector<double>& s_values, const MeshPlan& plan,
                            double max_rel_residual) {
  StabilityEvaluator ev(plan);
  return taylor_validation(ev, k, s_values, max_rel_residual);
}

double fuglede_bound(int dim) { return 1.0 / (32.0 * dim * dim); }

double fuglede_margin(StabilityEvaluator& ev, const BoundaryProfile& p) {
  if (p.sup_on_grid() > 0.05 + 1e-12) throw InvalidInput("fuglede_margin requires ||phi||_inf <= 0.05");
  const StarDomain d(p);
  require_unit_volume(d);
  if (norm(barycenter(d)) > 1e-8) throw InvalidInput("fuglede_margin requires the barycenter at the origin");
  const double n2 = h_half_norm_sq(p);
  if (!(n2 > 0.0)) throw InvalidInput("fuglede_margin needs a nonzero profile");
  return ev.energy_difference(d).value / n2;
}

double fuglede_margin(const BoundaryProfile& p, const MeshPlan& plan) {
  StabilityEvaluator ev(plan);
  return fuglede_margin(ev, p);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidInput("fit_line: size mismatch");
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) throw InvalidInput("fit_line needs two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidInput("fit_line needs two distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - f.intercept - f.slope * x[i], 2);
  f.residual = std::sqrt(ss / n);
  return f;
}

SharpnessResult sharpness_fit(StabilityEvaluator& ev, const std::vector<double>& eps_values) {
  if (eps_values.size() < 5) throw InvalidInput("sharpness_fit needs at least five points");
  for (double e : eps_values) {
    if (!(e >= 0.02 - 1e-12 && e <= 0.2 + 1e-12)) throw InvalidInput("sharpness eps must lie in [0.02, 0.2]");
  }
  SharpnessResult r;
  r.eps = eps_values;
  std::vector<double> lx, ly, ratio;
  r.ratios_positive = true;
  for (double e : eps_values) {
    const StarDomain d = ellipse(e);
    const double D = ev.energy_deficit(d).value;
    const double A = fraenkel(d, ev.plan().fraenkel).value;
    r.deficit.push_back(D);
    r.fraenkel.push_back(A);
    if (!(D > 0.0)) throw NumericalFailure("nonpositive deficit at eps = " + std::to_string(e));
    if (!(A > 0.0 && D / (A * A) > 0.0)) r.ratios_positive = false;
    lx.push_back(std::log(e));
    ly.push_back(std::log(D));
    ratio.push_back(A / e);
  }
  const LineFit f = fit_line(lx, ly);
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.residual = f.residual;
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  r.asym_ratio_spread = *hi / *lo - 1.0;
  return r;
}

SharpnessResult sharpness_fit(const std::vector<double>& eps_values, const MeshPlan& plan) {
  StabilityEvaluator ev(plan);
  return sharpness_fit(ev, eps_values);
}

// --- families -------------------------------------------------------------------

std::vector<FamilyMember> ellipse_family(double eps_min, double eps_max, int count) {
  if (count < 1) throw InvalidInput("family count must be positive");
  if (!(eps_min > 0.0 && eps_min <= eps_max && eps_max < 1.0)) {
    throw InvalidInput("ellipse family needs 0 < eps_min <= eps_max < 1");
  }
  std::vector<FamilyMember> out;
  for (int i = 0; i < count; ++i) {
    const double e = count == 1 ? eps_min : eps_min * std::pow(eps_max / eps_min, double(i) / (count - 1));
    out.push_back({"ellipse", e, ellipse(e)});
  }
  return out;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

BoundaryProfile random_mode_mix(std::mt19937_64& rng, double sup) {
  if (!(sup > 0.0)) throw InvalidInput("random_mode_mix needs a positive sup norm");
  BoundaryProfile p;
  p.resize(8);
  for (int k = 2; k <= 8; ++k) {
    p.cos_coeffs[k - 1] = (2.0 * uniform01(rng) - 1.0) / (k * k);
    p.sin_coeffs[k - 1] = (2.0 * uniform01(rng) - 1.0) / (k * k);
  }
  return (sup / p.sup_on_grid()) * p;
}

std::vector<FamilyMember> random_family(int count, std::uint64_t seed, double sup_min, double sup_max) {
  if (count < 0) throw InvalidInput("family count must be nonnegative");
  if (!(sup_min > 0.0 && sup_min <= sup_max && sup_max < 0.5)) {
    throw InvalidInput("random family needs 0 < sup_min <= sup_max < 0.5");
  }
  std::mt19937_64 rng(seed);
  std::vector<FamilyMember> out;
  for (int i = 0; i < count; ++i) {
    const double sup = sup_min + (sup_max - sup_min) * uniform01(rng);
    const BoundaryProfile p = random_mode_mix(rng, sup);
    out.push_back({"random", double(i), recenter_rescale(StarDomain(volume_correct(p)))});
  }
  return out;
}

// --- sweeps ---------------------------------------------------------------------

SweepResult sigma_scan(const std::vector<FamilyMember>& members, StabilityEvaluator& ev,
                       const SweepOptions& options) {
  const std::size_t n = members.size();
  SweepResult res;
  res.qs = options.qs;
  res.reports.resize(n);

  int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, static_cast<int>(n)));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mutex;
  std::size_t fail_index = n;
  std::string fail_message;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      const auto& m = members[i];
      try {
        res.reports[i] = ev.evaluate(m.domain, options.qs, m.family, m.param);
        if (options.progress) {
          std::lock_guard lock(mutex);
          options.progress(i, res.reports[i]);
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        if (i < fail_index) {
          fail_index = i;
          fail_message = e.what();
        }
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failed.load()) {
    const auto& m = members[fail_index];
    DeficitReport tag;
    tag.family = m.family;
    tag.param = m.param;
    throw NumericalFailure("sweep member " + tag.id() + " failed: " + fail_message);
  }

  std::vector<double> lx, ly;
  res.min_ratio_FK.assign(options.qs.size(), kNaN);
  res.kj_slack.assign(options.qs.size(), {});
  auto take_min = [](double& acc, double v) {
    if (std::isfinite(v) && !(acc <= v)) acc = v;
  };
  for (const auto& r : res.reports) {
    res.flagged += r.order_flagged;
    for (std::size_t j = 0; j < options.qs.size(); ++j) {
      res.kj_slack[j].push_back(r.kj_slack[j]);
      take_min(res.min_ratio_FK[j], r.ratio_FK_A2[j]);
    }
    if (r.fraenkel < kRatioAsymmetryFloor) continue;
    take_min(res.min_ratio_E, r.ratio_E_A2);
    take_min(res.min_ratio_E_A4, r.deficit_E / std::pow(r.fraenkel, 4));
    if (r.deficit_E > 0.0) {
      lx.push_back(std::log(r.fraenkel));
      ly.push_back(std::log(r.deficit_E));
    }
  }
  if (lx.size() >= 2 && *std::max_element(lx.begin(), lx.end()) > *std::min_element(lx.begin(), lx.end())) {
    const LineFit f = fit_line(lx, ly);
    res.exponent = f.slope;
    res.exponent_intercept = f.intercept;
    res.exponent_residual = f.residual;
  }
  return res;
}

SweepResult sigma_scan(const std::vector<FamilyMember>& members, const MeshPlan& plan,
                       const SweepOptions& options) {
  StabilityEvaluator ev(plan);
  return sigma_scan(members, ev, options);
}

}  // namespace fklab
