#pragma once

// Scale-invariant deficits on matched meshes, the inequality chain checks, and
// sweep-level fits.

#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "fklab/asymmetry.hpp"
#include "fklab/domain.hpp"
#include "fklab/fem.hpp"

namespace fklab {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Solver tolerances used for deficits, tighter than the FEM defaults since
/// deficits are small differences of O(1) numbers.
SolverOptions deficit_solver_options();

/// Mesh levels and tolerances shared by every deficit evaluation. The observed
/// order uses a third level at rings / 2.
struct MeshPlan {
  int rings = 64;
  int rings_fine = 128;  // must equal 2 * rings
  SolverOptions solver = deficit_solver_options();
  FraenkelOptions fraenkel;
  double order_low = 1.6;
  double order_high = 2.4;
  double order_floor = 1e-12;  // level differences below this carry no order information

  void validate() const;
};

/// Richardson extrapolation with assumed order 2 over the two plan levels.
struct Extrapolated {
  double value = 0.0;
  double half = 0.0;    // rings / 2
  double coarse = 0.0;  // rings
  double fine = 0.0;    // rings_fine
  double order = kNaN;  // observed, NaN when the differences are at noise level
  bool flagged = false;
};

Extrapolated richardson(double half, double coarse, double fine, const MeshPlan& plan = {});

/// Memo of FEM values on the unit disk per ring count. Safe to share between threads.
class BallReference {
 public:
  explicit BallReference(SolverOptions options = deficit_solver_options());

  double energy(int rings);
  double lambda(int rings);
  double lambda_q(int rings, double q);

 private:
  double lookup(int kind, int rings, double q);

  SolverOptions options_;
  std::mutex mutex_;
  std::map<std::tuple<int, int, double>, std::shared_future<double>> cache_;
};

struct CappioCheck {
  double q = 0.0;
  double lhs = 0.0;  // lambda_q(Omega) / lambda_q(B) - 1
  double rhs = 0.0;  // (E(B) / E(Omega))^theta - 1
  bool holds = false;
};

struct DeficitReport {
  std::string family;
  double param = 0.0;
  double volume = 0.0;
  // values of the domain itself (undone normalization), extrapolated
  double energy = 0.0;
  double lambda = 0.0;
  std::vector<double> q;
  std::vector<double> lambda_q;
  double fraenkel = 0.0;
  double alpha = 0.0;  // of the volume-pi dilate
  double annular_bound = 0.0;
  // scale-invariant quantities
  double deficit_E = 0.0;
  double deficit_lambda = 0.0;  // Faber-Krahn, |Omega| lambda - pi lambda(B)
  std::vector<double> deficit_FK;
  double ratio_E_A2 = kNaN;  // NaN when A < ratio threshold
  std::vector<double> ratio_FK_A2;
  std::vector<double> kj_slack;
  std::vector<CappioCheck> cappio;
  // extrapolated ball references on the same meshes
  double ball_energy = 0.0;
  double ball_lambda = 0.0;
  std::vector<double> ball_lambda_q;
  int mesh_rings = 0;
  int mesh_rings_fine = 0;
  Extrapolated deficit_E_levels;
  double extrap_order = kNaN;
  bool order_flagged = false;

  std::string id() const;
};

/// Asymmetry below which ratios deficit / A^2 are not reported.
inline constexpr double kRatioAsymmetryFloor = 1e-3;
/// Sign checks allow this fraction of the ball value of each functional.
inline constexpr double kSignRelTolerance = 2e-4;

/// theta(q, N) = (1/q - (N - 2) / (2N)) 2N / (N + 2). Requires q >= 1, dim >= 2.
double kj_exponent(double q, int dim = 2);

/// Evaluates domains against a shared ball reference.
class StabilityEvaluator {
 public:
  explicit StabilityEvaluator(MeshPlan plan = {});

  const MeshPlan& plan() const { return plan_; }
  BallReference& ball() { return ball_; }

  /// Full report: energy, eigenvalue, lambda_{2,q} for every q, asymmetries.
  DeficitReport evaluate(const StarDomain& d, const std::vector<double>& qs,
                         const std::string& family = "domain", double param = 0.0);

  /// (E(Omega)|Omega|^{-2} - E(B)|B|^{-2}) on matched meshes.
  Extrapolated energy_deficit(const StarDomain& d);
  /// |Omega|^{2/q} lambda_q(Omega) - |B|^{2/q} lambda_q(B) on matched meshes.
  Extrapolated fk_deficit(const StarDomain& d, double q);
  /// (E(Omega) - E(B_1)) extrapolated, for a domain already of volume pi.
  Extrapolated energy_difference(const StarDomain& d);

 private:
  MeshPlan plan_;
  BallReference ball_;
};

Extrapolated energy_deficit(const StarDomain& d, const MeshPlan& plan = {});
Extrapolated fk_deficit(const StarDomain& d, double q, const MeshPlan& plan = {});
/// lambda_q(Omega) (-E(Omega))^theta - lambda_q(B) (-E(B))^theta. Requires q > 1.
double kj_slack(const StarDomain& d, double q, const MeshPlan& plan = {});
/// Requires |Omega| = pi and q > 1.
CappioCheck cappio_check(const StarDomain& d, double q, const MeshPlan& plan = {});

/// Human readable descriptions of every sign or chain violation in the report:
/// Saint-Venant, Faber-Krahn, Kohler-Jobin, the concavity inequality, and
/// "FK deficit > 0 whenever the energy deficit exceeds its tolerance".
std::vector<std::string> sign_violations(const DeficitReport& r, double rel_tol = kSignRelTolerance);

// --- second-order expansion -----------------------------------------------------

struct TaylorFit {
  int k = 0;
  std::vector<double> s;
  std::vector<double> ratio;  // (E(Omega_s) - E(B_1)) / s^2, extrapolated
  double limit = 0.0;
  double target = 0.0;  // pi (k - 1) / 8
  double residual = 0.0;  // rms of the fit
};

/// Fits (E(Omega_s) - E(B_1)) / s^2 = L + c s^2 (+ d s^4 with five or more
/// points) along volume-corrected mode-k profiles. Requires k >= 1 and every s in
/// (0, 0.1]. Throws NumericalFailure when the rms residual exceeds
/// max_rel_residual * max(|L|, pi / 8).
TaylorFit taylor_validation(int k, const std::vector<double>& s_values, const MeshPlan& plan = {},
                            double max_rel_residual = 1e-3);
TaylorFit taylor_validation(StabilityEvaluator& ev, int k, const std::vector<double>& s_values,
                            double max_rel_residual = 1e-3);

/// (E(Omega_phi) - E(B_1)) / ||phi||^2_{H^1/2}. Requires ||phi||_inf <= 0.05, phi
/// volume corrected and the barycenter of Omega_phi at the origin.
double fuglede_margin(const BoundaryProfile& p, const MeshPlan& plan = {});
double fuglede_margin(StabilityEvaluator& ev, const BoundaryProfile& p);

/// Lower bound asserted by the nearly spherical stability estimate, 1 / (32 N^2).
double fuglede_bound(int dim = 2);

struct SharpnessResult {
  std::vector<double> eps;
  std::vector<double> deficit;
  std::vector<double> fraenkel;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms in log space
  double asym_ratio_spread = 0.0;  // max / min - 1 of A / eps
  bool ratios_positive = false;  // D / A^2 > 0 on every point
};

/// Log-log fit of D(Omega_eps) against eps on the ellipse family. Requires at
/// least five values, all in [0.02, 0.2].
SharpnessResult sharpness_fit(const std::vector<double>& eps_values, const MeshPlan& plan = {});
SharpnessResult sharpness_fit(StabilityEvaluator& ev, const std::vector<double>& eps_values);

// --- families and sweeps --------------------------------------------------------

struct FamilyMember {
  std::string family;
  double param = 0.0;
  StarDomain domain;
};

/// Ellipses with eps geometrically spaced in [eps_min, eps_max] (count >= 1).
std::vector<FamilyMember> ellipse_family(double eps_min, double eps_max, int count);

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double uniform01(std::mt19937_64& rng);

/// Modes 2..8 with uniform coefficients in [-1, 1] decaying like k^-2, rescaled to
/// the given sup norm on the sampling grid.
BoundaryProfile random_mode_mix(std::mt19937_64& rng, double sup);

/// count near-spheres: random_mode_mix with sup uniform in [sup_min, sup_max],
/// volume corrected, then recentered at the barycenter with volume pi.
std::vector<FamilyMember> random_family(int count, std::uint64_t seed, double sup_min = 0.01,
                                        double sup_max = 0.05);

struct SweepOptions {
  std::vector<double> qs{1.5, 2.0, 3.0};
  int threads = 0;  // 0: hardware concurrency
  /// Called once per finished member (from worker threads, serialized).
  std::function<void(std::size_t index, const DeficitReport&)> progress;
};

struct SweepResult {
  std::vector<double> qs;
  std::vector<DeficitReport> reports;  // input order
  double exponent = kNaN;  // slope of log D against log A
  double exponent_intercept = kNaN;
  double exponent_residual = kNaN;
  double min_ratio_E = kNaN;  // empirical sigma_E over members with A >= floor
  std::vector<double> min_ratio_FK;
  double min_ratio_E_A4 = kNaN;  // the non-sharp comparison D / A^4
  std::vector<std::vector<double>> kj_slack;  // [q][member]
  int flagged = 0;
};

/// Evaluates every member, concurrently, and reduces in input order. A member
/// whose evaluation throws aborts the scan with NumericalFailure naming it.
SweepResult sigma_scan(const std::vector<FamilyMember>& members, StabilityEvaluator& ev,
                       const SweepOptions& options = {});
SweepResult sigma_scan(const std::vector<FamilyMember>& members, const MeshPlan& plan = {},
                       const SweepOptions& options = {});

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms
};

/// Least-squares line through (x, y). Requires two or more distinct x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fklab
