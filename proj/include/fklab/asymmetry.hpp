#pragma once

// Fraenkel asymmetry, the alpha asymmetry, and the penalty functions used to
// build the penalized energy functionals.

#include <functional>
#include <vector>

#include "fklab/domain.hpp"
#include "fklab/fem.hpp"
#include "fklab/point.hpp"

namespace fklab {

/// Volume of the unit ball in R^dim.
double unit_ball_volume(int dim);
/// Torsion energy of the unit ball in R^dim, -omega_N / (2 N (N + 2)).
double ball_energy(int dim);

// --- ball intersections ---------------------------------------------------------

/// |Omega cap B_radius(x)|, integrated along rays from the domain center with
/// every kink of the integrand located and used as a quadrature breakpoint.
double intersection_with_ball(const StarDomain& d, Point x, double radius = 1.0);
/// |Omega  Delta  B_radius(x)|.
double symmetric_difference_with_ball(const StarDomain& d, Point x, double radius = 1.0);
/// Mesh cross-check of the symmetric difference with B_1(x).
double symmetric_difference_mesh(const TriMesh& mesh, Point x);

// --- Fraenkel asymmetry ---------------------------------------------------------

struct SimplexOptions {
  double initial_step = 0.05;
  double tolerance = 1e-6;  // simplex diameter
  int max_evaluations = 2000;
};

struct SimplexResult {
  Point argmin;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead in the plane (reflection, expansion, contraction, shrink).
SimplexResult minimize_simplex(const std::function<double(Point)>& f, Point start,
                               const SimplexOptions& options = {});

struct FraenkelOptions {
  SimplexOptions simplex;
  double start_radius = 0.25;  // axial multistarts around the barycenter
  double volume_tolerance = 1e-6;
};

struct FraenkelResult {
  double value = 0.0;
  Point center;
  int evaluations = 0;
};

/// |Omega  Delta  B_1(x)| / pi for a fixed center (no optimization).
double fraenkel_at(const StarDomain& d, Point x);
/// Infimum over centers of |Omega  Delta  B_1(x)| / pi. Requires |Omega| = pi.
FraenkelResult fraenkel(const StarDomain& d, const FraenkelOptions& options = {});

// --- alpha asymmetry ------------------------------------------------------------

/// beta_N = int_{B_1} (1 - |x|) = omega_N / (N + 1).
double beta_const(int dim);
/// Gauss-Legendre evaluation of N omega_N int_0^1 (1 - r) r^{N-1} dr.
double beta_quadrature(int dim);

/// alpha = beta_2 + int_Omega (|x - x_Omega| - 1), integrated in polar form
/// about the barycenter.
double alpha(const StarDomain& d);
/// Same integral by mesh quadrature about the point x.
double alpha_mesh(const TriMesh& mesh, Point x);

/// Lower bound for alpha from rearranging Omega \ B and B \ Omega into annuli
/// around the unit circle, given their measures.
double annular_lower_bound(double outside_measure, double missing_measure);
/// The same bound evaluated for d with B = B_1(x_Omega).
double annular_lower_bound(const StarDomain& d);

struct AsymmetryReport {
  double fraenkel = 0.0;
  Point fraenkel_center;
  double alpha = 0.0;
  Point barycenter;
  double sym_diff_to_unit_ball_at_barycenter = 0.0;
  double center_tolerance = 0.0;
  int evaluations = 0;
};

AsymmetryReport asymmetry_report(const StarDomain& d, const FraenkelOptions& options = {});

// --- penalization ---------------------------------------------------------------

/// eta (s - omega_N) for s <= omega_N, (s - omega_N) / eta above. Requires
/// 0 < eta <= 1 and s >= 0.
double f_eta(double s, double eta, int dim = 2);

/// g(r) = r^{N+2} E(B_1) + f_eta(omega_N r^N), the penalized energy of B_r.
double radial_g(double r, double eta, int dim = 2);

struct EtaThresholds {
  double outer = 0.0;     // g' > 0 on (1, R]: eta < N omega_N / ((N+2) R^2 |E(B_1)|)
  double inner = 0.0;     // g(r) > g(1) on (0, 1): eta < |E(B_1)| / omega_N
  double combined = 0.0;  // min of the two
};

EtaThresholds eta_thresholds(double R, int dim = 2);
/// eta_thresholds(R, dim).combined
double eta_threshold(double R, int dim = 2);

struct RadialCoercivity {
  double r_at_min = 0.0;
  double g_min = 0.0;
  double g_one = 0.0;
  double left_slope = 0.0;   // min over r < 1 of (g(r) - g(1)) / (1 - r)
  double right_slope = 0.0;  // min over r > 1 of (g(r) - g(1)) / (r - 1)
  double c4 = 0.0;           // 1 / min(left, right); infinite if a slope is <= 0
  bool minimum_at_one = false;
};

/// Evaluates g on the grid (r = 1 is added if absent). Throws InvalidInput
/// unless the grid has positive points on both sides of 1.
RadialCoercivity radial_coercivity(double eta, const std::vector<double>& r_grid, int dim = 2);

/// F_eta = E + f_eta(|Omega|) from already computed values.
double penalized_F(double energy, double volume, double eta);
/// F_eta(Omega) with E from a P1 solve on `rings` rings.
double penalized_F(const StarDomain& d, double eta, int rings, const SolverOptions& options = {});

/// G = F_eta + sqrt(eps^2 + sigma^2 (alpha - eps)^2). Requires eps > 0, 0 < sigma < 1.
double penalized_G(double F, double alpha_value, double eps, double sigma);
double penalized_G(const StarDomain& d, double eta, double eps, double sigma, int rings,
                   const SolverOptions& options = {});

}  // namespace fklab
