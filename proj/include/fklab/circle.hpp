#pragma once

// Fourier-side analysis on the unit circle: harmonic extension energies, the
// H^{1/2} norm, the second shape derivative of the energy at the unit ball and
// the low-mode projection used in the nearly-spherical stability argument.
//
// A boundary perturbation is a truncated Fourier series
//
//   phi(theta) = a0 + sum_{k=1}^{K} (a_k cos k theta + b_k sin k theta).
//
// Every integral below is evaluated in closed form from the coefficients.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fklab {

struct BoundaryProfile {
  double a0 = 0.0;
  /// cos_coeffs[k-1] multiplies cos(k theta); both arrays have length K.
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  BoundaryProfile() = default;
  BoundaryProfile(double constant, std::vector<double> cosines, std::vector<double> sines);

  /// A profile with a single cosine (or sine) mode of amplitude `amp`.
  static BoundaryProfile cosine(int k, double amp = 1.0);
  static BoundaryProfile sine(int k, double amp = 1.0);
  static BoundaryProfile constant(double value);

  int max_mode() const { return static_cast<int>(cos_coeffs.size()); }
  double a(int k) const;  // 0 outside 1..K
  double b(int k) const;

  double operator()(double theta) const;
  /// d phi / d theta
  double derivative(double theta) const;

  /// |a0| + sum(|a_k| + |b_k|), a certified upper bound for sup |phi|.
  double sup_bound() const;
  /// max |phi| sampled on a uniform grid of max(4K+1, min_points) angles.
  double sup_on_grid(int min_points = 0) const;

  bool is_zero() const;
  bool all_finite() const;

  /// Grows the coefficient arrays to `k` modes (zero padding).
  void resize(int k);
  /// Drops trailing zero modes.
  void trim();

  BoundaryProfile& operator+=(const BoundaryProfile& other);
  BoundaryProfile& operator-=(const BoundaryProfile& other);
  BoundaryProfile& operator*=(double c);
};

BoundaryProfile operator+(BoundaryProfile lhs, const BoundaryProfile& rhs);
BoundaryProfile operator-(BoundaryProfile lhs, const BoundaryProfile& rhs);
BoundaryProfile operator*(double c, BoundaryProfile p);
BoundaryProfile operator*(BoundaryProfile p, double c);

/// Exact Fourier product; the result has max_mode = K1 + K2.
BoundaryProfile multiply(const BoundaryProfile& p, const BoundaryProfile& q);

/// Record format: `a0 k:a_k:b_k ...`, tokens separated by whitespace.
/// Modes may appear in any order; missing modes are zero.
BoundaryProfile parse_profile(std::string_view record);
std::string format_profile(const BoundaryProfile& p);

/// Trapezoid samples of phi at n uniform angles 2 pi j / n.
std::vector<double> sample_profile(const BoundaryProfile& p, int n);

/// Least-squares Fourier fit of uniform samples (trapezoid DFT) keeping modes <= max_mode.
BoundaryProfile fit_fourier(const std::vector<double>& samples, int max_mode);

// --- closed-form circle integrals ------------------------------------------

/// int_{dB1} phi^2 = 2 pi a0^2 + pi sum (a_k^2 + b_k^2)
double boundary_l2_sq(const BoundaryProfile& p);
/// int_{B1} |grad H(phi)|^2 = pi sum k (a_k^2 + b_k^2)
double extension_energy(const BoundaryProfile& p);
/// ||phi||^2_{H^{1/2}} = boundary L2 + extension energy.
double h_half_norm_sq(const BoundaryProfile& p);
/// <p, q> in the H^{1/2} inner product.
double h_half_inner(const BoundaryProfile& p, const BoundaryProfile& q);

/// (1/dim^2) (int |grad H(phi)|^2 - int phi^2). For dim > 2 each Fourier mode k is
/// read as a degree-k spherical harmonic carrying the same boundary L2 mass, using
/// extension energy = degree * boundary mass.
double hessian_form(const BoundaryProfile& p, int dim);
double hessian_bilinear(const BoundaryProfile& p, const BoundaryProfile& q, int dim);

/// Second shape derivative from harmonic degree masses: masses[l] = ||Y_l||^2_{L^2}.
double hessian_from_degree_masses(const std::vector<double>& masses, int dim);

struct ProjectionSplit {
  BoundaryProfile low;   // modes 0 and 1
  BoundaryProfile high;  // modes >= 2
};

ProjectionSplit low_mode_projection(const BoundaryProfile& p);

/// (|int xi| + |int x1 xi| + |int x2 xi|) / ||xi||_{H^{1/2}}; zero exactly on M0.
double m_delta_defect(const BoundaryProfile& p);

/// Minimum over {xi : modes in [min_mode, max_mode]} of extension energy over
/// boundary L2. With min_mode = 2 this is the Steklov problem restricted to M0.
double steklov_min_rayleigh(int max_mode, int min_mode = 2);

/// hessian_form / h_half_norm_sq.
double coercivity_margin(const BoundaryProfile& p, int dim);

}  // namespace fklab
