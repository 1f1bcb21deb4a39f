#pragma once

// Star-shaped planar domains described in polar form about a center point.

#include <functional>

#include "fklab/circle.hpp"
#include "fklab/point.hpp"

namespace fklab {

/// How the radius is obtained from the stored Fourier profile phi:
///   Linear:            r = scale * (1 + phi)
///   SquareRoot:        r = scale * sqrt(1 + phi)      (volume-interpolating flow)
///   InverseSquareRoot: r = scale / sqrt(1 + phi)      (ellipses)
/// Keeping r^2 or r^-2 as a trigonometric polynomial lets the flow and the
/// ellipse family be represented without a truncated re-fit.
enum class RadialLaw { Linear, SquareRoot, InverseSquareRoot };

struct StarDomain {
  Point center;
  BoundaryProfile profile;
  RadialLaw law = RadialLaw::Linear;
  double scale = 1.0;

  StarDomain() = default;
  explicit StarDomain(BoundaryProfile phi, Point c = {}) : center(c), profile(std::move(phi)) {}

  static StarDomain disk(Point c = {}, double radius = 1.0);

  double radius(double theta) const;
  Point boundary_point(double theta) const { return center + radius(theta) * unit(theta); }
  bool contains(Point p) const;

  /// Number of samples that resolves the radial function: 4K+1 with K the profile modes.
  int resolution() const { return 4 * profile.max_mode() + 1; }

  /// Throws InvalidInput unless the radius is finite and positive on the resolution grid.
  void validate() const;
};

StarDomain translate(StarDomain d, Point shift);
/// Dilation about the origin.
StarDomain dilate(StarDomain d, double factor);

/// |Omega|. Exact Fourier arithmetic for the Linear and SquareRoot laws.
double volume(const StarDomain& d);
Point barycenter(const StarDomain& d);

/// Integral over [0, 2 pi) of a smooth periodic function with the trapezoid rule,
/// doubling the sample count from `start` until two consecutive values agree to
/// `rel_tol` (spectral convergence for analytic integrands).
double periodic_integral(const std::function<double(double)>& f, int start = 64,
                         double rel_tol = 1e-15);

struct ProfileFit {
  BoundaryProfile profile;
  /// Boundary L2 mass of the part of the sampled radius that the kept modes miss.
  double tail_energy = 0.0;
  int samples = 0;
};

/// Radial profile of d seen from the point c, r_c(theta) = 1 + profile(theta).
/// Rays are intersected with the boundary by bisection and the result is
/// Fourier fitted with `extra_modes` more modes than the input profile; the mode
/// count doubles while the fit residual energy exceeds 1e-22 (at most 512 modes).
/// Throws NotStarShaped if a ray from c meets the boundary more than once.
ProfileFit profile_relative_to(const StarDomain& d, Point c, int extra_modes = 8);

/// Translates the barycenter to the origin and dilates to volume pi.
/// The output is always in Linear form.
StarDomain recenter_rescale(const StarDomain& d);

/// {x^2 + (1 + eps) y^2 <= 1} dilated to volume pi. Requires 0 <= eps < 1.
StarDomain ellipse(double eps);

/// Image of the unit disk under the radial flow Phi_t that carries dB1 onto the
/// boundary r = 1 + phi: r_t(theta)^2 = 1 + t ((1 + phi)^2 - 1).
StarDomain volume_flow(const BoundaryProfile& p, double t);

struct FlowFamily {
  BoundaryProfile target_profile;
  StarDomain at(double t) const { return volume_flow(target_profile, t); }
};

/// phi = a0 + s cos(k theta) with a0 chosen so that 1 + phi bounds area pi.
BoundaryProfile volume_corrected_profile(int k, double s);

/// Replaces a0 so that the Linear domain 1 + phi has area pi.
BoundaryProfile volume_correct(BoundaryProfile p);

}  // namespace fklab
