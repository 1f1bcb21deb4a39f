#pragma once

// P1 finite elements on ring-sector triangulations of star-shaped domains.

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "fklab/domain.hpp"
#include "fklab/point.hpp"

namespace fklab {

struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<int> boundary_vertices;         // counter-clockwise around the boundary
  /// Boundary edge e runs from boundary_vertices[e] to boundary_vertices[e+1]
  /// and belongs to triangle boundary_edge_triangle[e].
  std::vector<int> boundary_edge_triangle;
  int rings = 0;
  int sectors = 0;  // vertices on the outermost ring

  double triangle_area(int t) const;
  double area() const;
  /// Longest edge.
  double h() const;
  bool is_boundary(int v) const;

 private:
  friend TriMesh polar_mesh(const StarDomain&, int);
  std::vector<char> on_boundary_;
};

/// Ring i (1..rings) carries 6 i vertices at reference radius rho = i / rings,
/// placed at distance rho (r_min + rho^2 (r(theta) - r_min)) from the center. Two meshes with the same ring count have identical
/// connectivity whatever the domain. Throws InvalidInput for rings < 4 and
/// NumericalFailure on inverted elements.
TriMesh polar_mesh(const StarDomain& d, int rings);

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
  double h = 0.0;
};

struct ScalarField {
  std::shared_ptr<const TriMesh> mesh;
  std::vector<double> values;  // one per vertex
  bool dirichlet = true;
};

struct SolverOptions {
  double cg_tol = 1e-10;
  int cg_max_iterations = 20000;
  double eig_tol = 1e-8;
  int eig_max_iterations = 500;
  double descent_tol = 1e-8;
  int descent_max_iterations = 5000;
  double q_max = 4.0;
};

struct EigenResult {
  double value = 0.0;
  ScalarField field;  // positive, unit L2 norm
  int iterations = 0;
};

struct PoincareResult {
  double value = 0.0;
  ScalarField field;  // positive, unit L^q norm
  int iterations = 0;
};

/// Assembled P1 system for one mesh: stiffness and mass restricted to interior
/// vertices, the load of f = 1, and a lazily built sparse factorization reused
/// by every inverse iteration. Not safe for concurrent use of one instance.
class FemProblem {
 public:
  explicit FemProblem(TriMesh mesh, SolverOptions options = {});
  FemProblem(const FemProblem&) = delete;
  FemProblem& operator=(const FemProblem&) = delete;
  FemProblem(FemProblem&&) noexcept;
  FemProblem& operator=(FemProblem&&) noexcept;
  ~FemProblem();

  const TriMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriMesh> shared_mesh() const { return mesh_; }
  const SolverOptions& options() const { return options_; }

  /// -Delta u = 1, u = 0 on the boundary; conjugate gradients with Jacobi preconditioning.
  std::pair<ScalarField, SolveStats> torsion();
  /// First Dirichlet eigenvalue by inverse iteration started from the torsion field.
  EigenResult principal_eigenvalue();
  /// min int |grad u|^2 subject to ||u||_q = 1 for 1 <= q <= q_max.
  PoincareResult poincare_sobolev(double q);

  /// Symmetry residual max |K - K^T| of the interior stiffness.
  double stiffness_symmetry_residual() const;
  /// int |grad u|^2 for a field on this mesh.
  double dirichlet_energy(const ScalarField& u) const;

 private:
  struct Impl;
  std::shared_ptr<const TriMesh> mesh_;
  SolverOptions options_;
  std::unique_ptr<Impl> impl_;
};

std::pair<ScalarField, SolveStats> solve_torsion(const TriMesh& mesh, SolverOptions options = {});
EigenResult principal_eigenvalue(const TriMesh& mesh, SolverOptions options = {});
double poincare_sobolev(const TriMesh& mesh, double q, SolverOptions options = {});

/// E = -(1/2) int u for the torsion field u (exact for P1).
double energy_of(const ScalarField& u);
/// int u over the mesh (exact for P1).
double integral_of(const ScalarField& u);
/// int |u|^q with three interior Gauss points per triangle.
double lq_norm_pow(const ScalarField& u, double q);

/// Outward flux -du/dnu on every boundary edge, from the P1 gradient of the
/// triangle owning the edge.
std::vector<double> boundary_flux(const ScalarField& u);

struct TailEstimate {
  double sup_outside = 0.0;   // max of u over vertices with |x| >= R + 1
  double measure_outside = 0.0;  // |Omega \ B_R|
};

/// Quantities of the L-infinity tail estimate around the origin: sup of u
/// outside B_{R+1} and the measure of the domain outside B_R. Requires R >= 1.
TailEstimate tail_sup(const ScalarField& u, double R);

/// int_Omega f with the 3-point interior Gauss rule.
double integrate(const TriMesh& mesh, const std::function<double(Point)>& f);
/// |Omega_h  cap  B_radius(c)| with recursive subdivision of cut triangles.
double area_inside_disk(const TriMesh& mesh, Point c, double radius, int depth = 6);

/// Text dumps: `v x y` / `t i j k` / `b i` lines, and `n index value` lines.
void write_mesh(std::ostream& out, const TriMesh& mesh);
void write_field(std::ostream& out, const ScalarField& u);

}  // namespace fklab
