#include "fklab/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>

#include "fklab/errors.hpp"

namespace fklab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Barycentric coordinates of the interior Gauss points (degree 2).
constexpr double kGauss[3][3] = {
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
};

double signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

// Gradients of the three barycentric functions on a triangle.
std::array<Point, 3> shape_gradients(const TriMesh& m, int t) {
  const auto& tri = m.triangles[t];
  const Point p0 = m.vertices[tri[0]], p1 = m.vertices[tri[1]], p2 = m.vertices[tri[2]];
  const double a2 = 2.0 * signed_area(p0, p1, p2);
  auto rot = [&](Point e) { return Point{-e.y / a2, e.x / a2}; };
  return {rot(p2 - p1), rot(p0 - p2), rot(p1 - p0)};
}

double seg_point_distance(Point a, Point b, Point p) {
  const Point ab = b - a;
  const double l2 = dot(ab, ab);
  double t = l2 > 0.0 ? dot(p - a, ab) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(a + t * ab - p);
}

double area_in_disk_rec(Point a, Point b, Point c, Point o, double r, int depth) {
  const double area = std::abs(signed_area(a, b, c));
  const double da = norm(a - o), db = norm(b - o), dc = norm(c - o);
  if (std::max({da, db, dc}) <= r) return area;
  const double s1 = cross(b - a, o - a), s2 = cross(c - b, o - b), s3 = cross(a - c, o - c);
  const bool o_inside = (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
  const double dmin = o_inside ? 0.0
                               : std::min({seg_point_distance(a, b, o), seg_point_distance(b, c, o),
                                           seg_point_distance(c, a, o)});
  if (dmin >= r) return 0.0;
  if (depth == 0) {
    const int inside = (da <= r) + (db <= r) + (dc <= r);
    const Point g = (a + b + c) * (1.0 / 3.0);
    return area * (inside + 3.0 * (norm(g - o) <= r)) / 6.0;
  }
  const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  return area_in_disk_rec(a, ab, ca, o, r, depth - 1) + area_in_disk_rec(ab, b, bc, o, r, depth - 1) +
         area_in_disk_rec(ca, bc, c, o, r, depth - 1) + area_in_disk_rec(ab, bc, ca, o, r, depth - 1);
}

}  // namespace

// --- mesh ---------------------------------------------------------------------

double TriMesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double TriMesh::area() const {
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) s += triangle_area(t);
  return s;
}

double TriMesh::h() const {
  double h = 0.0;
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      h = std::max(h, norm(vertices[tri[k]] - vertices[tri[(k + 1) % 3]]));
    }
  }
  return h;
}

bool TriMesh::is_boundary(int v) const { return on_boundary_.at(v) != 0; }

TriMesh polar_mesh(const StarDomain& d, int rings) {
  if (rings < 4) throw InvalidInput("mesh needs at least 4 rings");
  if (rings > 4096) throw InvalidInput("mesh ring count too large");
  d.validate();
  TriMesh m;
  m.rings = rings;
  m.sectors = 6 * rings;
  const int nv = 1 + 3 * rings * (rings + 1);
  m.vertices.reserve(nv);
  m.vertices.push_back(d.center);
  std::vector<double> outer_radius(m.sectors);
  for (int j = 0; j < m.sectors; ++j) outer_radius[j] = d.radius(kTwoPi * j / m.sectors);
  const double r_min = *std::min_element(outer_radius.begin(), outer_radius.end());
  for (int i = 1; i <= rings; ++i) {
    const int count = 6 * i;
    const double rho = static_cast<double>(i) / rings;
    // Blend from the inscribed radius near the center to r(theta) on the boundary
    // so coarse inner rings never see the full angular variation of the boundary.
    // The radial map rho (r_min + rho^2 (r - r_min)) is increasing in rho.
    const double blend = rho * rho;
    for (int j = 0; j < count; ++j) {
      const double theta = kTwoPi * j / count;
      const int step = m.sectors / count;
      const double r = (m.sectors % count == 0) ? outer_radius[j * step] : d.radius(theta);
      m.vertices.push_back(d.center + (rho * (r_min + blend * (r - r_min))) * unit(theta));
    }
  }
  auto first = [](int i) { return i == 0 ? 0 : 1 + 3 * (i - 1) * i; };
  m.triangles.reserve(6 * rings * rings);
  m.boundary_edge_triangle.assign(m.sectors, -1);
  for (int i = 1; i <= rings; ++i) {
    const int m1 = 6 * i, o1 = first(i);
    if (i == 1) {
      for (int b = 0; b < m1; ++b) {
        m.triangles.push_back({0, o1 + b, o1 + (b + 1) % m1});
        if (rings == 1) m.boundary_edge_triangle[b] = static_cast<int>(m.triangles.size()) - 1;
      }
      continue;
    }
    const int m0 = 6 * (i - 1), o0 = first(i - 1);
    int a = 0, b = 0;
    while (a < m0 || b < m1) {
      const bool outer_step =
          b < m1 && (a == m0 || static_cast<long long>(b + 1) * m0 <= static_cast<long long>(a + 1) * m1);
      if (outer_step) {
        m.triangles.push_back({o0 + a % m0, o1 + b, o1 + (b + 1) % m1});
        if (i == rings) m.boundary_edge_triangle[b] = static_cast<int>(m.triangles.size()) - 1;
        ++b;
      } else {
        m.triangles.push_back({o0 + a, o1 + b % m1, o0 + (a + 1) % m0});
        ++a;
      }
    }
  }
  m.on_boundary_.assign(m.vertices.size(), 0);
  const int ob = first(rings);
  for (int j = 0; j < m.sectors; ++j) {
    m.boundary_vertices.push_back(ob + j);
    m.on_boundary_[ob + j] = 1;
  }
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    if (!(m.triangle_area(t) > 0.0)) {
      throw NumericalFailure("inverted or degenerate element " + std::to_string(t));
    }
  }
  return m;
}

// --- assembled problem --------------------------------------------------------

struct FemProblem::Impl {
  std::vector<int> dof;  // vertex -> interior index or -1
  std::vector<int> vertex_of;
  SpMat K, M;
  Vec F;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt;
  std::optional<std::pair<ScalarField, SolveStats>> torsion;

  const Eigen::SimplicialLDLT<SpMat>& factor() {
    if (!ldlt) {
      ldlt = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(K);
      if (ldlt->info() != Eigen::Success) throw NumericalFailure("stiffness factorization failed");
    }
    return *ldlt;
  }

  ScalarField expand(const std::shared_ptr<const TriMesh>& mesh, const Vec& x) const {
    ScalarField u{mesh, std::vector<double>(mesh->vertices.size(), 0.0), true};
    for (int k = 0; k < x.size(); ++k) u.values[vertex_of[k]] = x[k];
    return u;
  }

  Vec restrict(const ScalarField& u) const {
    Vec x(static_cast<Eigen::Index>(vertex_of.size()));
    for (std::size_t k = 0; k < vertex_of.size(); ++k) x[k] = u.values[vertex_of[k]];
    return x;
  }
};

FemProblem::FemProblem(TriMesh mesh, SolverOptions options)
    : mesh_(std::make_shared<const TriMesh>(std::move(mesh))),
      options_(options),
      impl_(std::make_unique<Impl>()) {
  const TriMesh& m = *mesh_;
  auto& I = *impl_;
  I.dof.assign(m.vertices.size(), -1);
  for (int v = 0; v < static_cast<int>(m.vertices.size()); ++v) {
    if (!m.is_boundary(v)) {
      I.dof[v] = static_cast<int>(I.vertex_of.size());
      I.vertex_of.push_back(v);
    }
  }
  const auto n = static_cast<Eigen::Index>(I.vertex_of.size());
  if (n == 0) throw InvalidInput("mesh has no interior vertices");
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(9 * m.triangles.size());
  mt.reserve(9 * m.triangles.size());
  I.F = Vec::Zero(n);
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto& tri = m.triangles[t];
    const double area = m.triangle_area(t);
    const auto g = shape_gradients(m, t);
    for (int i = 0; i < 3; ++i) {
      const int di = I.dof[tri[i]];
      if (di < 0) continue;
      I.F[di] += area / 3.0;
      for (int j = 0; j < 3; ++j) {
        const int dj = I.dof[tri[j]];
        if (dj < 0) continue;
        kt.emplace_back(di, dj, area * dot(g[i], g[j]));
        mt.emplace_back(di, dj, area * (i == j ? 2.0 : 1.0) / 12.0);
      }
    }
  }
  I.K.resize(n, n);
  I.M.resize(n, n);
  I.K.setFromTriplets(kt.begin(), kt.end());
  I.M.setFromTriplets(mt.begin(), mt.end());
}

FemProblem::FemProblem(FemProblem&&) noexcept = default;
FemProblem& FemProblem::operator=(FemProblem&&) noexcept = default;
FemProblem::~FemProblem() = default;

double FemProblem::stiffness_symmetry_residual() const {
  const SpMat diff = impl_->K - SpMat(impl_->K.transpose());
  double r = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SpMat::InnerIterator it(diff, k); it; ++it) r = std::max(r, std::abs(it.value()));
  }
  return r;
}

double FemProblem::dirichlet_energy(const ScalarField& u) const {
  if (u.mesh.get() != mesh_.get() && u.values.size() != mesh_->vertices.size()) {
    throw InvalidInput("field does not live on this mesh");
  }
  const TriMesh& m = *mesh_;
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto& tri = m.triangles[t];
    const auto g = shape_gradients(m, t);
    const Point grad = u.values[tri[0]] * g[0] + u.values[tri[1]] * g[1] + u.values[tri[2]] * g[2];
    s += m.triangle_area(t) * dot(grad, grad);
  }
  return s;
}

std::pair<ScalarField, SolveStats> FemProblem::torsion() {
  auto& I = *impl_;
  if (I.torsion) return *I.torsion;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(options_.cg_tol);
  cg.setMaxIterations(options_.cg_max_iterations);
  cg.compute(I.K);
  const Vec x = cg.solve(I.F);
  if (cg.info() != Eigen::Success) {
    throw NumericalFailure("torsion CG did not converge: residual " + std::to_string(cg.error()) +
                           " after " + std::to_string(cg.iterations()) + " iterations");
  }
  SolveStats stats{static_cast<int>(cg.iterations()), cg.error(), mesh_->h()};
  I.torsion.emplace(I.expand(mesh_, x), stats);
  return *I.torsion;
}

EigenResult FemProblem::principal_eigenvalue() {
  auto& I = *impl_;
  const auto& solver = I.factor();
  Vec x = I.restrict(torsion().first);
  x /= std::sqrt(x.dot(I.M * x));
  double lambda = x.dot(I.K * x);
  for (int it = 1; it <= options_.eig_max_iterations; ++it) {
    Vec y = solver.solve(I.M * x);
    if (solver.info() != Eigen::Success) throw NumericalFailure("eigen solve failed");
    y /= std::sqrt(y.dot(I.M * y));
    const double next = y.dot(I.K * y);
    x = std::move(y);
    const bool done = std::abs(lambda - next) <= options_.eig_tol * next;
    lambda = next;
    if (done) return {lambda, I.expand(mesh_, x), it};
  }
  throw NumericalFailure("inverse iteration did not converge in " +
                         std::to_string(options_.eig_max_iterations) + " steps");
}

PoincareResult FemProblem::poincare_sobolev(double q) {
  if (!(q >= 1.0 && q <= options_.q_max)) {
    throw InvalidInput("exponent q must lie in [1, " + std::to_string(options_.q_max) + "]");
  }
  auto& I = *impl_;
  const TriMesh& m = *mesh_;
  const auto& solver = I.factor();
  std::vector<double> area(m.triangles.size());
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) area[t] = m.triangle_area(t);

  // Q(u) = int |u|^q and its derivative / q against each hat function.
  auto lq = [&](const ScalarField& u, Vec* rhs) {
    double total = 0.0;
    if (rhs) rhs->setZero(static_cast<Eigen::Index>(I.vertex_of.size()));
    for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
      const auto& tri = m.triangles[t];
      const double w = area[t] / 3.0;
      for (const auto& g : kGauss) {
        const double v = g[0] * u.values[tri[0]] + g[1] * u.values[tri[1]] + g[2] * u.values[tri[2]];
        const double av = std::abs(v);
        total += w * std::pow(av, q);
        if (!rhs) continue;
        const double s = (q == 1.0) ? (v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0)) : std::pow(av, q - 2.0) * v;
        for (int k = 0; k < 3; ++k) {
          const int d = I.dof[tri[k]];
          if (d >= 0) (*rhs)[d] += w * s * g[k];
        }
      }
    }
    return total;
  };

  ScalarField u = torsion().first;
  auto normalize = [&](ScalarField& f) {
    const double n = std::pow(lq(f, nullptr), 1.0 / q);
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalFailure("degenerate iterate in L^q descent");
    for (double& v : f.values) v /= n;
  };
  normalize(u);
  double value = dirichlet_energy(u);
  Vec rhs;
  for (int it = 1; it <= options_.descent_max_iterations; ++it) {
    lq(u, &rhs);
    const Vec x = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw NumericalFailure("descent solve failed");
    ScalarField next = I.expand(mesh_, x);
    normalize(next);
    const double next_value = dirichlet_energy(next);
    if (next_value > value * (1.0 + 1e-12)) {
      throw NumericalFailure("L^q descent lost monotonicity at step " + std::to_string(it));
    }
    const bool done = value - next_value <= options_.descent_tol * next_value;
    u = std::move(next);
    value = next_value;
    if (done) return {value, std::move(u), it};
  }
  throw NumericalFailure("L^q descent did not converge in " +
                         std::to_string(options_.descent_max_iterations) + " steps");
}

// --- free functions -----------------------------------------------------------

std::pair<ScalarField, SolveStats> solve_torsion(const TriMesh& mesh, SolverOptions options) {
  FemProblem p(mesh, options);
  return p.torsion();
}

EigenResult principal_eigenvalue(const TriMesh& mesh, SolverOptions options) {
  FemProblem p(mesh, options);
  return p.principal_eigenvalue();
}

double poincare_sobolev(const TriMesh& mesh, double q, SolverOptions options) {
  FemProblem p(mesh, options);
  return p.poincare_sobolev(q).value;
}

namespace {
const TriMesh& mesh_of(const ScalarField& u) {
  if (!u.mesh) throw InvalidInput("field has no mesh");
  if (u.values.size() != u.mesh->vertices.size()) throw InvalidInput("field size does not match mesh");
  return *u.mesh;
}
}  // namespace

double integral_of(const ScalarField& u) {
  const TriMesh& m = mesh_of(u);
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto& tri = m.triangles[t];
    s += m.triangle_area(t) * (u.values[tri[0]] + u.values[tri[1]] + u.values[tri[2]]) / 3.0;
  }
  return s;
}

double energy_of(const ScalarField& u) { return -0.5 * integral_of(u); }

double lq_norm_pow(const ScalarField& u, double q) {
  if (!(q > 0.0)) throw InvalidInput("exponent must be positive");
  const TriMesh& m = mesh_of(u);
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto& tri = m.triangles[t];
    for (const auto& g : kGauss) {
      const double v = g[0] * u.values[tri[0]] + g[1] * u.values[tri[1]] + g[2] * u.values[tri[2]];
      s += m.triangle_area(t) / 3.0 * std::pow(std::abs(v), q);
    }
  }
  return s;
}

std::vector<double> boundary_flux(const ScalarField& u) {
  const TriMesh& m = mesh_of(u);
  std::vector<double> flux(m.boundary_vertices.size());
  for (std::size_t e = 0; e < flux.size(); ++e) {
    const Point a = m.vertices[m.boundary_vertices[e]];
    const Point b = m.vertices[m.boundary_vertices[(e + 1) % flux.size()]];
    const int t = m.boundary_edge_triangle[e];
    const auto& tri = m.triangles[t];
    const auto g = shape_gradients(m, t);
    const Point grad = u.values[tri[0]] * g[0] + u.values[tri[1]] * g[1] + u.values[tri[2]] * g[2];
    const Point edge = b - a;
    const Point normal = Point{edge.y, -edge.x} * (1.0 / norm(edge));
    flux[e] = -dot(grad, normal);
  }
  return flux;
}

TailEstimate tail_sup(const ScalarField& u, double R) {
  if (!(R >= 1.0)) throw InvalidInput("tail radius must be >= 1");
  const TriMesh& m = mesh_of(u);
  TailEstimate est;
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    if (norm(m.vertices[v]) >= R + 1.0) est.sup_outside = std::max(est.sup_outside, u.values[v]);
  }
  est.measure_outside = m.area() - area_inside_disk(m, {0.0, 0.0}, R);
  return est;
}

double integrate(const TriMesh& mesh, const std::function<double(Point)>& f) {
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point p0 = mesh.vertices[tri[0]], p1 = mesh.vertices[tri[1]], p2 = mesh.vertices[tri[2]];
    double local = 0.0;
    for (const auto& g : kGauss) local += f(g[0] * p0 + g[1] * p1 + g[2] * p2);
    s += mesh.triangle_area(t) * local / 3.0;
  }
  return s;
}

double area_inside_disk(const TriMesh& mesh, Point c, double radius, int depth) {
  if (!(radius >= 0.0)) throw InvalidInput("disk radius must be non-negative");
  double s = 0.0;
  for (const auto& tri : mesh.triangles) {
    s += area_in_disk_rec(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], c,
                          radius, depth);
  }
  return s;
}

void write_mesh(std::ostream& out, const TriMesh& mesh) {
  char buf[96];
  for (const Point& p : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", p.x, p.y);
    out << buf;
  }
  for (const auto& t : mesh.triangles) out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (int b : mesh.boundary_vertices) out << "b " << b << '\n';
}

void write_field(std::ostream& out, const ScalarField& u) {
  mesh_of(u);
  char buf[64];
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", u.values[i]);
    out << "n " << i << ' ' << buf << '\n';
  }
}

}  // namespace fklab
