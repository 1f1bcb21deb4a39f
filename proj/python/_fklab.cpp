#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fklab/asymmetry.hpp"
#include "fklab/circle.hpp"
#include "fklab/cli.hpp"
#include "fklab/domain.hpp"
#include "fklab/errors.hpp"
#include "fklab/fem.hpp"
#include "fklab/stability.hpp"

namespace py = pybind11;
using namespace fklab;

namespace {

SolverOptions solver_or_default(const std::optional<SolverOptions>& s) { return s ? *s : deficit_solver_options(); }

py::dict check_dict(const SuiteResult& r) {
  py::list checks;
  for (const auto& c : r.checks) checks.append(py::make_tuple(c.name, c.pass, c.detail));
  py::dict d;
  d["name"] = r.name;
  d["passed"] = r.passed();
  d["checks"] = checks;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fklab, m) {
  m.doc() = "Quantitative Saint-Venant and Faber-Krahn stability on planar star-shaped domains";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<InvalidInput> invalid(m, "InvalidInput", PyExc_ValueError);
  static py::exception<NotStarShaped> not_star(m, "NotStarShaped", invalid.ptr());
  static py::exception<NumericalFailure> numerical(m, "NumericalFailure", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const NotStarShaped& e) {
      py::set_error(not_star, e.what());
    } catch (const InvalidInput& e) {
      py::set_error(invalid, e.what());
    } catch (const NumericalFailure& e) {
      py::set_error(numerical, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<Point>(m, "Point")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Point::x)
      .def_readwrite("y", &Point::y)
      .def("__repr__", [](const Point& p) { return "Point(" + py::repr(py::float_(p.x)).cast<std::string>() + ", " +
                                                   py::repr(py::float_(p.y)).cast<std::string>() + ")"; });

  // --- circle ---
  py::class_<BoundaryProfile>(m, "BoundaryProfile")
      .def(py::init<>())
      .def(py::init<double, std::vector<double>, std::vector<double>>(), py::arg("a0"), py::arg("cos"), py::arg("sin"))
      .def_static("cosine", &BoundaryProfile::cosine, py::arg("k"), py::arg("amp") = 1.0)
      .def_static("sine", &BoundaryProfile::sine, py::arg("k"), py::arg("amp") = 1.0)
      .def_static("constant", &BoundaryProfile::constant)
      .def_static("parse", [](const std::string& s) { return parse_profile(s); })
      .def_readwrite("a0", &BoundaryProfile::a0)
      .def_readwrite("cos_coeffs", &BoundaryProfile::cos_coeffs)
      .def_readwrite("sin_coeffs", &BoundaryProfile::sin_coeffs)
      .def_property_readonly("max_mode", &BoundaryProfile::max_mode)
      .def("__call__", &BoundaryProfile::operator())
      .def("derivative", &BoundaryProfile::derivative)
      .def("sup_bound", &BoundaryProfile::sup_bound)
      .def("sup_on_grid", &BoundaryProfile::sup_on_grid, py::arg("min_points") = 0)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(double() * py::self)
      .def(py::self * double())
      .def("__str__", [](const BoundaryProfile& p) { return format_profile(p); })
      .def("__repr__", [](const BoundaryProfile& p) { return "BoundaryProfile.parse('" + format_profile(p) + "')"; });

  m.def("boundary_l2_sq", &boundary_l2_sq);
  m.def("extension_energy", &extension_energy);
  m.def("h_half_norm_sq", &h_half_norm_sq);
  m.def("h_half_inner", &h_half_inner);
  m.def("hessian_form", &hessian_form, py::arg("p"), py::arg("dim") = 2);
  m.def("coercivity_margin", &coercivity_margin, py::arg("p"), py::arg("dim") = 2);
  m.def("low_mode_projection", [](const BoundaryProfile& p) {
    const auto s = low_mode_projection(p);
    return py::make_tuple(s.low, s.high);
  });
  m.def("steklov_min_rayleigh", &steklov_min_rayleigh, py::arg("max_mode"), py::arg("min_mode") = 2);

  // --- domain ---
  py::enum_<RadialLaw>(m, "RadialLaw")
      .value("Linear", RadialLaw::Linear)
      .value("SquareRoot", RadialLaw::SquareRoot)
      .value("InverseSquareRoot", RadialLaw::InverseSquareRoot);

  py::class_<StarDomain>(m, "StarDomain")
      .def(py::init<>())
      .def(py::init<BoundaryProfile, Point>(), py::arg("profile"), py::arg("center") = Point{})
      .def_static("disk", &StarDomain::disk, py::arg("center") = Point{}, py::arg("radius") = 1.0)
      .def_readwrite("center", &StarDomain::center)
      .def_readwrite("profile", &StarDomain::profile)
      .def_readwrite("law", &StarDomain::law)
      .def_readwrite("scale", &StarDomain::scale)
      .def("radius", &StarDomain::radius)
      .def("contains", &StarDomain::contains)
      .def("validate", &StarDomain::validate);

  m.def("volume", &volume);
  m.def("barycenter", &barycenter);
  m.def("translate", &translate);
  m.def("dilate", &dilate);
  m.def("ellipse", &ellipse, py::arg("eps"));
  m.def("volume_correct", &volume_correct);
  m.def("volume_corrected_profile", &volume_corrected_profile, py::arg("k"), py::arg("s"));
  m.def("volume_flow", &volume_flow, py::arg("target"), py::arg("t"));
  m.def("recenter_rescale", &recenter_rescale);

  // --- fem ---
  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("cg_tol", &SolverOptions::cg_tol)
      .def_readwrite("cg_max_iterations", &SolverOptions::cg_max_iterations)
      .def_readwrite("eig_tol", &SolverOptions::eig_tol)
      .def_readwrite("eig_max_iterations", &SolverOptions::eig_max_iterations)
      .def_readwrite("descent_tol", &SolverOptions::descent_tol)
      .def_readwrite("descent_max_iterations", &SolverOptions::descent_max_iterations)
      .def_readwrite("q_max", &SolverOptions::q_max);
  m.def("deficit_solver_options", &deficit_solver_options);

  m.def(
      "torsion_energy",
      [](const StarDomain& d, int rings, std::optional<SolverOptions> s) {
        py::gil_scoped_release nogil;
        return energy_of(solve_torsion(polar_mesh(d, rings), solver_or_default(s)).first);
      },
      py::arg("domain"), py::arg("rings") = 64, py::arg("options") = py::none(),
      "FEM energy E = -(1/2) int u of the torsion function.");
  m.def(
      "principal_eigenvalue",
      [](const StarDomain& d, int rings, std::optional<SolverOptions> s) {
        py::gil_scoped_release nogil;
        return principal_eigenvalue(polar_mesh(d, rings), solver_or_default(s)).value;
      },
      py::arg("domain"), py::arg("rings") = 64, py::arg("options") = py::none());
  m.def(
      "poincare_sobolev",
      [](const StarDomain& d, double q, int rings, std::optional<SolverOptions> s) {
        py::gil_scoped_release nogil;
        return poincare_sobolev(polar_mesh(d, rings), q, solver_or_default(s));
      },
      py::arg("domain"), py::arg("q"), py::arg("rings") = 64, py::arg("options") = py::none());

  // --- asymmetry ---
  py::class_<AsymmetryReport>(m, "AsymmetryReport")
      .def_readonly("fraenkel", &AsymmetryReport::fraenkel)
      .def_readonly("fraenkel_center", &AsymmetryReport::fraenkel_center)
      .def_readonly("alpha", &AsymmetryReport::alpha)
      .def_readonly("barycenter", &AsymmetryReport::barycenter)
      .def_readonly("evaluations", &AsymmetryReport::evaluations);
  m.def("asymmetry_report", [](const StarDomain& d) { return asymmetry_report(d); });
  m.def("fraenkel", [](const StarDomain& d) { return fraenkel(d).value; });
  m.def("alpha", &alpha);
  m.def("beta_const", &beta_const, py::arg("dim") = 2);
  m.def("annular_lower_bound", py::overload_cast<const StarDomain&>(&annular_lower_bound));
  m.def("f_eta", &f_eta, py::arg("s"), py::arg("eta"), py::arg("dim") = 2);
  m.def("eta_threshold", &eta_threshold, py::arg("R"), py::arg("dim") = 2);

  // --- stability ---
  py::class_<MeshPlan>(m, "MeshPlan")
      .def(py::init<>())
      .def(py::init([](int rings) {
             MeshPlan p;
             p.rings = rings;
             p.rings_fine = 2 * rings;
             p.validate();
             return p;
           }),
           py::arg("rings"))
      .def_readwrite("rings", &MeshPlan::rings)
      .def_readwrite("rings_fine", &MeshPlan::rings_fine)
      .def_readwrite("solver", &MeshPlan::solver)
      .def("validate", &MeshPlan::validate);

  py::class_<Extrapolated>(m, "Extrapolated")
      .def_readonly("value", &Extrapolated::value)
      .def_readonly("half", &Extrapolated::half)
      .def_readonly("coarse", &Extrapolated::coarse)
      .def_readonly("fine", &Extrapolated::fine)
      .def_readonly("order", &Extrapolated::order)
      .def_readonly("flagged", &Extrapolated::flagged);

  py::class_<CappioCheck>(m, "CappioCheck")
      .def_readonly("q", &CappioCheck::q)
      .def_readonly("lhs", &CappioCheck::lhs)
      .def_readonly("rhs", &CappioCheck::rhs)
      .def_readonly("holds", &CappioCheck::holds);

  py::class_<DeficitReport>(m, "DeficitReport")
      .def_readonly("family", &DeficitReport::family)
      .def_readonly("param", &DeficitReport::param)
      .def_readonly("volume", &DeficitReport::volume)
      .def_readonly("energy", &DeficitReport::energy)
      .def_readonly("lambda_", &DeficitReport::lambda)
      .def_readonly("q", &DeficitReport::q)
      .def_readonly("lambda_q", &DeficitReport::lambda_q)
      .def_readonly("fraenkel", &DeficitReport::fraenkel)
      .def_readonly("alpha", &DeficitReport::alpha)
      .def_readonly("annular_bound", &DeficitReport::annular_bound)
      .def_readonly("deficit_E", &DeficitReport::deficit_E)
      .def_readonly("deficit_lambda", &DeficitReport::deficit_lambda)
      .def_readonly("deficit_FK", &DeficitReport::deficit_FK)
      .def_readonly("ratio_E_A2", &DeficitReport::ratio_E_A2)
      .def_readonly("ratio_FK_A2", &DeficitReport::ratio_FK_A2)
      .def_readonly("kj_slack", &DeficitReport::kj_slack)
      .def_readonly("cappio", &DeficitReport::cappio)
      .def_readonly("ball_energy", &DeficitReport::ball_energy)
      .def_readonly("ball_lambda", &DeficitReport::ball_lambda)
      .def_readonly("ball_lambda_q", &DeficitReport::ball_lambda_q)
      .def_readonly("mesh_rings", &DeficitReport::mesh_rings)
      .def_readonly("mesh_rings_fine", &DeficitReport::mesh_rings_fine)
      .def_readonly("extrap_order", &DeficitReport::extrap_order)
      .def_readonly("order_flagged", &DeficitReport::order_flagged)
      .def("id", &DeficitReport::id)
      .def("sign_violations", [](const DeficitReport& r) { return sign_violations(r); })
      .def("csv_row", [](const DeficitReport& r) { return csv_row(r); });

  py::class_<StabilityEvaluator>(m, "StabilityEvaluator")
      .def(py::init<MeshPlan>(), py::arg("plan") = MeshPlan{})
      .def("evaluate", &StabilityEvaluator::evaluate, py::arg("domain"), py::arg("qs") = std::vector<double>{1.5, 2.0, 3.0},
           py::arg("family") = "domain", py::arg("param") = 0.0, py::call_guard<py::gil_scoped_release>())
      .def("energy_deficit", &StabilityEvaluator::energy_deficit, py::call_guard<py::gil_scoped_release>())
      .def("fk_deficit", &StabilityEvaluator::fk_deficit, py::call_guard<py::gil_scoped_release>())
      .def("energy_difference", &StabilityEvaluator::energy_difference, py::call_guard<py::gil_scoped_release>());

  m.def("kj_exponent", &kj_exponent, py::arg("q"), py::arg("dim") = 2);
  m.def("energy_deficit", py::overload_cast<const StarDomain&, const MeshPlan&>(&energy_deficit), py::arg("domain"),
        py::arg("plan") = MeshPlan{}, py::call_guard<py::gil_scoped_release>());
  m.def("fk_deficit", py::overload_cast<const StarDomain&, double, const MeshPlan&>(&fk_deficit), py::arg("domain"),
        py::arg("q"), py::arg("plan") = MeshPlan{}, py::call_guard<py::gil_scoped_release>());
  m.def("kj_slack", &kj_slack, py::arg("domain"), py::arg("q"), py::arg("plan") = MeshPlan{},
        py::call_guard<py::gil_scoped_release>());
  m.def("cappio_check", &cappio_check, py::arg("domain"), py::arg("q"), py::arg("plan") = MeshPlan{},
        py::call_guard<py::gil_scoped_release>());

  py::class_<TaylorFit>(m, "TaylorFit")
      .def_readonly("k", &TaylorFit::k)
      .def_readonly("s", &TaylorFit::s)
      .def_readonly("ratio", &TaylorFit::ratio)
      .def_readonly("limit", &TaylorFit::limit)
      .def_readonly("target", &TaylorFit::target)
      .def_readonly("residual", &TaylorFit::residual);
  m.def("taylor_validation",
        py::overload_cast<int, const std::vector<double>&, const MeshPlan&, double>(&taylor_validation), py::arg("k"),
        py::arg("s_values"), py::arg("plan") = MeshPlan{}, py::arg("max_rel_residual") = 1e-3,
        py::call_guard<py::gil_scoped_release>());
  m.def("fuglede_margin", py::overload_cast<const BoundaryProfile&, const MeshPlan&>(&fuglede_margin), py::arg("profile"),
        py::arg("plan") = MeshPlan{}, py::call_guard<py::gil_scoped_release>());
  m.def("fuglede_bound", &fuglede_bound, py::arg("dim") = 2);

  py::class_<SharpnessResult>(m, "SharpnessResult")
      .def_readonly("eps", &SharpnessResult::eps)
      .def_readonly("deficit", &SharpnessResult::deficit)
      .def_readonly("fraenkel", &SharpnessResult::fraenkel)
      .def_readonly("slope", &SharpnessResult::slope)
      .def_readonly("intercept", &SharpnessResult::intercept)
      .def_readonly("residual", &SharpnessResult::residual)
      .def_readonly("asym_ratio_spread", &SharpnessResult::asym_ratio_spread)
      .def_readonly("ratios_positive", &SharpnessResult::ratios_positive);
  m.def("sharpness_fit", py::overload_cast<const std::vector<double>&, const MeshPlan&>(&sharpness_fit),
        py::arg("eps_values"), py::arg("plan") = MeshPlan{}, py::call_guard<py::gil_scoped_release>());

  py::class_<FamilyMember>(m, "FamilyMember")
      .def(py::init([](std::string family, double param, StarDomain d) { return FamilyMember{std::move(family), param, std::move(d)}; }),
           py::arg("family"), py::arg("param"), py::arg("domain"))
      .def_readonly("family", &FamilyMember::family)
      .def_readonly("param", &FamilyMember::param)
      .def_readonly("domain", &FamilyMember::domain);
  m.def("ellipse_family", &ellipse_family, py::arg("eps_min"), py::arg("eps_max"), py::arg("count"));
  m.def("random_family", &random_family, py::arg("count"), py::arg("seed"), py::arg("sup_min") = 0.01,
        py::arg("sup_max") = 0.05);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("qs", &SweepResult::qs)
      .def_readonly("reports", &SweepResult::reports)
      .def_readonly("exponent", &SweepResult::exponent)
      .def_readonly("min_ratio_E", &SweepResult::min_ratio_E)
      .def_readonly("min_ratio_FK", &SweepResult::min_ratio_FK)
      .def_readonly("min_ratio_E_A4", &SweepResult::min_ratio_E_A4)
      .def_readonly("kj_slack", &SweepResult::kj_slack)
      .def_readonly("flagged", &SweepResult::flagged);
  m.def(
      "sigma_scan",
      [](const std::vector<FamilyMember>& members, const MeshPlan& plan, const std::vector<double>& qs, int threads) {
        SweepOptions so;
        so.qs = qs;
        so.threads = threads;
        return sigma_scan(members, plan, so);
      },
      py::arg("members"), py::arg("plan") = MeshPlan{}, py::arg("qs") = std::vector<double>{1.5, 2.0, 3.0},
      py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());

  // --- command-line cores ---
  m.def("parse_domain_spec", &parse_domain_spec);
  m.def("csv_header", &csv_header, py::arg("qs"));
  m.def("write_csv", [](const std::vector<double>& qs, const std::vector<DeficitReport>& reports) {
    std::ostringstream out;
    write_csv(out, qs, reports);
    return out.str();
  });
  m.attr("CSV_SCHEMA") = kCsvSchema;
  m.def("suite_names", &suite_names);
  m.def("run_suite", [](const std::string& name) {
    SuiteResult r;
    {
      py::gil_scoped_release nogil;
      r = run_suite(name, RunConfig{});
    }
    return check_dict(r);
  });
  m.def("ball_reference", [] {
    SuiteResult r;
    {
      py::gil_scoped_release nogil;
      r = ball_reference(RunConfig{});
    }
    return check_dict(r);
  });
}
