#include "fklab/cli.hpp"

#include <algorithm>
#include <cfloat>
#include <charconv>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fklab/errors.hpp"

namespace fklab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kJ01 = 2.404825557695772768622;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(x)) {
    throw InvalidInput("bad number for " + key + ": '" + v + "'");
  }
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size()) throw InvalidInput("bad integer for " + key + ": '" + v + "'");
  return x;
}

std::string q_label(double q) { return fmt("%g", q); }

std::string num(double x) { return std::isfinite(x) ? fmt("%.16e", x) : (std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf")); }

// Zero-mean (min_mode >= 1) or general random profile with uniform coefficients in [-amp, amp].
BoundaryProfile random_profile(std::mt19937_64& rng, int K, double amp, int min_mode) {
  BoundaryProfile p;
  p.resize(K);
  auto u = [&] { return amp * (2.0 * uniform01(rng) - 1.0); };
  if (min_mode == 0) p.a0 = u();
  for (int k = std::max(1, min_mode); k <= K; ++k) {
    p.cos_coeffs[k - 1] = u();
    p.sin_coeffs[k - 1] = u();
  }
  return p;
}

class Suite {
 public:
  explicit Suite(std::string name) { r_.name = std::move(name); }
  void check(const std::string& name, bool pass, const std::string& detail) {
    r_.checks.push_back({name, pass, detail});
  }
  SuiteResult take() { return std::move(r_); }

 private:
  SuiteResult r_;
};

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo * std::pow(hi / lo, double(i) / (n - 1)));
  return v;
}

}  // namespace

// --- configuration --------------------------------------------------------------

void RunConfig::validate() const {
  if (rings < 8 || rings % 2 != 0) throw InvalidInput("mesh.rings must be even and at least 8");
  if (rings_fine != 2 * rings) throw InvalidInput("mesh.rings_fine must equal 2 * mesh.rings");
  for (double t : {tol_cg, tol_eig, tol_descent}) {
    if (!(t > 0.0 && t <= 1e-2)) throw InvalidInput("tolerances must lie in (0, 1e-2]");
  }
  if (!(eps_min > 0.0 && eps_min <= eps_max && eps_max < 0.5)) {
    throw InvalidInput("sweep eps range must satisfy 0 < eps_min <= eps_max < 0.5");
  }
  if (eps_count < 1) throw InvalidInput("sweep.eps_count must be positive");
  if (count < 0) throw InvalidInput("sweep.count must be nonnegative");
  if (!(sup_min > 0.0 && sup_min <= sup_max && sup_max <= 0.05)) {
    throw InvalidInput("sweep sup range must satisfy 0 < sup_min <= sup_max <= 0.05");
  }
  if (threads < 0) throw InvalidInput("sweep.threads must be nonnegative");
  if (q_list.empty()) throw InvalidInput("q.list is empty");
  for (double q : q_list) {
    if (!(q >= 1.0 && q <= 4.0)) throw InvalidInput("q values must lie in [1, 4]");
  }
  if (!(r_max > 1.0)) throw InvalidInput("r_max must exceed 1");
}

MeshPlan RunConfig::plan() const {
  validate();
  MeshPlan p;
  p.rings = rings;
  p.rings_fine = rings_fine;
  p.solver.cg_tol = tol_cg;
  p.solver.eig_tol = tol_eig;
  p.solver.descent_tol = tol_descent;
  return p;
}

std::vector<double> parse_q_list(const std::string& text) {
  std::vector<double> qs;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (trim(item).empty()) continue;
    qs.push_back(to_double("q.list", item));
  }
  if (qs.empty()) throw InvalidInput("empty q list");
  return qs;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "mesh.rings") {
    c.rings = static_cast<int>(to_int(key, value));
  } else if (key == "mesh.rings_fine") {
    c.rings_fine = static_cast<int>(to_int(key, value));
  } else if (key == "tol.cg") {
    c.tol_cg = to_double(key, value);
  } else if (key == "tol.eig") {
    c.tol_eig = to_double(key, value);
  } else if (key == "tol.descent") {
    c.tol_descent = to_double(key, value);
  } else if (key == "sweep.eps_min") {
    c.eps_min = to_double(key, value);
  } else if (key == "sweep.eps_max") {
    c.eps_max = to_double(key, value);
  } else if (key == "sweep.eps_count") {
    c.eps_count = static_cast<int>(to_int(key, value));
  } else if (key == "sweep.seed") {
    const long long s = to_int(key, value);
    if (s < 0) throw InvalidInput("sweep.seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "sweep.count") {
    c.count = static_cast<int>(to_int(key, value));
  } else if (key == "sweep.sup_min") {
    c.sup_min = to_double(key, value);
  } else if (key == "sweep.sup_max") {
    c.sup_max = to_double(key, value);
  } else if (key == "sweep.threads") {
    c.threads = static_cast<int>(to_int(key, value));
  } else if (key == "q.list") {
    c.q_list = parse_q_list(value);
  } else if (key == "r_max") {
    c.r_max = to_double(key, value);
  } else {
    throw InvalidInput("unknown config key '" + key + "'");
  }
}

void read_config(std::istream& in, RunConfig& cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  auto load = [&](const std::string& p) {
    std::ifstream in(p);
    if (!in) throw InvalidInput("cannot open config file '" + p + "'");
    read_config(in, cfg);
  };
  if (const char* env = std::getenv("FKLAB_CONFIG"); env && *env) load(env);
  if (!path.empty()) load(path);
  return cfg;
}

EpsRange parse_eps_range(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (a == std::string::npos || b == std::string::npos) throw InvalidInput("eps range must be min:max:count");
  EpsRange r;
  r.min = to_double("eps", text.substr(0, a));
  r.max = to_double("eps", text.substr(a + 1, b - a - 1));
  r.count = static_cast<int>(to_int("eps", text.substr(b + 1)));
  if (!(r.min > 0.0 && r.min <= r.max && r.max < 0.5) || r.count < 1) {
    throw InvalidInput("eps range must satisfy 0 < min <= max < 0.5 and count >= 1");
  }
  return r;
}

FamilyMember parse_domain_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidInput("domain spec must be ellipse:eps, profile:record or file:path");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "ellipse") {
    const double e = to_double("ellipse", rest);
    return {"ellipse", e, ellipse(e)};
  }
  if (kind == "profile" || kind == "file") {
    std::string record = rest;
    if (kind == "file") {
      std::ifstream in(rest);
      if (!in) throw InvalidInput("cannot open profile file '" + rest + "'");
      record.assign(std::istreambuf_iterator<char>(in), {});
      std::replace(record.begin(), record.end(), '\n', ' ');
    }
    StarDomain d(volume_correct(parse_profile(record)));
    d.validate();
    return {kind, 0.0, d};
  }
  throw InvalidInput("unknown domain kind '" + kind + "'");
}

// --- output ---------------------------------------------------------------------

std::string csv_header(const std::vector<double>& qs) {
  std::string h = "family,param,volume,energy,lambda";
  for (double q : qs) h += ",lambda_q_" + q_label(q);
  h += ",fraenkel,alpha,deficit_E";
  for (double q : qs) h += ",deficit_FK_" + q_label(q);
  h += ",ratio_E_A2";
  for (double q : qs) h += ",kj_slack_" + q_label(q);
  h += ",mesh_rings,extrap_order";
  return h;
}

std::string csv_row(const DeficitReport& r) {
  std::string s = r.family + "," + num(r.param) + "," + num(r.volume) + "," + num(r.energy) + "," + num(r.lambda);
  for (double v : r.lambda_q) s += "," + num(v);
  s += "," + num(r.fraenkel) + "," + num(r.alpha) + "," + num(r.deficit_E);
  for (double v : r.deficit_FK) s += "," + num(v);
  s += "," + num(r.ratio_E_A2);
  for (double v : r.kj_slack) s += "," + num(v);
  s += "," + std::to_string(r.mesh_rings_fine) + "," + num(r.extrap_order);
  return s;
}

void write_csv(std::ostream& out, const std::vector<double>& qs, const std::vector<DeficitReport>& reports) {
  out << "# schema " << kCsvSchema << '\n' << csv_header(qs) << '\n';
  for (const auto& r : reports) out << csv_row(r) << '\n';
}

void write_summary(std::ostream& out, const SweepResult& s) {
  out << "members = " << s.reports.size() << '\n';
  out << "exponent = " << num(s.exponent) << '\n';
  out << "exponent_intercept = " << num(s.exponent_intercept) << '\n';
  out << "exponent_residual = " << num(s.exponent_residual) << '\n';
  out << "min_ratio_E_A2 = " << num(s.min_ratio_E) << '\n';
  for (std::size_t j = 0; j < s.qs.size(); ++j) {
    out << "min_ratio_FK_A2_" << q_label(s.qs[j]) << " = " << num(s.min_ratio_FK[j]) << '\n';
  }
  out << "min_ratio_E_A4 = " << num(s.min_ratio_E_A4) << '\n';
  for (std::size_t j = 0; j < s.qs.size(); ++j) {
    const auto& k = s.kj_slack[j];
    const double lo = k.empty() ? kNaN : *std::min_element(k.begin(), k.end());
    out << "min_kj_slack_" << q_label(s.qs[j]) << " = " << num(lo) << '\n';
  }
  out << "order_flagged = " << s.flagged << '\n';
}

void write_svg(std::ostream& out, const SweepResult& s, const std::string& title) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : s.reports) {
    if (r.fraenkel >= kRatioAsymmetryFloor && r.deficit_E > 0.0) {
      pts.emplace_back(std::log10(r.fraenkel), std::log10(r.deficit_E));
    }
  }
  const double W = 640, H = 480, L = 70, R = 20, T = 40, B = 50;
  double x0 = -3, x1 = 0, y0 = -8, y1 = -2;
  if (!pts.empty()) {
    x0 = x1 = pts[0].first;
    y0 = y1 = pts[0].second;
    for (auto [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    x0 = std::floor(x0 - 0.05);
    x1 = std::ceil(x1 + 0.05);
    y0 = std::floor(y0 - 0.05);
    y1 = std::ceil(y1 + 0.05);
  }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  out << fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" font-family=\"sans-serif\" font-size=\"12\">\n", W, H);
  out << fmt("<rect x=\"0\" y=\"0\" width=\"%g\" height=\"%g\" fill=\"white\"/>\n", W, H);
  out << fmt("<text x=\"%g\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">%s</text>\n", W / 2, title.c_str());
  out << fmt("<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L, T, W - L - R, H - T - B);
  for (double x = x0; x <= x1 + 1e-9; x += 1) {
    out << fmt("<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"#ddd\"/>\n", px(x), T, px(x), H - B);
    out << fmt("<text x=\"%.2f\" y=\"%g\" text-anchor=\"middle\">1e%d</text>\n", px(x), H - B + 16, int(x));
  }
  for (double y = y0; y <= y1 + 1e-9; y += 1) {
    out << fmt("<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"#ddd\"/>\n", L, py(y), W - R, py(y));
    out << fmt("<text x=\"%g\" y=\"%.2f\" text-anchor=\"end\">1e%d</text>\n", L - 6, py(y) + 4, int(y));
  }
  out << fmt("<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">Fraenkel asymmetry A</text>\n", L + (W - L - R) / 2, H - 12);
  out << fmt("<text x=\"16\" y=\"%g\" text-anchor=\"middle\" transform=\"rotate(-90 16 %g)\">deficit D</text>\n",
             T + (H - T - B) / 2, T + (H - T - B) / 2);
  if (std::isfinite(s.min_ratio_E) && s.min_ratio_E > 0.0) {
    // D = sigma A^2 through the extreme point
    const double c = std::log10(s.min_ratio_E);
    out << fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#c33\" stroke-dasharray=\"6 4\"/>\n",
               px(x0), py(c + 2 * x0), px(x1), py(c + 2 * x1));
  }
  for (auto [x, y] : pts) {
    out << fmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"#1f77b4\"><title>A=%.6e D=%.6e</title></circle>\n",
               px(x), py(y), std::pow(10.0, x), std::pow(10.0, y));
  }
  out << "</svg>\n";
}

// --- checks ---------------------------------------------------------------------

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

void print_checks(std::ostream& out, const SuiteResult& r) {
  for (const auto& c : r.checks) out << (c.pass ? "PASS " : "FAIL ") << r.name << ": " << c.name << "  " << c.detail << '\n';
  out << (r.passed() ? "suite " + r.name + " passed" : "suite " + r.name + " FAILED") << '\n';
}

SuiteResult ball_reference(const RunConfig& cfg) {
  cfg.validate();
  Suite s("ball-reference");
  SolverOptions opt = cfg.plan().solver;
  FemProblem prob(polar_mesh(StarDomain{}, cfg.rings), opt);
  auto row = [&](const std::string& name, double closed, double fem, double tol) {
    const double rel = std::abs(fem / closed - 1.0);
    s.check(name, rel <= tol, fmt("reference %.10g fem %.10g rel_err %.3e tol %.1e", closed, fem, rel, tol));
  };
  row("energy E(B1)", -kPi / 16, energy_of(prob.torsion().first), 5e-3);
  row("eigenvalue lambda(B1)", kJ01 * kJ01, prob.principal_eigenvalue().value, 1e-2);
  row("lambda_{2,1}(B1) = -1/(2E)", 8 / kPi, prob.poincare_sobolev(1.0).value, 1e-2);
  // other q: FEM at rings against its Richardson limit from rings/2 and rings
  FemProblem half(polar_mesh(StarDomain{}, cfg.rings / 2), opt);
  for (double q : cfg.q_list) {
    const double f = prob.poincare_sobolev(q).value;
    const double lim = f + (f - half.poincare_sobolev(q).value) / 3.0;
    if (q == 2.0) row("lambda_{2,2}(B1) = lambda(B1)", kJ01 * kJ01, f, 1e-2);
    row("lambda_{2," + q_label(q) + "}(B1) vs extrapolated", lim, f, 1e-2);
  }
  const double beta = beta_quadrature(2);
  s.check("beta_2 = pi/3", std::abs(beta - kPi / 3) <= 1e-10,
          fmt("closed %.16g quadrature %.16g abs_err %.3e tol 1e-10", kPi / 3, beta, std::abs(beta - kPi / 3)));
  s.check("E(B1) closed form", std::abs(ball_energy(2) + kPi / 16) <= 1e-15,
          fmt("-omega/(2N(N+2)) %.16g", ball_energy(2)));
  return s.take();
}

std::vector<FamilyMember> sweep_members(const std::string& family, const RunConfig& cfg) {
  cfg.validate();
  std::vector<FamilyMember> m;
  if (family == "ellipse" || family == "combined") m = ellipse_family(cfg.eps_min, cfg.eps_max, cfg.eps_count);
  if (family == "random" || family == "combined") {
    for (auto& r : random_family(cfg.count, cfg.seed, cfg.sup_min, cfg.sup_max)) m.push_back(std::move(r));
  }
  if (family != "ellipse" && family != "random" && family != "combined") {
    throw InvalidInput("unknown family '" + family + "' (ellipse, random, combined)");
  }
  return m;
}

SuiteResult flow_check(const BoundaryProfile& target, const std::vector<double>& ts) {
  Suite s("flow-check");
  const double vt = volume(StarDomain(target));
  for (double t : ts) {
    const double v = volume(volume_flow(target, t));
    const double want = kPi + t * (vt - kPi);
    s.check(fmt("t = %g", t), std::abs(v - want) <= 1e-10,
            fmt("|Phi_t(B1)| %.16g expected %.16g err %.3e", v, want, std::abs(v - want)));
  }
  return s.take();
}

namespace {

SuiteResult suite_steklov() {
  Suite s("steklov");
  for (int m : {2, 8, 32, 64}) {
    const double v = steklov_min_rayleigh(m);
    s.check(fmt("min Rayleigh quotient on M0, max_mode %d", m), std::abs(v - 2.0) <= 4 * DBL_EPSILON,
            fmt("value %.17g", v));
  }
  std::mt19937_64 rng(101);
  double worst_eq = 0.0, worst_pyth = 0.0, worst_triv = 0.0, min_coerc = 1e300, worst_scale = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int K = 1 + static_cast<int>(uniform01(rng) * 16);
    const auto p = random_profile(rng, K, 1.0, 1);
    const double ext = extension_energy(p), full = h_half_norm_sq(p);
    worst_eq = std::max({worst_eq, ext / full - 1.0, full / (2 * ext) - 1.0});
    const auto g = random_profile(rng, 12, 1.0, 0);
    const auto sp = low_mode_projection(g);
    worst_pyth = std::max(worst_pyth, std::abs(h_half_norm_sq(g) - h_half_norm_sq(sp.low) - h_half_norm_sq(sp.high)) /
                                          h_half_norm_sq(g));
    const auto q = random_profile(rng, 12, 1.0, 0);
    worst_triv = std::max(worst_triv, std::abs(hessian_bilinear(g, q, 2)) /
                                          std::sqrt(h_half_norm_sq(g) * h_half_norm_sq(q)));
    min_coerc = std::min(min_coerc, coercivity_margin(random_profile(rng, 16, 1.0, 2), 2));
    const double d0 = m_delta_defect(g);
    worst_scale = std::max(worst_scale, std::abs(m_delta_defect(-3.7 * g) - d0) / d0);
  }
  s.check("norm equivalence ext <= ||.||^2 <= 2 ext", worst_eq <= 1e-12, fmt("worst excess %.3e", worst_eq));
  s.check("projection Pythagoras", worst_pyth <= 1e-12, fmt("worst relative defect %.3e", worst_pyth));
  s.check("trivial estimate |d2E[p,q]| <= ||p|| ||q||", worst_triv <= 1.0, fmt("worst ratio %.6f", worst_triv));
  s.check("coercivity on M0 >= 1/16", min_coerc >= 1.0 / 16, fmt("min ratio %.6f", min_coerc));
  const double c2 = coercivity_margin(BoundaryProfile::cosine(2), 2);
  s.check("mode 2 attains 1/12", std::abs(c2 - 1.0 / 12) <= 1e-15 && min_coerc >= 1.0 / 12 - 1e-14,
          fmt("mode 2 ratio %.17g", c2));
  s.check("M_delta defect scale invariant", worst_scale <= 1e-12, fmt("worst relative change %.3e", worst_scale));
  return s.take();
}

SuiteResult suite_flow() {
  Suite s("flow");
  std::mt19937_64 rng(102);
  double worst_id = 0.0, worst_corr = 0.0;
  for (int i = 0; i < 30; ++i) {
    auto p = random_profile(rng, 6, 1.0, 0);
    p = (0.3 * uniform01(rng) / p.sup_bound()) * p;
    const double vp = volume(StarDomain(p));
    const auto c = volume_correct(random_profile(rng, 8, 0.03, 1));
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      worst_id = std::max(worst_id, std::abs(volume(volume_flow(p, t)) - (kPi + t * (vp - kPi))));
      worst_corr = std::max(worst_corr, std::abs(volume(volume_flow(c, t)) - kPi));
    }
  }
  s.check("interpolation identity |Phi_t| = pi + t(|Omega| - pi)", worst_id <= 1e-12, fmt("worst error %.3e", worst_id));
  s.check("volume-corrected flow keeps |Phi_t| = pi", worst_corr <= 1e-10, fmt("worst error %.3e", worst_corr));

  double worst_idem = 0.0;
  for (int i = 0; i < 5; ++i) {
    const StarDomain d(random_profile(rng, 5, 0.04, 1), {0.3 * uniform01(rng), -0.2 * uniform01(rng)});
    const auto r = recenter_rescale(d);
    const auto again = recenter_rescale(r);
    double diff = std::abs(again.profile.a0 - r.profile.a0);
    for (int k = 1; k <= std::max(r.profile.max_mode(), again.profile.max_mode()); ++k) {
      diff = std::max({diff, std::abs(again.profile.a(k) - r.profile.a(k)), std::abs(again.profile.b(k) - r.profile.b(k))});
    }
    worst_idem = std::max(worst_idem, diff);
  }
  s.check("recenter_rescale idempotent", worst_idem <= 1e-8, fmt("worst coefficient change %.3e", worst_idem));

  double worst_bary = 0.0;
  for (double e : {0.05, 0.3, 0.9}) worst_bary = std::max(worst_bary, norm(barycenter(ellipse(e))));
  s.check("ellipse barycenter at the origin", worst_bary <= 1e-12, fmt("worst |x| %.3e", worst_bary));

  double worst_vol = 0.0, min_rate = 1e300, worst_xb = 0.0;
  for (int i = 0; i < 3; ++i) {
    const StarDomain d(random_profile(rng, 5, 0.05, 0), {0.1, -0.2});
    const double v = volume(d);
    const auto m32 = polar_mesh(d, 32), m64 = polar_mesh(d, 64);
    const double e32 = std::abs(m32.area() - v), e64 = std::abs(m64.area() - v);
    worst_vol = std::max(worst_vol, e64 / v);
    min_rate = std::min(min_rate, std::log2(e32 / e64));
    const Point c = barycenter(d);
    const double xs = integrate(m64, [](Point p) { return p.x; }) / m64.area();
    const double ys = integrate(m64, [](Point p) { return p.y; }) / m64.area();
    worst_xb = std::max(worst_xb, norm(Point{xs, ys} - c));
  }
  s.check("volume against mesh area, O(h^2)", worst_vol <= 1e-3 && min_rate >= 1.8,
          fmt("rel err at 64 rings %.3e, min observed order %.3f", worst_vol, min_rate));
  s.check("barycenter against mesh quadrature", worst_xb <= 1e-3, fmt("worst distance %.3e", worst_xb));
  return s.take();
}

SuiteResult suite_saint_venant(const RunConfig& cfg) {
  Suite s("saint-venant-signs");
  const SolverOptions opt = cfg.plan().solver;
  {
    FemProblem p(polar_mesh(ellipse(0.2), cfg.rings), opt);
    const double sym = p.stiffness_symmetry_residual();
    s.check("stiffness symmetry", sym <= 1e-12, fmt("residual %.3e", sym));
    const auto [u, st] = p.torsion();
    s.check("CG convergence", st.residual <= opt.cg_tol, fmt("%d iterations, residual %.3e", st.iterations, st.residual));
    const double E = energy_of(u);
    const double lhs = 0.5 * p.dirichlet_energy(u) - integral_of(u);
    s.check("energy identity", std::abs(lhs - E) <= 1e-8 * std::abs(E), fmt("(1/2)|grad u|^2 - int u = %.12g, E = %.12g", lhs, E));
  }
  {
    MeshPlan plan = cfg.plan();
    plan.rings = 128;
    plan.rings_fine = 256;
    StabilityEvaluator ev(plan);
    for (double e : {0.1, 0.2}) {
      const auto D = ev.energy_deficit(ellipse(e));
      s.check(fmt("matched deficit order, ellipse %.2f", e), D.order >= 1.8, fmt("observed order %.3f (64/128/256)", D.order));
    }
  }
  BallReference ball(opt);
  const double EB = ball.energy(cfg.rings), LB = ball.lambda(cfg.rings);
  double worst_E = 1e300, worst_L = 1e300;
  std::string arg_E, arg_L;
  for (const auto& m : sweep_members("combined", cfg)) {
    StarDomain d = m.domain;
    FemProblem p(polar_mesh(d, cfg.rings), opt);
    const double dE = (energy_of(p.torsion().first) - EB) / std::abs(EB);
    const double dL = (p.principal_eigenvalue().value - LB) / LB;
    DeficitReport tag;
    tag.family = m.family;
    tag.param = m.param;
    if (dE < worst_E) worst_E = dE, arg_E = tag.id();
    if (dL < worst_L) worst_L = dL, arg_L = tag.id();
  }
  s.check("Saint-Venant sign E_h(Omega) >= E_h(B1)", worst_E >= -kSignRelTolerance,
          fmt("min relative difference %.3e at %s", worst_E, arg_E.c_str()));
  s.check("Faber-Krahn sign lambda_h(Omega) >= lambda_h(B1)", worst_L >= -kSignRelTolerance,
          fmt("min relative difference %.3e at %s", worst_L, arg_L.c_str()));
  return s.take();
}

SuiteResult suite_tail(const RunConfig& cfg) {
  Suite s("tail-sup");
  const SolverOptions opt = cfg.plan().solver;
  const auto t0 = tail_sup(solve_torsion(polar_mesh(StarDomain{}, 32), opt).first, 1.0);
  s.check("disk, R = 1", t0.sup_outside == 0.0 && std::abs(t0.measure_outside) <= 1e-12,
          fmt("sup %.3e measure %.3e", t0.sup_outside, t0.measure_outside));

  const StarDomain d(volume_corrected_profile(2, 0.75));
  const auto c = tail_sup(solve_torsion(polar_mesh(d, cfg.rings / 2), opt).first, 1.2);
  const auto f = tail_sup(solve_torsion(polar_mesh(d, cfg.rings), opt).first, 1.2);
  const double rel = std::abs(f.measure_outside / c.measure_outside - 1);
  s.check("elongated domain reaching 1.6, R = 1.2", f.measure_outside > 0.0 && rel <= 0.02 && std::isfinite(f.sup_outside),
          fmt("sup %.3e measure %.6e refinement change %.3e", f.sup_outside, f.measure_outside, rel));

  double worst = 0.0, sup = 0.0;
  for (double amp : {0.35, 0.4, 0.45, 0.5}) {
    BoundaryProfile spike;
    spike.resize(8);
    for (int k = 1; k <= 8; ++k) spike.cos_coeffs[k - 1] = amp * (1.0 - k / 9.0);
    const auto u = solve_torsion(polar_mesh(StarDomain(volume_correct(spike)), cfg.rings), opt).first;
    const auto t = tail_sup(u, 1.0);
    sup = std::max(sup, t.sup_outside);
    worst = std::max(worst, t.sup_outside / std::sqrt(t.measure_outside));
  }
  s.check("spike family: sup outside B_2 below 1/4", sup <= 0.25, fmt("max sup %.4e", sup));
  s.check("spike family: sup / |Omega \\ B_1|^(1/2) bounded", std::isfinite(worst) && worst < 1.0, fmt("max ratio %.4e", worst));
  return s.take();
}

SuiteResult suite_alpha(const RunConfig& cfg) {
  Suite s("alpha-props");
  double worst_ball = 0.0;
  for (Point c : {Point{0, 0}, Point{0.3, -0.7}, Point{-2.0, 1.5}}) worst_ball = std::max(worst_ball, std::abs(alpha(StarDomain::disk(c))));
  s.check("alpha of unit balls", worst_ball <= 1e-9, fmt("max |alpha| %.3e", worst_ball));
  const double a11 = alpha(StarDomain::disk({}, 1.1));
  const double closed = 2 * kPi * (std::pow(1.1, 3) / 3 - 1.1 * 1.1 / 2 + 1.0 / 6);
  s.check("alpha(B_1.1) closed form", std::abs(a11 - closed) <= 1e-6, fmt("alpha %.10f closed %.10f", a11, closed));
  s.check("beta_2 = pi/3", std::abs(beta_quadrature(2) - kPi / 3) <= 1e-10, fmt("err %.3e", std::abs(beta_quadrature(2) - kPi / 3)));

  std::mt19937_64 rng(103);
  double worst_tr = 0.0;
  for (int i = 0; i < 3; ++i) {
    const StarDomain d(volume_correct(random_mode_mix(rng, 0.05)));
    const auto r1 = asymmetry_report(d), r2 = asymmetry_report(translate(d, {0.37, -0.58}));
    worst_tr = std::max({worst_tr, std::abs(r1.fraenkel - r2.fraenkel), std::abs(r1.alpha - r2.alpha)});
  }
  s.check("translation invariance of A and alpha", worst_tr <= 1e-9, fmt("worst change %.3e", worst_tr));

  double worst_ann = -1e300, lower = 1e300;
  for (const auto& m : sweep_members("combined", cfg)) {
    const double a = alpha(m.domain);
    worst_ann = std::max(worst_ann, annular_lower_bound(m.domain) - a);
    const double sd = symmetric_difference_with_ball(m.domain, barycenter(m.domain));
    lower = std::min(lower, a / (sd * sd));
  }
  s.check("annular lower bound <= alpha on the sweep", worst_ann <= 1e-12, fmt("max bound - alpha %.3e", worst_ann));
  s.check("alpha / |Omega Delta B|^2 bounded below", lower > 0.0, fmt("min ratio %.4e", lower));

  double upper = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto p = random_profile(rng, 8, 1.0, 2);
    const auto q = volume_correct((0.05 / p.sup_bound()) * p);
    upper = std::max(upper, alpha(StarDomain(q)) / boundary_l2_sq(q));
  }
  s.check("alpha / ||phi||^2_L2 bounded above", upper < 1.0, fmt("max ratio %.4e", upper));

  double cmax = 0.0;
  for (int i = 0; i < 40; ++i) {
    auto inner = random_profile(rng, 6, 0.05, 1);
    inner.a0 = -0.2 + 0.3 * uniform01(rng);
    BoundaryProfile bump = BoundaryProfile::constant(0.05 * uniform01(rng));
    const double phase = 2 * kPi * uniform01(rng), amp = 0.1 * uniform01(rng);
    for (int k = 1; k <= 4; ++k) {
      bump = bump + BoundaryProfile::cosine(k, amp * (1 - k / 5.0) * std::cos(k * phase)) +
             BoundaryProfile::sine(k, amp * (1 - k / 5.0) * std::sin(k * phase));
    }
    bump.a0 += amp * 0.5;
    const StarDomain d1(inner), d2(inner + bump);
    cmax = std::max(cmax, std::abs(alpha(d1) - alpha(d2)) / (volume(d2) - volume(d1)));
  }
  s.check("alpha Lipschitz in |Omega1 Delta Omega2| for nested sets in B_2", cmax < 4.0, fmt("fitted C %.4f", cmax));

  double worst_f = -1e300;
  for (int i = 0; i < 1000; ++i) {
    double s1 = 3 * kPi * uniform01(rng), s2 = 3 * kPi * uniform01(rng);
    if (s1 < s2) std::swap(s1, s2);
    const double eta = 1e-3 + (1 - 1e-3) * uniform01(rng);
    const double diff = f_eta(s1, eta) - f_eta(s2, eta);
    worst_f = std::max({worst_f, eta * (s1 - s2) - diff, diff - (s1 - s2) / eta});
  }
  s.check("f_eta sandwich on 1000 pairs", worst_f <= 1e-12, fmt("worst violation %.3e", worst_f));

  std::vector<double> grid;
  for (int i = 1; i <= 400; ++i) grid.push_back(cfg.r_max * i / 400);
  const double eta = 0.5 * eta_threshold(cfg.r_max);
  const auto rc = radial_coercivity(eta, grid);
  s.check("radial penalty minimum at r = 1 for eta at half the threshold",
          rc.minimum_at_one && rc.left_slope > 0.0 && rc.right_slope > 0.0 && std::isfinite(rc.c4),
          fmt("eta %.5f r_min %.4f slopes %.4e %.4e", eta, rc.r_at_min, rc.left_slope, rc.right_slope));
  return s.take();
}

SuiteResult suite_fuglede(const RunConfig& cfg) {
  Suite s("fuglede");
  StabilityEvaluator ev(cfg.plan());
  const double m2 = fuglede_margin(ev, volume_corrected_profile(2, 0.03));
  const double m5 = fuglede_margin(ev, volume_corrected_profile(5, 0.03));
  s.check("mode 2 margin near 1/24", std::abs(m2 * 24 - 1) <= 0.01, fmt("margin %.6f", m2));
  s.check("mode 5 margin near 1/12", std::abs(m5 * 12 - 1) <= 0.01, fmt("margin %.6f", m5));
  double worst = 1e300;
  int violations = 0;
  for (const auto& m : random_family(cfg.count, cfg.seed, cfg.sup_min, cfg.sup_max)) {
    const double v = fuglede_margin(ev, m.domain.profile);
    worst = std::min(worst, v);
    violations += v < fuglede_bound(2);
  }
  s.check(fmt("%d random near-spheres >= 1/128", cfg.count), violations == 0,
          fmt("min margin %.6f, violations %d", worst, violations));
  return s.take();
}

SuiteResult suite_taylor(const RunConfig& cfg) {
  Suite s("taylor");
  StabilityEvaluator ev(cfg.plan());
  const std::vector<double> sv{0.02, 0.035, 0.05, 0.065, 0.08, 0.1};
  for (int k = 1; k <= 4; ++k) {
    const auto f = taylor_validation(ev, k, sv);
    const bool ok = k == 1 ? std::abs(f.limit) <= 0.02 * kPi / 8 : std::abs(f.limit / f.target - 1) <= 0.05;
    s.check(fmt("mode %d", k), ok, fmt("limit %.6f target %.6f residual %.2e", f.limit, f.target, f.residual));
  }
  return s.take();
}

SuiteResult suite_kj(const RunConfig& cfg) {
  Suite s("kohler-jobin");
  SweepOptions so;
  so.qs = cfg.q_list;
  so.threads = cfg.threads;
  const auto res = sigma_scan(sweep_members("combined", cfg), cfg.plan(), so);
  std::vector<std::string> bad;
  int cappio_fail = 0;
  for (const auto& r : res.reports) {
    for (auto& v : sign_violations(r)) bad.push_back(v);
    for (const auto& c : r.cappio) cappio_fail += !c.holds;
  }
  for (std::size_t j = 0; j < res.qs.size(); ++j) {
    // slack relative to the ball value of lambda_q (-E)^theta
    double worst = 1e300;
    for (const auto& r : res.reports) {
      const double ref = r.ball_lambda_q[j] * std::pow(-r.ball_energy, kj_exponent(r.q[j]));
      worst = std::min(worst, r.kj_slack[j] / ref);
    }
    s.check("Kohler-Jobin slack q = " + q_label(res.qs[j]), worst >= -kSignRelTolerance,
            fmt("min relative slack %.4e", worst));
  }
  s.check("concavity inequality", cappio_fail == 0, fmt("%d failures", cappio_fail));
  s.check(fmt("signs and chain on %zu domains", res.reports.size()), bad.empty(),
          bad.empty() ? "no violations" : bad.front() + fmt(" (+%zu more)", bad.size() - 1));
  return s.take();
}

SuiteResult suite_sharpness(const RunConfig& cfg) {
  Suite s("sharpness");
  const auto eps = geometric(std::max(cfg.eps_min, 0.02), std::min(cfg.eps_max, 0.2), std::max(cfg.eps_count, 5));
  const auto r = sharpness_fit(eps, cfg.plan());
  s.check("log-log slope in [1.85, 2.15]", r.slope >= 1.85 && r.slope <= 2.15, fmt("slope %.5f residual %.3e", r.slope, r.residual));
  s.check("A / eps spread <= 15%", r.asym_ratio_spread <= 0.15, fmt("spread %.4f", r.asym_ratio_spread));
  s.check("D / A^2 positive", r.ratios_positive, "");
  return s.take();
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"fuglede", "taylor", "kohler-jobin", "steklov", "alpha-props", "flow", "sharpness", "saint-venant-signs", "tail-sup"};
}

SuiteResult run_suite(const std::string& name, const RunConfig& cfg) {
  cfg.validate();
  if (name == "steklov") return suite_steklov();
  if (name == "flow") return suite_flow();
  if (name == "saint-venant-signs") return suite_saint_venant(cfg);
  if (name == "tail-sup") return suite_tail(cfg);
  if (name == "alpha-props") return suite_alpha(cfg);
  if (name == "fuglede") return suite_fuglede(cfg);
  if (name == "taylor") return suite_taylor(cfg);
  if (name == "kohler-jobin") return suite_kj(cfg);
  if (name == "sharpness") return suite_sharpness(cfg);
  throw InvalidInput("unknown verify suite '" + name + "'");
}

}  // namespace fklab
