#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "fklab/cli.hpp"
#include "fklab/errors.hpp"

using namespace fklab;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kVerification = 3 };

struct Overrides {
  std::string config;
  std::optional<int> rings;
  std::optional<int> threads;
  std::optional<std::string> q;
  std::optional<std::uint64_t> seed;
  std::optional<int> count;
  std::optional<std::string> eps;
};

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = load_run_config(o.config);
  if (o.rings) {
    cfg.rings = *o.rings;
    cfg.rings_fine = 2 * *o.rings;
  }
  if (o.threads) cfg.threads = *o.threads;
  if (o.q) cfg.q_list = parse_q_list(*o.q);
  if (o.seed) cfg.seed = *o.seed;
  if (o.count) cfg.count = *o.count;
  if (o.eps) {
    const auto r = parse_eps_range(*o.eps);
    cfg.eps_min = r.min;
    cfg.eps_max = r.max;
    cfg.eps_count = r.count;
  }
  cfg.validate();
  return cfg;
}

// Opens `path` for writing, or returns std::cout for "-" / empty.
std::ostream& sink(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw InvalidInput("cannot write '" + path + "'");
  return file;
}

int report(const SuiteResult& r) {
  print_checks(std::cout, r);
  return r.passed() ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of quantitative Saint-Venant and Faber-Krahn stability in the plane"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "key = value file applied after FKLAB_CONFIG");
  app.add_option("--rings", o.rings, "coarse Richardson level (fine level is twice this)");
  app.add_option("--threads", o.threads, "sweep workers (0: available parallelism)");

  auto* ball = app.add_subcommand("ball-reference", "closed-form ball values against FEM");

  auto* deficit = app.add_subcommand("deficit", "CSV rows for individual domains");
  std::vector<std::string> specs;
  std::string deficit_out = "-";
  deficit->add_option("domains", specs, "ellipse:EPS | profile:RECORD | file:PATH")->required();
  deficit->add_option("--q", o.q, "comma separated q values");
  deficit->add_option("--out", deficit_out, "CSV path, '-' for stdout");

  auto* sweep = app.add_subcommand("sweep", "family sweep with fitted constants");
  std::string family = "ellipse", sweep_out = "-", plot_path;
  sweep->add_option("family", family, "ellipse | random | combined");
  sweep->add_option("--eps", o.eps, "min:max:count for the ellipse family");
  sweep->add_option("--count", o.count, "random family size");
  sweep->add_option("--seed", o.seed, "random family seed");
  sweep->add_option("--q", o.q, "comma separated q values");
  sweep->add_option("--out", sweep_out, "CSV path, '-' for stdout");
  auto* plot = sweep->add_option("--plot", plot_path, "write an SVG log-log plot (default <out>.svg or sweep.svg)")
                   ->expected(0, 1);

  auto* verify = app.add_subcommand("verify", "run a property suite");
  std::string suite;
  verify->add_option("suite", suite, "suite name or 'all'")->required();

  auto* flow = app.add_subcommand("flow-check", "volumes along the radial flow from the unit disk");
  std::string flow_profile = "0 2:0.1:0 3:0:0.05";
  std::vector<double> flow_t{0.0, 0.25, 0.5, 0.75, 1.0};
  bool raw = false;
  flow->add_option("--profile", flow_profile, "target profile record");
  flow->add_option("--t", flow_t, "flow times")->delimiter(',');
  flow->add_flag("--raw", raw, "skip the volume correction of the target");

  auto* dump = app.add_subcommand("mesh-dump", "write the polar mesh and optionally the torsion field");
  std::string dump_domain = "ellipse:0", dump_out = "-", dump_field;
  std::optional<int> dump_rings;
  dump->add_option("--domain", dump_domain, "domain spec");
  dump->add_option("--mesh-rings", dump_rings, "ring count (default: config mesh.rings)");
  dump->add_option("--out", dump_out, "mesh path, '-' for stdout");
  dump->add_option("--field", dump_field, "torsion field path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    const RunConfig cfg = resolve(o);

    if (*ball) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto r = ball_reference(cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << "rings " << cfg.rings << ", " << secs << " s\n";
      return report(r);
    }

    if (*deficit) {
      std::vector<FamilyMember> members;
      for (const auto& s : specs) members.push_back(parse_domain_spec(s));
      StabilityEvaluator ev(cfg.plan());
      std::vector<DeficitReport> rows;
      for (const auto& m : members) {
        rows.push_back(ev.evaluate(m.domain, cfg.q_list, m.family, m.param));
        for (const auto& v : sign_violations(rows.back())) std::cerr << "warning: " << v << '\n';
      }
      std::ofstream file;
      write_csv(sink(deficit_out, file), cfg.q_list, rows);
      return kOk;
    }

    if (*sweep) {
      const auto members = sweep_members(family, cfg);
      SweepOptions so;
      so.qs = cfg.q_list;
      so.threads = cfg.threads;
      so.progress = [&](std::size_t i, const DeficitReport& r) {
        std::cerr << "  [" << i + 1 << "/" << members.size() << "] " << r.id() << '\n';
      };
      const auto res = sigma_scan(members, cfg.plan(), so);
      std::ofstream file;
      write_csv(sink(sweep_out, file), cfg.q_list, res.reports);
      std::ostream& info = (sweep_out.empty() || sweep_out == "-") ? std::cerr : std::cout;
      write_summary(info, res);
      if (plot->count() > 0) {
        std::string path = plot_path;
        if (path.empty()) {
          path = (sweep_out.empty() || sweep_out == "-") ? "sweep.svg" : sweep_out + ".svg";
          if (const auto dot = sweep_out.rfind(".csv"); dot != std::string::npos && dot + 4 == sweep_out.size()) {
            path = sweep_out.substr(0, dot) + ".svg";
          }
        }
        std::ofstream svg(path);
        if (!svg) throw InvalidInput("cannot write '" + path + "'");
        write_svg(svg, res, family + " sweep: deficit against asymmetry");
        info << "plot = " << path << '\n';
      }
      int bad = 0;
      for (const auto& r : res.reports) {
        for (const auto& v : sign_violations(r)) {
          std::cerr << "violation: " << v << '\n';
          ++bad;
        }
      }
      const bool ratio_bad = std::isfinite(res.min_ratio_E) && res.min_ratio_E <= 0.0;
      return bad == 0 && !ratio_bad ? kOk : kVerification;
    }

    if (*verify) {
      std::vector<std::string> names = suite == "all" ? suite_names() : std::vector<std::string>{suite};
      int code = kOk;
      for (const auto& n : names) {
        if (report(run_suite(n, cfg)) != kOk) code = kVerification;
      }
      return code;
    }

    if (*flow) {
      BoundaryProfile p = parse_profile(flow_profile);
      if (!raw) p = volume_correct(p);
      return report(flow_check(p, flow_t));
    }

    if (*dump) {
      const auto m = parse_domain_spec(dump_domain);
      const auto mesh = polar_mesh(m.domain, dump_rings.value_or(cfg.rings));
      std::ofstream file;
      write_mesh(sink(dump_out, file), mesh);
      if (!dump_field.empty()) {
        std::ofstream f(dump_field);
        if (!f) throw InvalidInput("cannot write '" + dump_field + "'");
        write_field(f, solve_torsion(mesh, cfg.plan().solver).first);
      }
      return kOk;
    }
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
