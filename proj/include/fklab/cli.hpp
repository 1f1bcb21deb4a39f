#pragma once

// Run configuration, domain specs, CSV/SVG output and the verify suites behind
// the fklab command-line tool.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fklab/stability.hpp"

namespace fklab {

struct RunConfig {
  int rings = 64;
  int rings_fine = 128;
  double tol_cg = 1e-12;
  double tol_eig = 1e-11;
  double tol_descent = 1e-11;
  double eps_min = 0.02;
  double eps_max = 0.2;
  int eps_count = 8;
  std::uint64_t seed = 7;
  int count = 50;          // random family size
  double sup_min = 0.01;   // random family sup-norm range
  double sup_max = 0.045;
  int threads = 0;
  std::vector<double> q_list{1.5, 2.0, 3.0};
  double r_max = 2.0;

  /// Throws InvalidInput on out-of-range values.
  void validate() const;
  MeshPlan plan() const;
};

/// Sets one `key = value` entry. Keys: mesh.rings, mesh.rings_fine, tol.cg,
/// tol.eig, tol.descent, sweep.eps_min, sweep.eps_max, sweep.eps_count,
/// sweep.seed, sweep.count, sweep.sup_min, sweep.sup_max, sweep.threads,
/// q.list, r_max. Throws InvalidInput on unknown keys or bad values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
/// Reads `key = value` lines; `#` starts a comment.
void read_config(std::istream& in, RunConfig& cfg);
/// Defaults, then the file named by FKLAB_CONFIG, then `path` if non-empty.
RunConfig load_run_config(const std::string& path = "");

std::vector<double> parse_q_list(const std::string& text);

struct EpsRange {
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};
/// "min:max:count"
EpsRange parse_eps_range(const std::string& text);

/// ellipse:<eps> | profile:<record> | file:<path>. Profiles are volume corrected.
FamilyMember parse_domain_spec(const std::string& spec);

// --- output ---------------------------------------------------------------------

inline constexpr const char* kCsvSchema = "fklab-deficit-v1";

std::string csv_header(const std::vector<double>& qs);
std::string csv_row(const DeficitReport& r);
/// Schema comment line, header, one row per report.
void write_csv(std::ostream& out, const std::vector<double>& qs, const std::vector<DeficitReport>& reports);
/// `key = value` block with the fitted constants of a sweep.
void write_summary(std::ostream& out, const SweepResult& s);
/// Log-log plot of deficit_E against the Fraenkel asymmetry, with the A^2 guide.
void write_svg(std::ostream& out, const SweepResult& s, const std::string& title);

// --- subcommand cores -----------------------------------------------------------

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteResult {
  std::string name;
  std::vector<CheckLine> checks;
  bool passed() const;
};

void print_checks(std::ostream& out, const SuiteResult& r);

/// Closed forms against FEM on the unit disk.
SuiteResult ball_reference(const RunConfig& cfg);

std::vector<std::string> suite_names();
/// Throws InvalidInput for unknown suites.
SuiteResult run_suite(const std::string& name, const RunConfig& cfg);

/// Ellipse family, random family, or both ("combined").
std::vector<FamilyMember> sweep_members(const std::string& family, const RunConfig& cfg);

/// |Phi_t(B1)| against pi + t (|Omega_phi| - pi) for each t.
SuiteResult flow_check(const BoundaryProfile& target, const std::vector<double>& ts);

}  // namespace fklab
