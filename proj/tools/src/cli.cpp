#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include "hjk/constraints.hpp"
#include "hjk/error.hpp"
#include "hjk/hj.hpp"
#include "hjk/kappa.hpp"
#include "hjk/systems.hpp"
#include "system_file.hpp"

namespace hjk::cli {

namespace {

// Fixed tolerances of the identity suites that do not follow --tol.
constexpr double kCurveTolerance = 1e-5;
constexpr double kCurveStep = 1e-3;
constexpr int kCurveSteps = 1000;
constexpr int kCurveStarts = 5;
constexpr double kFormAgreementTolerance = 1e-9;
constexpr int kFormAgreementSamples = 200;

struct Loaded {
  std::string label;
  LagrangianSystem sys;
  std::optional<BuiltinSystem> builtin;
  std::optional<SystemFile> file;
};

Loaded load(const std::string& target) {
  if (target.empty()) throw InputError("--system is required");
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), target) != names.end()) {
    BuiltinSystem b = builtin(target);
    LagrangianSystem sys = b.system;
    return {target, std::move(sys), std::move(b), std::nullopt};
  }
  std::ifstream probe(target);
  if (!probe) throw InputError("'" + target + "' is neither a builtin system nor a readable file");
  SystemFile f = load_system_file(target);
  LagrangianSystem sys = *f.system;
  return {target, std::move(sys), std::nullopt, std::move(f)};
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Components given as repeated flags, each optionally ';'-separated.
std::vector<std::string> components(const std::vector<std::string>& flags) {
  std::vector<std::string> out;
  for (const auto& f : flags) {
    for (auto& part : split(f, ';')) out.push_back(std::move(part));
  }
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  double x = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  const auto [end, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || end != last || first == last) throw InputError(what + ": '" + text + "' is not a number");
  return x;
}

Vector parse_point(const std::string& text, int dof, const std::string& what) {
  const auto parts = split(text, ',');
  if (static_cast<int>(parts.size()) != dof) {
    throw InputError(what + " needs " + std::to_string(dof) + " comma-separated values");
  }
  Vector out(dof);
  for (int i = 0; i < dof; ++i) out[i] = parse_double(parts[static_cast<std::size_t>(i)], what);
  return out;
}

/// "a:b" with the point count from `points`, or "a:b:m".
Interval parse_interval(const std::string& text, int points) {
  const auto parts = split(text, ':');
  if (parts.size() == 3) return SampleGrid::parse_axis(text);
  if (parts.size() != 2) throw InputError("interval must be 'a:b' or 'a:b:m': '" + text + "'");
  return SampleGrid::parse_axis(text + ":" + std::to_string(points));
}

template <class T>
std::vector<T> replicate(std::vector<T> values, int n, const std::string& what) {
  if (values.size() == 1) values.assign(static_cast<std::size_t>(n), values.front());
  if (static_cast<int>(values.size()) != n) {
    throw InputError(what + ": expected 1 or " + std::to_string(n) + " values, got " + std::to_string(values.size()));
  }
  return values;
}

SampleGrid grid_from_flags(const std::vector<std::string>& flags, int dim) {
  std::vector<Interval> axes;
  for (const auto& f : flags) axes.push_back(SampleGrid::parse_axis(f));
  return SampleGrid(replicate(std::move(axes), dim, "--grid"));
}

SampleGrid resolve_q_grid(const std::vector<std::string>& flags, const Loaded& l) {
  if (!flags.empty()) return grid_from_flags(flags, l.sys.dof());
  if (l.file && l.file->grid) return *l.file->grid;
  if (l.builtin) return l.builtin->q_grid;
  throw InputError("no sample grid: pass --grid or add grid.<i> entries to the system file");
}

SampleGrid resolve_tq_grid(const std::vector<std::string>& flags, const Loaded& l) {
  if (!flags.empty()) return grid_from_flags(flags, 2 * l.sys.dof());
  if (l.builtin) return l.builtin->tq_grid;
  return SampleGrid::uniform(2 * l.sys.dof(), {-1.0, 1.0, 5});
}

std::vector<std::string> resolve_components(const std::vector<std::string>& flags,
                                            const std::optional<std::vector<std::string>>& from_file,
                                            const std::string& what, int dof) {
  std::vector<std::string> comps = components(flags);
  if (comps.empty() && from_file) comps = *from_file;
  if (comps.empty()) throw InputError("no " + what + " given: pass --" + what + " or declare it in the system file");
  if (static_cast<int>(comps.size()) != dof) {
    throw InputError("--" + what + " needs " + std::to_string(dof) + " components, got " + std::to_string(comps.size()));
  }
  return comps;
}

void require_positive(double x, const std::string& what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw InputError(what + " must be positive");
}

std::string fmt(double x) { return format_number(x); }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("failed writing '" + path + "'");
}

std::string join_row(const std::vector<double>& values) {
  std::string row;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) row += ',';
    row += fmt(values[i]);
  }
  row += '\n';
  return row;
}

std::string numbered(const char* prefix, int n, bool leading_comma = true) {
  std::string s;
  for (int i = 1; i <= n; ++i) {
    if (leading_comma || i > 1) s += ',';
    s += prefix + std::to_string(i);
  }
  return s;
}

std::string residual_csv(const HJReport& r, int dof) {
  std::string csv = numbered("q", dof, false) + ",cond3,cond4,cond5,closedness,energy\n";
  for (const auto& row : r.rows) {
    std::vector<double> v(row.q.data(), row.q.data() + row.q.size());
    v.insert(v.end(), {row.cond3, row.cond4, row.cond5, row.closedness, row.energy});
    csv += join_row(v);
  }
  return csv;
}

void line(std::ostream& out, const std::string& key, const std::string& value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%-20s", key.c_str());
  out << buf << value << '\n';
}

void print_report(std::ostream& out, const HJReport& r) {
  line(out, "domain", r.domain);
  line(out, "samples", std::to_string(r.samples));
  line(out, "tol", fmt(r.tol));
  for (const auto& e : r.entries()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-24.17g", e.residual);
    line(out, e.name, std::string(buf) + (e.pass ? "pass" : "FAIL"));
  }
  line(out, "verdict", r.all_pass() ? "pass" : "FAIL");
}

// ---------------------------------------------------------------------------

struct CheckHJOptions {
  std::string system;
  std::vector<std::string> x;
  std::vector<std::string> grid;
  double tol = 1e-8;
  std::string out;
  bool generalized = false;
  double lift = 0.0;
  double lift_step = 1e-3;
};

int cmd_check_hj(const CheckHJOptions& o, std::ostream& out) {
  require_positive(o.tol, "--tol");
  const Loaded l = load(o.system);
  const int n = l.sys.dof();
  const ExprSection x = ExprSection::parse(
      resolve_components(o.x, l.file ? l.file->x : std::nullopt, "X", n), n);
  const SampleGrid grid = resolve_q_grid(o.grid, l);
  if (o.lift < 0.0) throw InputError("--lift must be non-negative");
  if (o.lift > 0.0) require_positive(o.lift_step, "--lift-step");

  HJReport r = check_standard_hj(l.sys, x, grid, o.tol, o.generalized);
  if (o.lift > 0.0) {
    Vector centre(n);
    for (int i = 0; i < n; ++i) {
      const auto& a = grid.axes()[static_cast<std::size_t>(i)];
      centre[i] = 0.5 * (a.lo + a.hi);
    }
    r.cond1_lift = lift_and_compare(l.sys, x, centre, o.lift, o.lift_step);
  }

  const std::string path = o.out.empty() ? "check-hj_residuals.csv" : o.out;
  write_file(path, residual_csv(r, n));
  line(out, "system", l.label);
  line(out, "problem", o.generalized ? "generalized" : "standard");
  print_report(out, r);
  line(out, "csv", path);
  return r.all_pass() ? kExitOk : kExitVerificationFailed;
}

// ---------------------------------------------------------------------------

struct CheckHamOptions {
  std::string system;
  std::vector<std::string> alpha;
  std::vector<std::string> grid;
  double tol = 1e-8;
  std::string out;
  bool generalized = false;
};

int cmd_check_hj_hamiltonian(const CheckHamOptions& o, std::ostream& out) {
  require_positive(o.tol, "--tol");
  const Loaded l = load(o.system);
  const int n = l.sys.dof();
  l.sys.require_hamiltonian();
  const OneFormAlpha alpha =
      OneFormAlpha::parse(resolve_components(o.alpha, l.file ? l.file->alpha : std::nullopt, "alpha", n), n);
  const SampleGrid grid = resolve_q_grid(o.grid, l);

  HJReport r = check_hamiltonian_generalized(l.sys, alpha, grid, o.tol);
  std::string note;
  if (!o.generalized) {
    double closed = 0.0;
    for (const auto& row : r.rows) closed = std::max(closed, row.closedness);
    if (closed <= o.tol) {
      const HJReport standard = check_hamiltonian_hj(l.sys, alpha, grid, o.tol);
      r.closedness = standard.closedness;
      r.energy_variation = standard.energy_variation;
    } else {
      r.closedness = closed;
      note = "alpha is not closed; the standard problem does not apply";
    }
  }

  const std::string path = o.out.empty() ? "check-hj-hamiltonian_residuals.csv" : o.out;
  write_file(path, residual_csv(r, n));
  line(out, "system", l.label);
  line(out, "problem", o.generalized ? "generalized" : "standard");
  print_report(out, r);
  if (!note.empty()) line(out, "note", note);
  line(out, "csv", path);
  return r.all_pass() ? kExitOk : kExitVerificationFailed;
}

// ---------------------------------------------------------------------------

struct IntegrateOptions {
  std::string system;
  std::string q0;
  std::string v0;
  std::string p0;
  double h = 1e-3;
  int steps = 1000;
  std::string method = "rk4";
  bool hamiltonian = false;
  std::string out;
};

int cmd_integrate(const IntegrateOptions& o, std::ostream& out) {
  const Loaded l = load(o.system);
  const int n = l.sys.dof();
  const Method method = parse_method(o.method);
  require_positive(o.h, "--h");
  if (o.steps < 1) throw InputError("--steps must be at least 1");
  if (o.q0.empty()) throw InputError("--q0 is required");
  const Vector q0 = parse_point(o.q0, n, "--q0");

  std::string csv = "t" + numbered("q", n);
  double drift = 0.0;
  double final_t = 0.0;
  if (o.hamiltonian) {
    l.sys.require_hamiltonian();
    CotangentPoint start;
    if (!o.p0.empty()) {
      start = CotangentPoint(q0, parse_point(o.p0, n, "--p0"));
    } else if (!o.v0.empty()) {
      start = legendre_map(l.sys, TangentPoint(q0, parse_point(o.v0, n, "--v0")));
    } else {
      throw InputError("--p0 (or --v0) is required");
    }
    const HamiltonianTrajectory t = integrate_hamiltonian(l.sys, start, o.h, o.steps, method);
    csv += numbered("p", n) + "\n";
    const double e0 = hamiltonian_value(l.sys, t.states.front());
    for (std::size_t k = 0; k < t.states.size(); ++k) {
      const auto& s = t.states[k];
      std::vector<double> row{t.times[k]};
      row.insert(row.end(), s.q.data(), s.q.data() + n);
      row.insert(row.end(), s.p.data(), s.p.data() + n);
      csv += join_row(row);
      drift = std::max(drift, std::abs(hamiltonian_value(l.sys, s) - e0));
    }
    final_t = t.times.back();
  } else {
    if (o.v0.empty()) throw InputError("--v0 is required");
    const TangentPoint start(q0, parse_point(o.v0, n, "--v0"));
    const LagrangianTrajectory t = integrate_regular(l.sys, start, o.h, o.steps, method);
    csv += numbered("v", n) + "\n";
    const double e0 = lagrangian_energy(l.sys, t.states.front());
    for (std::size_t k = 0; k < t.states.size(); ++k) {
      const auto& s = t.states[k];
      std::vector<double> row{t.times[k]};
      row.insert(row.end(), s.q.data(), s.q.data() + n);
      row.insert(row.end(), s.v.data(), s.v.data() + n);
      csv += join_row(row);
      drift = std::max(drift, std::abs(lagrangian_energy(l.sys, s) - e0));
    }
    final_t = t.times.back();
  }

  const std::string path = o.out.empty() ? "integrate_trajectory.csv" : o.out;
  write_file(path, csv);
  line(out, "system", l.label);
  line(out, "dynamics", o.hamiltonian ? "hamiltonian" : "lagrangian");
  line(out, "method", std::string(method_name(method)));
  line(out, "steps", std::to_string(o.steps));
  line(out, "h", fmt(o.h));
  line(out, "final t", fmt(final_t));
  line(out, "energy drift", fmt(drift));
  line(out, "csv", path);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SolveOptions {
  std::string system;
  std::vector<double> energy;
  std::vector<std::string> interval;
  int points = 101;
  std::vector<int> branch;
  double tol = 1e-8;
  std::string out;
};

int cmd_solve_hj(const SolveOptions& o, std::ostream& out) {
  require_positive(o.tol, "--tol");
  const Loaded l = load(o.system);
  const int n = l.sys.dof();
  if (o.energy.empty()) throw InputError("--energy is required");
  if (o.interval.empty()) throw InputError("--interval is required");
  if (o.points < 2) throw InputError("--points must be at least 2");

  std::vector<Interval> intervals;
  for (const auto& s : o.interval) intervals.push_back(parse_interval(s, o.points));
  intervals = replicate(std::move(intervals), n, "--interval");
  const std::vector<double> energies = replicate(o.energy, n, "--energy");
  const std::vector<int> branches = replicate(o.branch.empty() ? std::vector<int>{1} : o.branch, n, "--branch");

  std::vector<HJSolution1D> factors;
  std::shared_ptr<const SectionX> section;
  if (n == 1) {
    HJSolution1D s = solve_hj_1dof(l.sys, energies[0], intervals[0], branches[0]);
    section = s.section;
    factors.push_back(std::move(s));
  } else {
    SeparableSolution s = solve_hj_separable(l.sys, energies, intervals, branches);
    section = s.section;
    factors = std::move(s.factors);
  }

  std::string csv;
  if (n == 1) {
    csv = "q,p,X,W\n";
  } else {
    for (int i = 1; i <= n; ++i) {
      const std::string k = std::to_string(i);
      csv += (i > 1 ? "," : "") + ("q" + k) + ",p" + k + ",X" + k + ",W" + k;
    }
    csv += '\n';
  }
  const std::size_t rows = factors.front().q.size();
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> row;
    for (const auto& f : factors) row.insert(row.end(), {f.q[r], f.p[r], f.x[r], f.w[r]});
    csv += join_row(row);
  }

  const HJReport report = check_standard_hj(l.sys, *section, SampleGrid(intervals), o.tol);

  const std::string path = o.out.empty() ? "solve-hj_table.csv" : o.out;
  write_file(path, csv);
  line(out, "system", l.label);
  for (int i = 0; i < n; ++i) {
    const auto& f = factors[static_cast<std::size_t>(i)];
    const std::string k = n == 1 ? "" : " " + std::to_string(i + 1);
    line(out, "energy" + k, fmt(energies[static_cast<std::size_t>(i)]));
    line(out, "branch" + k, branches[static_cast<std::size_t>(i)] > 0 ? "+1" : "-1");
    line(out, "W range" + k, "[" + fmt(f.w.front()) + ", " + fmt(f.w.back()) + "]");
  }
  line(out, "csv", path);
  out << "self-check\n";
  print_report(out, report);
  return report.all_pass() ? kExitOk : kExitVerificationFailed;
}

// ---------------------------------------------------------------------------

struct ConstraintOptions {
  std::string system;
  std::vector<std::string> grid;
  double tol = 1e-8;
  int max_iter = 10;
  std::vector<std::string> admissible;
  std::vector<std::string> admissible_grid;
};

std::string format_vector(const Vector& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + ")";
}

int cmd_constraints(const ConstraintOptions& o, std::ostream& out) {
  require_positive(o.tol, "--tol");
  if (o.max_iter < 0) throw InputError("--max-iter must be non-negative");
  const Loaded l = load(o.system);
  const int n = l.sys.dof();
  const SampleGrid tq = resolve_tq_grid(o.grid, l);

  std::optional<ExprSection> x;
  std::optional<SampleGrid> q_grid;
  if (!o.admissible.empty()) {
    x = ExprSection::parse(resolve_components(o.admissible, std::nullopt, "admissible", n), n);
    q_grid = resolve_q_grid(o.admissible_grid, l);
  }

  std::vector<ConstraintFunction> primaries;
  for (const auto& c : l.sys.constraints()) primaries.push_back(ConstraintFunction::hamiltonian(c));

  const Degeneracy d = detect_degeneracy(l.sys, tq);
  std::vector<double> residuals;
  for (const auto& c : primaries) residuals.push_back(primary_constraint_residual(l.sys, c, tq));
  const ConstraintSet set = stabilize(l.sys, primaries, tq, o.tol, o.max_iter);

  line(out, "system", l.label);
  line(out, "dof", std::to_string(n));
  line(out, "grid", describe(tq));
  line(out, "rank W", std::to_string(d.min_rank) + (d.min_rank == n ? " (regular)" : " (singular)"));
  for (Eigen::Index c = 0; c < d.null_basis.cols(); ++c) line(out, "null vector", format_vector(d.null_basis.col(c)));
  for (std::size_t i = 0; i < primaries.size(); ++i) {
    line(out, "primary", primaries[i].description() + "  residual " + fmt(residuals[i]));
  }
  out << "chain\n";
  for (const auto& c : set.constraints) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  gen %-3d %-18s %-12s ", c.generation(),
                  std::string(provenance_name(c.provenance())).c_str(), std::string(side_name(c.side())).c_str());
    out << buf << c.description() << '\n';
  }
  const auto feasible = static_cast<std::size_t>(std::count(set.feasible.begin(), set.feasible.end(), true));
  line(out, "status", std::string(status_name(set.status)));
  line(out, "iterations", std::to_string(set.iterations));
  line(out, "feasible", std::to_string(feasible) + " of " + std::to_string(tq.size()));

  bool ok = set.status == StabilizationStatus::converged;
  if (x && ok) {
    const AdmissibilityReport a = check_X_admissible(l.sys, *x, set, *q_grid, o.tol);
    for (const auto& e : a.entries) {
      line(out, "admissible", e.description + "  residual " + fmt(e.residual) + (e.pass ? "  pass" : "  FAIL"));
    }
    line(out, "X admissible", a.admissible ? "yes" : "no");
    ok = a.admissible;
  }
  line(out, "verdict", ok ? "pass" : "FAIL");
  return ok ? kExitOk : kExitVerificationFailed;
}

// ---------------------------------------------------------------------------

struct IdentityOptions {
  std::string system;
  int samples = 1000;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  double box = 2.0;
};

struct SuiteLine {
  std::string name;
  std::optional<double> residual;
  double tol = 0.0;
  std::string skip_reason;
  bool pass() const { return !residual || *residual <= tol; }
};

std::shared_ptr<ExprSection> random_affine_section(int n, std::mt19937_64& rng, double box) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Expr> comps;
  for (int i = 0; i < n; ++i) {
    Expr e = Expr::constant(box * u(rng), n);
    for (int j = 0; j < n; ++j) e = e + Expr::constant(u(rng), n) * Expr::variable(Family::q, j, n);
    comps.push_back(e);
  }
  return std::make_shared<ExprSection>(std::move(comps));
}

int cmd_verify_identities(const IdentityOptions& o, std::ostream& out) {
  require_positive(o.tol, "--tol");
  require_positive(o.box, "--box");
  if (o.samples < 1) throw InputError("--samples must be at least 1");
  const Loaded l = load(o.system);
  const int n = l.sys.dof();

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u(-o.box, o.box);
  std::vector<TangentPoint> pts;
  for (int k = 0; k < o.samples; ++k) {
    Vector q(n), v(n);
    for (int i = 0; i < n; ++i) q[i] = u(rng);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    pts.emplace_back(q, v);
  }

  bool regular = true;
  for (const auto& p : pts) regular = regular && velocity_hessian(l.sys, p).regular;

  std::vector<SuiteLine> suites;
  {
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, dynamical_identity_residual(l.sys, p));
    suites.push_back({"dynamical_identity", worst, o.tol, {}});
  }
  {
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, (evaluate_K(l.sys, p).dq_comp - p.v).cwiseAbs().maxCoeff());
    suites.push_back({"second_order", worst, 0.0, {}});
  }
  if (regular) {
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, pushforward_relation_residual(l.sys, p));
    suites.push_back({"pushforward", worst, o.tol, {}});
  } else {
    suites.push_back({"pushforward", std::nullopt, o.tol, "singular velocity Hessian"});
  }
  if (!regular) {
    suites.push_back({"curve_relation", std::nullopt, kCurveTolerance, "singular velocity Hessian"});
  } else if (!l.sys.hamiltonian()) {
    suites.push_back({"curve_relation", std::nullopt, kCurveTolerance, "no Hamiltonian declared"});
  } else {
    double worst = 0.0;
    const std::size_t starts = std::min<std::size_t>(kCurveStarts, pts.size());
    for (std::size_t k = 0; k < starts; ++k) {
      const HamiltonianTrajectory t =
          integrate_hamiltonian(l.sys, legendre_map(l.sys, pts[k]), kCurveStep, kCurveSteps);
      worst = std::max(worst, hamiltonian_curve_residual(l.sys, t));
    }
    suites.push_back({"curve_relation", worst, kCurveTolerance, {}});
  }
  {
    double worst = 0.0;
    const int count = std::min(o.samples, kFormAgreementSamples);
    for (int k = 0; k < count; ++k) {
      const auto x = random_affine_section(n, rng, o.box);
      const Vector& q = pts[static_cast<std::size_t>(k)].q;
      worst = std::max(worst, std::abs(condition4_residual(l.sys, *x, q) - condition5_residual(l.sys, *x, q)));
    }
    suites.push_back({"cond4_cond5", worst, kFormAgreementTolerance, {}});
  }

  line(out, "system", l.label);
  line(out, "samples", std::to_string(o.samples));
  line(out, "seed", std::to_string(o.seed));
  bool ok = true;
  for (const auto& s : suites) {
    if (!s.residual) {
      line(out, s.name, "skipped (" + s.skip_reason + ")");
      continue;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-24.17g tol %-8.3g ", *s.residual, s.tol);
    line(out, s.name, std::string(buf) + (s.pass() ? "pass" : "FAIL"));
    ok = ok && s.pass();
  }
  line(out, "verdict", ok ? "pass" : "FAIL");
  return ok ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evolution-operator toolkit for the Hamilton-Jacobi problem", "hjk"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hjk 0.1.0");

  auto add_system = [](CLI::App* sub, std::string& target) {
    sub->add_option("--system", target, "builtin system name or path to a system file")->required();
  };
  auto add_repeat = [](CLI::App* sub, const std::string& name, std::vector<std::string>& target,
                       const std::string& help) {
    sub->add_option(name, target, help)->expected(1)->allow_extra_args(false)->multi_option_policy(
        CLI::MultiOptionPolicy::TakeAll);
  };

  CheckHJOptions chk;
  auto* check_hj = app.add_subcommand("check-hj", "verify a section X against the Lagrangian HJ conditions");
  add_system(check_hj, chk.system);
  add_repeat(check_hj, "--X", chk.x, "component expression(s) of X; repeat or separate with ';'");
  add_repeat(check_hj, "--grid", chk.grid, "sample axis a:b:m; once for all coordinates or once per coordinate");
  check_hj->add_option("--tol", chk.tol, "residual tolerance");
  check_hj->add_option("--out", chk.out, "residual CSV path");
  check_hj->add_flag("--generalized", chk.generalized, "check conditions 3/4/5 only");
  check_hj->add_option("--lift", chk.lift, "also lift the flow of X from the grid centre over this horizon");
  check_hj->add_option("--lift-step", chk.lift_step, "step of the lifting integration");

  CheckHamOptions ham;
  auto* check_ham = app.add_subcommand("check-hj-hamiltonian", "verify a 1-form alpha against the Hamiltonian HJ");
  add_system(check_ham, ham.system);
  add_repeat(check_ham, "--alpha", ham.alpha, "component expression(s) of alpha");
  add_repeat(check_ham, "--grid", ham.grid, "sample axis a:b:m");
  check_ham->add_option("--tol", ham.tol, "residual tolerance");
  check_ham->add_option("--out", ham.out, "residual CSV path");
  check_ham->add_flag("--generalized", ham.generalized, "skip the closed-form (standard) check");

  IntegrateOptions integ;
  auto* integrate = app.add_subcommand("integrate", "integrate the Lagrangian or Hamiltonian dynamics");
  integrate->set_help_flag("--help", "print this help message and exit");
  add_system(integrate, integ.system);
  integrate->add_option("--q0", integ.q0, "initial q, comma separated");
  integrate->add_option("--v0", integ.v0, "initial v, comma separated");
  integrate->add_option("--p0", integ.p0, "initial p, comma separated (with --hamiltonian)");
  integrate->add_option("--h", integ.h, "step size");
  integrate->add_option("--steps", integ.steps, "number of steps");
  integrate->add_option("--method", integ.method, "rk4 or euler");
  integrate->add_flag("--hamiltonian", integ.hamiltonian, "integrate Hamilton's equations");
  integrate->add_option("--out", integ.out, "trajectory CSV path");

  SolveOptions solve;
  auto* solve_hj = app.add_subcommand("solve-hj", "solve the HJ equation on a level set (1-dof or separable)");
  add_system(solve_hj, solve.system);
  solve_hj->add_option("--energy", solve.energy, "energy level; once or once per coordinate")
      ->expected(1)
      ->allow_extra_args(false)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  add_repeat(solve_hj, "--interval", solve.interval, "interval a:b (or a:b:m)");
  solve_hj->add_option("--points", solve.points, "samples per interval");
  solve_hj->add_option("--branch", solve.branch, "+1 or -1; once or once per coordinate")
      ->expected(1)
      ->allow_extra_args(false)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  solve_hj->add_option("--tol", solve.tol, "tolerance of the self-check");
  solve_hj->add_option("--out", solve.out, "table CSV path");

  ConstraintOptions cons;
  auto* constraints = app.add_subcommand("constraints", "run the constraint algorithm for a singular system");
  add_system(constraints, cons.system);
  add_repeat(constraints, "--grid", cons.grid, "TQ sample axis a:b:m; once or once per (q, v) coordinate");
  constraints->add_option("--tol", cons.tol, "constraint tolerance");
  constraints->add_option("--max-iter", cons.max_iter, "iteration limit");
  add_repeat(constraints, "--admissible", cons.admissible, "check a section X against the final constraints");
  add_repeat(constraints, "--admissible-grid", cons.admissible_grid, "Q sample axis for --admissible");

  IdentityOptions ids;
  auto* verify = app.add_subcommand("verify-identities", "run the identity suites on random points");
  add_system(verify, ids.system);
  verify->add_option("--samples", ids.samples, "number of random points");
  verify->add_option("--seed", ids.seed, "random seed");
  verify->add_option("--tol", ids.tol, "tolerance of the exact identities");
  verify->add_option("--box", ids.box, "points are drawn from [-box, box]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*check_hj) return cmd_check_hj(chk, out);
    if (*check_ham) return cmd_check_hj_hamiltonian(ham, out);
    if (*integrate) return cmd_integrate(integ, out);
    if (*solve_hj) return cmd_solve_hj(solve, out);
    if (*constraints) return cmd_constraints(cons, out);
    if (*verify) return cmd_verify_identities(ids, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitNumericalError;
  }
  return kExitInputError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("hjk");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hjk::cli
