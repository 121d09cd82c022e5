#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vmot/certificate.hpp"
#include "vmot/content_hash.hpp"
#include "vmot/dual_recovery.hpp"
#include "vmot/entropic.hpp"
#include "vmot/error.hpp"
#include "vmot/exact_solver.hpp"
#include "vmot/marginal_io.hpp"
#include "vmot/verify.hpp"

namespace vmot::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Usage errors detected after CLI11 parsing (conflicting options and such).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kIo:
    case ErrorKind::kMismatchedInstance:
    case ErrorKind::kPayoffParseError:
    case ErrorKind::kInvalidMarginal:
    case ErrorKind::kEmptyInput:
    case ErrorKind::kInvalidSchedule:
      return kExitUsage;
    default:
      return kExitDomainFailure;
  }
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << (v == 0.0 ? 0.0 : v);
  return os.str();
}

DiscreteMarginal marginal_entry(const json& entry, const fs::path& base) {
  if (entry.is_string()) return load_marginal(base / entry.get<std::string>());
  if (entry.is_object() && entry.contains("points")) return parse_marginal_json(entry.dump());
  if (entry.is_object() && entry.contains("samples")) {
    const auto samples = entry.at("samples").get<std::vector<double>>();
    const auto n = entry.value("n_points", std::size_t{0});
    if (n == 0) throw Error(ErrorKind::kIo, "\"samples\" entries need a positive \"n_points\"");
    return quantize(samples, n);
  }
  throw Error(ErrorKind::kIo, "marginal entry must be a file name or an object");
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> parse_schedule(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError("--schedule expects comma-separated numbers, got '" + item + "'");
    }
  }
  return out;
}

// Options shared by every subcommand that builds an instance.
struct InstanceFlags {
  std::string config;
  double perturb = 0.0;
  std::size_t path_budget = PathGrid::kDefaultPathBudget;
};

void add_instance_flags(CLI::App* cmd, InstanceFlags& f) {
  cmd->add_option("config", f.config, "Instance config (JSON)")->required();
  cmd->add_option("--perturb", f.perturb,
                  "Convolve maturity t with a 3-point law of radius t*EPS");
  cmd->add_option("--path-budget", f.path_budget, "Maximum number of grid paths");
}

struct Loaded {
  InstanceConfig config;
  MarginalSystem system;
};

Loaded load(const InstanceFlags& f) {
  if (f.perturb < 0.0) throw UsageError("--perturb must be nonnegative");
  InstanceConfig cfg = load_config(f.config);
  MarginalSystem sys = f.perturb > 0.0 ? perturb(cfg.system, f.perturb) : cfg.system;
  return {std::move(cfg), std::move(sys)};
}

VmotInstance build(const Loaded& loaded, const InstanceFlags& f, Direction dir) {
  InstanceOptions opt;
  opt.path_budget = f.path_budget;
  if (loaded.config.bounds) {
    std::vector<std::vector<Payoff>> b;
    for (const auto& row : *loaded.config.bounds) {
      auto& out = b.emplace_back();
      for (const auto& text : row) out.push_back(Payoff::parse_scalar(text));
    }
    opt.bounds = std::move(b);
  }
  return build_instance(loaded.system, Payoff::parse(loaded.config.payoff), dir, opt);
}

void print_violation(std::ostream& err, const ConvexOrderViolation& e) {
  err << "convex order fails between maturities " << e.t() << " and " << e.t() + 1
      << " for asset " << e.asset() << " (witness x = " << num(e.witness()) << ")\n";
}

json hedge_json(const HedgeViolation& v) { return {{"amount", v.amount}, {"path", v.path}}; }

json report_json(const SolveReport& r, const ReplicationReport& rep, bool timings) {
  json j;
  j["direction"] = to_string(r.direction);
  j["source"] = r.source;
  j["primal_value"] = r.primal_value;
  j["dual_value"] = r.dual_value;
  j["gap"] = r.gap;
  j["gap_tol"] = r.gap_tol;
  j["weak_duality_ok"] = r.weak_duality_ok;
  j["duality_passed"] = r.passed;
  j["worst_hedge_violation"] = hedge_json(r.worst_hedge);
  j["contact_set"] = {{"support_size", rep.support.size()},
                      {"mass_floor", rep.options.mass_floor},
                      {"worst_residual", rep.max_support_residual},
                      {"worst_path", rep.worst_support_path},
                      {"support_ok", rep.support_ok},
                      {"one_sided_ok", rep.one_sided_ok}};
  if (timings) j["seconds"] = r.seconds;
  return j;
}

// ---------------------------------------------------------------- check

int cmd_check(const InstanceFlags& flags, std::ostream& out, std::ostream& err) {
  const Loaded loaded = load(flags);
  const MarginalSystem& sys = loaded.system;
  bool all_ok = true;
  out << std::left << std::setw(12) << "maturities" << std::setw(7) << "asset" << std::setw(8)
      << "order" << std::setw(14) << "witness" << std::setw(13) << "irreducible"
      << "domain\n";
  for (std::size_t t = 0; t + 1 < sys.periods(); ++t) {
    for (std::size_t i = 0; i < sys.assets(); ++i) {
      const auto& mu = sys.at(t, i);
      const auto& nu = sys.at(t + 1, i);
      const ConvexOrderResult order = check_convex_order(mu, nu);
      std::ostringstream pair;
      pair << t + 1 << "->" << t + 2;
      out << std::setw(12) << pair.str() << std::setw(7) << i + 1;
      if (!order.holds) {
        all_ok = false;
        out << std::setw(8) << "FAIL" << std::setw(14) << num(order.witness.value_or(NAN))
            << std::setw(13) << "-" << "-\n";
        continue;
      }
      const IrreducibleDomain dom = irreducibility(mu, nu);
      if (!dom.irreducible) all_ok = false;
      std::ostringstream d;
      if (dom.empty()) {
        d << "I empty";
      } else {
        d << "I=(" << num(dom.lower) << ", " << num(dom.upper) << ") J="
          << (dom.lower_closed ? '[' : '(') << num(dom.lower) << ", " << num(dom.upper)
          << (dom.upper_closed ? ']' : ')');
        if (dom.components > 1) d << " components=" << dom.components;
      }
      out << std::setw(8) << "ok" << std::setw(14) << "-" << std::setw(13)
          << (dom.irreducible ? "yes" : "no") << d.str() << "\n";
    }
  }
  if (!all_ok) {
    err << "marginal system fails the convex-order or irreducibility checks"
        << " (--perturb EPS can restore irreducibility)\n";
  }
  return all_ok ? kExitPass : kExitDomainFailure;
}

// ---------------------------------------------------------------- solve

struct SolveFlags {
  InstanceFlags inst;
  std::string backend = "exact";
  bool both_directions = false;
  std::optional<double> epsilon;
  std::optional<std::string> schedule;
  double tol = 1e-6;
  std::size_t max_iter = 200'000;
  std::optional<std::string> out_dir;
  std::optional<std::string> export_lp;
  bool markov = false;
  bool fail_on_violation = false;
  bool deterministic = false;
  std::size_t exact_budget = ExactOptions{}.path_budget;
  std::uint64_t seed = 1;
  std::size_t alternates = 0;
  double mass_floor = 1e-10;
};

void validate(const SolveFlags& f) {
  const bool exact = f.backend != "entropic";
  const bool entropic = f.backend != "exact";
  if (f.epsilon && f.schedule) throw UsageError("--epsilon and --schedule are mutually exclusive");
  if (!entropic && (f.epsilon || f.schedule)) {
    throw UsageError("--epsilon/--schedule require --backend entropic or both");
  }
  if (!exact && f.export_lp) throw UsageError("--export-lp requires the exact backend");
  if (!exact && f.alternates > 0) throw UsageError("--alternate-optima requires the exact backend");
  if (entropic && f.markov) {
    throw UsageError("--markov-martingale is only available with --backend exact");
  }
  if (f.epsilon && !(*f.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
  if (!(f.tol > 0.0)) throw UsageError("--tol must be positive");
}

std::string artifact_name(const std::string& stem, const std::string& backend,
                          Direction dir, Direction primary) {
  std::string name = stem;
  if (backend == "entropic") name += ".entropic";
  if (dir != primary) name += std::string(".") + to_string(dir);
  return name + ".json";
}

int cmd_solve(SolveFlags& f, std::ostream& out, std::ostream& err) {
  validate(f);
  std::vector<double> schedule;
  if (f.schedule) {
    schedule = parse_schedule(*f.schedule);
    if (schedule.empty()) throw Error(ErrorKind::kInvalidSchedule, "empty --schedule");
  } else {
    schedule = {f.epsilon.value_or(0.05)};
  }
  const Loaded loaded = load(f.inst);
  const Direction primary = loaded.config.direction;
  const VmotInstance base = build(loaded, f.inst, primary);
  const std::string hash = instance_hash(base);
  const bool timings = !f.deterministic;

  std::vector<Direction> dirs{primary};
  if (f.both_directions) {
    dirs = {Direction::kMin, Direction::kMax};
  }
  std::vector<std::string> backends;
  if (f.backend != "entropic") backends.push_back("exact");
  if (f.backend != "exact") backends.push_back("entropic");

  json report;
  report["schema"] = 1;
  report["instance_hash"] = hash;
  if (timings) report["created"] = utc_timestamp();
  report["instance"] = {{"config", loaded.config.path.filename().string()},
                        {"payoff", loaded.config.payoff},
                        {"N", base.periods()},
                        {"d", base.assets()},
                        {"paths", base.grid().path_count()},
                        {"perturb", f.inst.perturb},
                        {"bound_check", base.bound_status() == BoundStatus::kHolds
                                            ? "holds"
                                            : base.bound_status() == BoundStatus::kViolated
                                                  ? "violated"
                                                  : "unchecked"}};
  if (base.bound_status() == BoundStatus::kViolated) {
    err << "warning: |c| exceeds the declared bound on path " << *base.bound_violation_path()
        << "\n";
  }
  json results = json::array();
  bool all_passed = true;
  std::vector<std::pair<std::string, std::string>> artifacts;
  std::map<Direction, double> exact_values;

  std::optional<LpTableau> tableau;
  if (f.backend != "entropic") {
    ExactOptions eo;
    eo.path_budget = f.exact_budget;
    eo.conditioning = f.markov ? Conditioning::kMarkov : Conditioning::kFullHistory;
    tableau = assemble_lp(base, eo);
    if (f.export_lp) {
      std::ostringstream lp;
      export_lp(*tableau, primary, lp);
      write_file(*f.export_lp, lp.str());
    }
  }

  for (Direction dir : dirs) {
    const VmotInstance inst = base.with_direction(dir);
    for (const std::string& backend : backends) {
      const auto start = std::chrono::steady_clock::now();
      Coupling coupling;
      DualCertificate cert;
      double gap_tol = kExactGapTolerance;
      ReplicationOptions ro;
      ro.mass_floor = f.mass_floor;
      std::vector<Coupling> optimizers;
      json extra;
      if (backend == "exact") {
        const ExactSolution sol = solve_exact(*tableau, dir);
        coupling = sol.coupling;
        optimizers.push_back(sol.coupling);
        for (Coupling& alt : alternate_optima(*tableau, sol, f.alternates, f.seed)) {
          optimizers.push_back(std::move(alt));
        }
        cert = certificate_from_lp(*tableau, sol, inst);
        try {
          cert = gauge_normalize(cert, inst);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kAnchorOutsideDomain) throw;
          extra["normalization"] = std::string("skipped: ") + e.what();
        }
        exact_values[dir] = sol.value;
        extra["lp"] = {{"rows", tableau->rows.size()},
                       {"columns", tableau->path_count},
                       {"marginal_rows_dropped", tableau->marginal_rows_dropped},
                       {"martingale_rows_trivial", tableau->martingale_rows_trivial},
                       {"conditioning", f.markov ? "markov" : "full-history"},
                       {"iterations", sol.raw.iterations},
                       {"alternate_optima", optimizers.size() - 1}};
      } else {
        EntropicOptions eo;
        eo.tol = f.tol;
        eo.max_iter = f.max_iter;
        const auto stages = epsilon_schedule(inst, schedule, eo);
        const EntropicResult& last = stages.back().result;
        coupling = last.coupling;
        cert = last.certificate_raw;
        gap_tol = entropic_gap_tolerance(last.epsilon, inst.grid().path_count());
        // Dense couplings only replicate up to the entropic bias.
        ro.rep_tol = std::numeric_limits<double>::infinity();
        ro.hedge_tol = std::max(ro.hedge_tol, 10.0 * last.epsilon * f.tol);
        json st = json::array();
        for (const auto& s : stages) {
          st.push_back({{"epsilon", s.epsilon},
                        {"value", s.value},
                        {"iterations", s.result.iterations},
                        {"converged", s.result.converged},
                        {"marginal_violation", s.result.marginal_violation},
                        {"martingale_violation", s.result.martingale_violation},
                        {"violation_increases", s.result.violation_increases}});
        }
        extra["schedule"] = st;
        const auto& h = last.history;
        extra["violation_tail"] =
            std::vector<double>(h.end() - static_cast<std::ptrdiff_t>(std::min<std::size_t>(h.size(), 10)), h.end());
        if (!last.converged) {
          err << "warning: entropic eps=" << num(last.epsilon) << " " << to_string(dir)
              << " stopped after " << last.iterations << " sweeps without reaching tol\n";
        }
      }
      SolveReport rep = check_duality(inst, coupling, cert, gap_tol, f.mass_floor);
      rep.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      ReplicationReport worst_rep = check_replication(inst, coupling, cert, ro);
      for (const Coupling& pi : optimizers) {
        ReplicationReport r = check_replication(inst, pi, cert, ro);
        if (!r.passed() && worst_rep.passed()) worst_rep = std::move(r);
      }
      const bool passed = rep.passed && worst_rep.passed();
      all_passed = all_passed && passed;

      json j = report_json(rep, worst_rep, timings);
      j["backend"] = backend;
      j["value"] = rep.primal_value;
      j["passed"] = passed;
      j.update(extra);
      results.push_back(std::move(j));

      out << to_string(dir) << " " << backend << ": " << num(rep.primal_value)
          << "  (dual " << num(rep.dual_value) << ", gap " << num(rep.gap) << ", "
          << (passed ? "verified" : "CHECK FAILED") << ")\n";

      artifacts.emplace_back(artifact_name("certificate", backend, dir, primary),
                             certificate_to_json(cert, inst.grid(), hash));
      artifacts.emplace_back(artifact_name("coupling", backend, dir, primary),
                             coupling_to_json(coupling, hash));
    }
  }
  if (exact_values.size() == 2) {
    out << "bracket [min, max] = [" << num(exact_values[Direction::kMin]) << ", "
        << num(exact_values[Direction::kMax]) << "]\n";
  }
  report["results"] = std::move(results);
  report["passed"] = all_passed;

  if (f.out_dir) {
    const fs::path dir(*f.out_dir);
    write_file(dir / "report.json", report.dump(2) + "\n");
    for (const auto& [name, text] : artifacts) write_file(dir / name, text);
  }
  if (!all_passed && f.fail_on_violation) return kExitDomainFailure;
  return kExitPass;
}

// ---------------------------------------------------------------- verify

struct VerifyFlags {
  InstanceFlags inst;
  std::optional<std::string> artifacts;
  std::optional<std::string> certificate;
  std::optional<std::string> coupling;
  std::optional<double> gap_tol;
  double rep_tol = 1e-6;
  double hedge_tol = 1e-7;
  double mass_floor = 1e-10;
};

int cmd_verify(const VerifyFlags& f, std::ostream& out, std::ostream& err) {
  if (f.artifacts && (f.certificate || f.coupling)) {
    throw UsageError("--artifacts excludes --certificate/--coupling");
  }
  if (!f.artifacts && !(f.certificate && f.coupling)) {
    throw UsageError("give --artifacts DIR or both --certificate and --coupling");
  }
  const fs::path cert_path =
      f.artifacts ? fs::path(*f.artifacts) / "certificate.json" : fs::path(*f.certificate);
  const fs::path coupling_path =
      f.artifacts ? fs::path(*f.artifacts) / "coupling.json" : fs::path(*f.coupling);

  const Loaded loaded = load(f.inst);
  VmotInstance inst = build(loaded, f.inst, loaded.config.direction);
  const std::string hash = instance_hash(inst);
  std::string cert_hash;
  std::string coupling_hash;
  const DualCertificate cert =
      certificate_from_json(read_text_file(cert_path), inst.grid(), &cert_hash);
  const Coupling coupling =
      coupling_from_json(read_text_file(coupling_path), inst.grid(), &coupling_hash);
  if (cert_hash != hash || coupling_hash != hash) {
    err << "artifact hash mismatch: instance " << hash << ", certificate " << cert_hash
        << ", coupling " << coupling_hash << "\n";
    return kExitUsage;
  }
  if (cert.direction != inst.direction()) inst = inst.with_direction(cert.direction);

  const bool entropic = cert.source == "entropic";
  double gap_tol = kExactGapTolerance;
  ReplicationOptions ro{f.mass_floor, f.rep_tol, f.hedge_tol};
  if (entropic) {
    const double eps = cert.epsilon.value_or(0.05);
    gap_tol = entropic_gap_tolerance(eps, inst.grid().path_count());
    ro.rep_tol = std::numeric_limits<double>::infinity();
    ro.hedge_tol = std::max(ro.hedge_tol, 1e-5 * eps);
  }
  if (f.gap_tol) gap_tol = *f.gap_tol;

  const SolveReport rep = check_duality(inst, coupling, cert, gap_tol, f.mass_floor);
  const ReplicationReport rr = check_replication(inst, coupling, cert, ro);
  out << "direction " << to_string(cert.direction) << ", certificate source " << cert.source
      << "\n";
  out << "duality:     P = " << num(rep.primal_value) << ", D = " << num(rep.dual_value)
      << ", gap = " << num(rep.gap) << " (tol " << num(gap_tol) << ") "
      << (rep.passed ? "pass" : "FAIL") << "\n";
  out << "replication: support " << rr.support.size() << " paths, worst |r| = "
      << num(rr.max_support_residual) << " on path " << rr.worst_support_path << " "
      << (entropic ? "(reported only)" : rr.support_ok ? "pass" : "FAIL") << "\n";
  out << "hedging:     worst violation " << num(rr.worst_one_sided.amount) << " on path "
      << rr.worst_one_sided.path << " " << (rr.one_sided_ok ? "pass" : "FAIL") << "\n";
  return rep.passed && rr.passed() ? kExitPass : kExitDomainFailure;
}

// ---------------------------------------------------------------- cross-validate

struct CrossFlags {
  InstanceFlags inst;
  std::string schedule = "0.5,0.1,0.02";
  double tol = 1e-6;
  std::size_t max_iter = 200'000;
  std::size_t exact_budget = ExactOptions{}.path_budget;
  std::uint64_t seed = 1;
  std::optional<std::string> out_dir;
};

int cmd_cross_validate(const CrossFlags& f, std::ostream& out, std::ostream& err) {
  CrossValidateOptions opt;
  opt.schedule = parse_schedule(f.schedule);
  opt.entropic.tol = f.tol;
  opt.entropic.max_iter = f.max_iter;
  opt.exact.path_budget = f.exact_budget;
  opt.seed = f.seed;
  const Loaded loaded = load(f.inst);
  const VmotInstance inst = build(loaded, f.inst, loaded.config.direction);
  const CrossValidation cv = cross_validate(inst, opt);

  json j;
  j["schema"] = 1;
  j["instance_hash"] = instance_hash(inst);
  for (const DirectionSummary* s : {&cv.min, &cv.max}) {
    const std::string tag = to_string(s->direction);
    out << tag << ": exact " << num(s->exact_value) << " (" << s->optimizers_checked
        << " optimizer(s) checked)\n";
    out << "  lp-duals  value " << num(s->lp_route.value) << ", worst hedge "
        << num(s->lp_route.worst_hedge.amount) << ", worst support residual "
        << num(s->lp_route.worst_support_residual) << (s->lp_route.ok ? "  ok" : "  FAIL")
        << "\n";
    json dj;
    dj["exact"] = s->exact_value;
    dj["lp_route_ok"] = s->lp_route.ok;
    if (s->envelope_route) {
      const RouteSummary& r = *s->envelope_route;
      out << "  envelope  value " << num(r.value) << ", worst hedge "
          << num(r.worst_hedge.amount) << ", worst support residual "
          << num(r.worst_support_residual) << (r.ok ? "  ok" : "  FAIL") << "\n";
      dj["envelope_route_ok"] = r.ok;
    } else {
      out << "  envelope  skipped (d >= 3)\n";
    }
    json st = json::array();
    for (const ScheduleStage& stage : s->entropic) {
      out << "  entropic  eps " << num(stage.epsilon) << ": " << num(stage.value) << " ("
          << stage.result.iterations << " sweeps"
          << (stage.result.converged ? "" : ", not converged") << ")\n";
      st.push_back({{"epsilon", stage.epsilon},
                    {"value", stage.value},
                    {"converged", stage.result.converged}});
    }
    dj["entropic"] = st;
    dj["failures"] = s->failures;
    j[tag] = dj;
    for (const std::string& msg : s->failures) err << "FAIL " << msg << "\n";
  }
  for (const std::string& msg : cv.failures) err << "FAIL " << msg << "\n";
  j["bracket_ok"] = cv.bracket_ok;
  j["passed"] = cv.passed();
  out << (cv.passed() ? "all routes agree\n" : "cross-validation FAILED\n");
  if (f.out_dir) write_file(fs::path(*f.out_dir) / "crossval.json", j.dump(2) + "\n");
  return cv.passed() ? kExitPass : kExitDomainFailure;
}

}  // namespace

InstanceConfig load_config(const fs::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, path.string() + ": " + e.what());
  }
  try {
    if (!j.is_object()) throw Error(ErrorKind::kIo, "config must be a JSON object");
    if (j.contains("schema") && j.at("schema") != 1) {
      throw Error(ErrorKind::kIo, "unsupported config schema " + j.at("schema").dump());
    }
    const fs::path base = path.parent_path();
    std::vector<std::vector<DiscreteMarginal>> rows;
    const json& m = j.at("marginals");
    if (!m.is_array() || m.empty()) throw Error(ErrorKind::kIo, "\"marginals\" must be a nonempty array");
    for (const json& row : m) {
      if (!row.is_array() || row.empty()) {
        throw Error(ErrorKind::kIo, "each maturity needs a nonempty array of marginals");
      }
      auto& r = rows.emplace_back();
      for (const json& entry : row) r.push_back(marginal_entry(entry, base));
    }
    std::optional<std::vector<std::vector<std::string>>> bounds;
    if (j.contains("bounds") && !j.at("bounds").is_null()) {
      bounds = j.at("bounds").get<std::vector<std::vector<std::string>>>();
      if (bounds->size() != rows.size()) throw Error(ErrorKind::kIo, "\"bounds\" must be N x d");
      for (const auto& b : *bounds) {
        if (b.size() != rows.front().size()) throw Error(ErrorKind::kIo, "\"bounds\" must be N x d");
      }
    }
    return InstanceConfig{path, MarginalSystem(std::move(rows)), j.at("payoff").get<std::string>(),
                          parse_direction(j.value("direction", std::string("min"))),
                          std::move(bounds)};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::kIo, path.string() + ": " + e.what());
  }
}

MarginalSystem perturb(const MarginalSystem& system, double eps) {
  std::vector<std::vector<DiscreteMarginal>> rows;
  for (std::size_t t = 0; t < system.periods(); ++t) {
    auto& r = rows.emplace_back();
    for (std::size_t i = 0; i < system.assets(); ++i) {
      r.push_back(convolve_three_point(system.at(t, i), static_cast<double>(t + 1) * eps));
    }
  }
  return MarginalSystem(std::move(rows));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model-free price bounds by vectorial martingale optimal transport", "vmot"};
  app.require_subcommand(1);

  InstanceFlags check_flags;
  auto* check = app.add_subcommand("check", "Convex order and irreducibility of the marginals");
  add_instance_flags(check, check_flags);

  SolveFlags sf;
  auto* solve = app.add_subcommand("solve", "Price bounds with certificates");
  add_instance_flags(solve, sf.inst);
  solve->add_option("--backend", sf.backend, "exact | entropic | both")
      ->check(CLI::IsMember({"exact", "entropic", "both"}));
  solve->add_flag("--both-directions", sf.both_directions, "Solve MIN and MAX");
  solve->add_option("--epsilon", sf.epsilon, "Entropic temperature");
  solve->add_option("--schedule", sf.schedule, "Decreasing epsilons, comma separated");
  solve->add_option("--tol", sf.tol, "Entropic stopping tolerance");
  solve->add_option("--max-iter", sf.max_iter, "Entropic sweep limit");
  solve->add_option("--out", sf.out_dir, "Directory for report and artifacts");
  solve->add_option("--export-lp", sf.export_lp, "Write the LP in CPLEX LP format");
  solve->add_flag("--markov-martingale", sf.markov, "Condition on X_t only");
  solve->add_flag("--fail-on-violation", sf.fail_on_violation, "Exit 1 if any check fails");
  solve->add_flag("--deterministic", sf.deterministic, "Omit timestamps and timings");
  solve->add_option("--exact-budget", sf.exact_budget, "Path limit for the exact backend");
  solve->add_option("--seed", sf.seed, "Seed for alternate-optimum search");
  solve->add_option("--alternate-optima", sf.alternates,
                    "Extra optimal couplings to check replication against");
  solve->add_option("--mass-floor", sf.mass_floor, "Support threshold");

  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify", "Check duality and replication of artifacts");
  add_instance_flags(verify, vf.inst);
  verify->add_option("--artifacts", vf.artifacts, "Directory written by solve --out");
  verify->add_option("--certificate", vf.certificate, "Certificate JSON");
  verify->add_option("--coupling", vf.coupling, "Coupling JSON");
  verify->add_option("--gap-tol", vf.gap_tol, "Duality gap tolerance");
  verify->add_option("--rep-tol", vf.rep_tol, "Replication tolerance on the support");
  verify->add_option("--hedge-tol", vf.hedge_tol, "One-sided hedging tolerance");
  verify->add_option("--mass-floor", vf.mass_floor, "Support threshold");

  CrossFlags cf;
  auto* cross = app.add_subcommand("cross-validate", "Compare all solver and certificate routes");
  add_instance_flags(cross, cf.inst);
  cross->add_option("--schedule", cf.schedule, "Entropic epsilons, comma separated");
  cross->add_option("--tol", cf.tol, "Entropic stopping tolerance");
  cross->add_option("--max-iter", cf.max_iter, "Entropic sweep limit");
  cross->add_option("--exact-budget", cf.exact_budget, "Path limit for the exact backend");
  cross->add_option("--seed", cf.seed, "Seed for alternate-optimum search");
  cross->add_option("--out", cf.out_dir, "Directory for crossval.json");

  std::vector<std::string> argv_store{"vmot"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check(check_flags, out, err);
    if (solve->parsed()) return cmd_solve(sf, out, err);
    if (verify->parsed()) return cmd_verify(vf, out, err);
    return cmd_cross_validate(cf, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConvexOrderViolation& e) {
    err << "error: " << e.what() << "\n";
    print_violation(err, e);
    return kExitDomainFailure;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace vmot::cli
