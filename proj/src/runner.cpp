#include "polyelast/runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "polyelast/mesh.hpp"

namespace polyelast {

namespace {

constexpr const char* kSchemeVersion = "1.0.0";
constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument("malformed numeric value for " + key + ": '" +
                                value + "'");
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  const double d = parse_number(key, value);
  if (d != std::floor(d) || std::abs(d) > 1e9)
    throw std::invalid_argument(key + " must be an integer");
  return static_cast<int>(d);
}

void validate(const RunConfig& c) {
  const auto fail = [](const std::string& msg) {
    throw std::invalid_argument(msg);
  };
  if (c.mesh_n < 2) fail("mesh.n must be >= 2");
  if (c.fem_degree < 1 || c.fem_degree > 2) fail("fem.degree must be 1 or 2");
  if (c.fem_quad_order < 0 || c.fem_quad_order > 6)
    fail("fem.quad_order must be in [1, 6] (0 selects the default)");
  if (!(c.dt > 0.0)) fail("time.dt must be > 0");
  if (!(c.t_final > 0.0)) fail("time.t_final must be > 0");
  if (!(c.kappa > 0.0)) fail("energy.kappa must be > 0");
  if (!(c.gamma > 0.0)) fail("energy.gamma must be > 0");
  if (!(c.p > 6.0)) fail("energy.p must exceed 6");
  if (!(c.newton_tol > 0.0)) fail("solver.newton_tol must be > 0");
  if (c.max_newton < 1) fail("solver.max_newton must be >= 1");
  if (c.preset != "equilibrium" && c.preset != "translation" &&
      c.preset != "perturbed")
    fail("initial.preset must be equilibrium, translation or perturbed");
  if (c.amplitude < 0.0 || c.amplitude > 0.1)
    fail("initial.amplitude must be in [0, 0.1]");
  if (c.reference != "none" && c.reference != "equilibrium" &&
      c.reference != "translation")
    fail("reference.type must be none, equilibrium or translation");
  if (c.output_dir.empty()) fail("output.dir must not be empty");
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"mesh.n", [&](const std::string& v) { cfg.mesh_n = parse_int("mesh.n", v); }},
      {"fem.degree", [&](const std::string& v) { cfg.fem_degree = parse_int("fem.degree", v); }},
      {"fem.quad_order", [&](const std::string& v) { cfg.fem_quad_order = parse_int("fem.quad_order", v); }},
      {"time.dt", [&](const std::string& v) { cfg.dt = parse_number("time.dt", v); }},
      {"time.t_final", [&](const std::string& v) { cfg.t_final = parse_number("time.t_final", v); }},
      {"energy.kappa", [&](const std::string& v) { cfg.kappa = parse_number("energy.kappa", v); }},
      {"energy.gamma", [&](const std::string& v) { cfg.gamma = parse_number("energy.gamma", v); }},
      {"energy.p", [&](const std::string& v) { cfg.p = parse_number("energy.p", v); }},
      {"solver.newton_tol", [&](const std::string& v) { cfg.newton_tol = parse_number("solver.newton_tol", v); }},
      {"solver.max_newton", [&](const std::string& v) { cfg.max_newton = parse_int("solver.max_newton", v); }},
      {"initial.preset", [&](const std::string& v) { cfg.preset = v; }},
      {"initial.amplitude", [&](const std::string& v) { cfg.amplitude = parse_number("initial.amplitude", v); }},
      {"initial.seed", [&](const std::string& v) { cfg.seed = static_cast<unsigned>(parse_int("initial.seed", v)); }},
      {"reference.type", [&](const std::string& v) { cfg.reference = v; }},
      {"output.dir", [&](const std::string& v) { cfg.output_dir = v; }},
  };

  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("malformed section header at line " +
                                    std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key = value at line " +
                                  std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos && !section.empty())
      key = section + "." + key;
    const auto it = setters.find(key);
    if (it == setters.end())
      throw std::invalid_argument("unknown config key: " + key);
    if (!seen.insert(key).second)
      throw std::invalid_argument("duplicate config key: " + key);
    it->second(value);
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

DiscreteState make_initial_state(const FeSystem& fe, const RunConfig& cfg) {
  const double a = cfg.amplitude;
  VectorField displacement;
  VectorField velocity;
  if (cfg.preset == "equilibrium") {
    displacement = [](const Eigen::Vector3d&) { return Eigen::Vector3d::Zero(); };
    velocity = displacement;
  } else if (cfg.preset == "translation") {
    displacement = [](const Eigen::Vector3d&) { return Eigen::Vector3d::Zero(); };
    velocity = [a](const Eigen::Vector3d&) { return Eigen::Vector3d(a, 0, 0); };
  } else {  // perturbed: y = x + a (sin 2pi x2, sin 2pi x3, sin 2pi x1)
    displacement = [a](const Eigen::Vector3d& x) {
      return Eigen::Vector3d(a * std::sin(2 * kPi * x[1]),
                             a * std::sin(2 * kPi * x[2]),
                             a * std::sin(2 * kPi * x[0]));
    };
    velocity = [a](const Eigen::Vector3d& x) {
      return Eigen::Vector3d(a * std::cos(2 * kPi * x[1]),
                             a * std::cos(2 * kPi * x[2]),
                             a * std::cos(2 * kPi * x[0]));
    };
  }
  return fe.init_from_deformation(displacement, velocity);
}

namespace {

double kinetic_energy(const FeSystem& fe, const DiscreteState& s) {
  return 0.5 * fe.velocity_norm2(s.v);
}

double state_min_w(const FeSystem& fe, const DiscreteState& s) {
  double m = std::numeric_limits<double>::infinity();
  for (int e = 0; e < fe.num_elements(); ++e)
    for (int q = 0; q < fe.num_quad(); ++q)
      m = std::min(m, fe.broken_at(s.w, e, q)[0]);
  return m;
}

void write_energy_csv(const std::filesystem::path& path, const FeSystem& fe,
                      const EnergyModel& model, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  out << "t,kinetic,internal,total,step_dissipation\n";
  double prev_total = 0.0;
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const double kin = kinetic_energy(fe, traj.states[n]);
    const double tot = entropy(fe, model, traj.states[n]);
    const double diss = n == 0 ? 0.0 : prev_total - tot;
    out << format_double(n * traj.tau) << "," << format_double(kin) << ","
        << format_double(tot - kin) << "," << format_double(tot) << ","
        << format_double(diss) << "\n";
    prev_total = tot;
  }
}

void write_entropy_csv(const std::filesystem::path& path,
                       const std::vector<EntropyReport>& reports) {
  std::ofstream out(path, std::ios::binary);
  out << "t,eta,eta_r,Q,D,E,Ebar,residual\n";
  for (const EntropyReport& r : reports)
    out << format_double(r.t) << "," << format_double(r.eta) << ","
        << format_double(r.eta_r) << "," << format_double(r.Q) << ","
        << format_double(r.D) << "," << format_double(r.E) << ","
        << format_double(r.Ebar) << "," << format_double(r.residual) << "\n";
}

nlohmann::ordered_json config_echo(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["mesh.n"] = c.mesh_n;
  j["fem.degree"] = c.fem_degree;
  j["fem.quad_order"] = c.fem_quad_order;
  j["time.dt"] = c.dt;
  j["time.t_final"] = c.t_final;
  j["energy.kappa"] = c.kappa;
  j["energy.gamma"] = c.gamma;
  j["energy.p"] = c.p;
  j["solver.newton_tol"] = c.newton_tol;
  j["solver.max_newton"] = c.max_newton;
  j["initial.preset"] = c.preset;
  j["initial.amplitude"] = c.amplitude;
  j["initial.seed"] = c.seed;
  j["reference.type"] = c.reference;
  j["output.dir"] = c.output_dir;
  return j;
}

}  // namespace

RunSummary run_experiment(const RunConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(cfg.output_dir);

  const TorusMesh mesh = TorusMesh::build_uniform(cfg.mesh_n);
  const FeSystem fe(mesh, cfg.fem_degree, cfg.fem_quad_order);
  const EnergyModel model = EnergyModel::make(cfg.kappa, cfg.gamma, cfg.p);
  const DiscreteState initial = make_initial_state(fe, cfg);

  StepConfig step;
  step.tau = cfg.dt;
  step.newton_tol = cfg.newton_tol;
  step.max_newton = cfg.max_newton;

  const double e0 = entropy(fe, model, initial);
  const Trajectory traj = run(fe, model, initial, step, cfg.t_final);

  RunSummary summary;
  summary.total_initial = e0;
  summary.steps_completed = static_cast<int>(traj.states.size()) - 1;
  summary.increment_sum = traj.increment_sum;
  summary.increment_bound = 2.0 * e0 / std::min(1.0, cfg.gamma);

  summary.certificates_passed = traj.completed;
  for (std::size_t n = 0; n < traj.certificates.size(); ++n) {
    const StepCertificate& cert = traj.certificates[n];
    if (!cert.converged || cert.slack() > 1e-10 * std::max(1.0, e0)) {
      summary.certificates_passed = false;
      if (summary.failing_step < 0)
        summary.failing_step = static_cast<int>(n) + 1;
    }
  }

  summary.min_w = state_min_w(fe, initial);
  for (const StepCertificate& cert : traj.certificates)
    summary.min_w = std::min(summary.min_w, cert.min_w);
  if (summary.min_w <= 0.0)
    std::cerr << "warning: orientation field w reached min "
              << format_double(summary.min_w) << " <= 0\n";

  const DiscreteState& last = traj.states.back();
  summary.kinetic_final = kinetic_energy(fe, last);
  summary.total_final = entropy(fe, model, last);
  summary.internal_final = summary.total_final - summary.kinetic_final;
  summary.dissipation_sum = summary.total_initial - summary.total_final;

  const std::filesystem::path dir(cfg.output_dir);
  write_energy_csv(dir / "energy.csv", fe, model, traj);

  if (cfg.reference != "none") {
    const ReferenceSolution ref =
        cfg.reference == "equilibrium"
            ? equilibrium_reference()
            : translation_reference(Eigen::Vector3d(cfg.amplitude, 0, 0));
    std::vector<double> t_grid;
    for (int n = 1; n <= summary.steps_completed; ++n)
      t_grid.push_back((n - 0.5) * cfg.dt);
    write_entropy_csv(dir / "entropy_report.csv",
                      verify_identity(fe, model, traj, ref, t_grid));
  }

  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();

  nlohmann::ordered_json j;
  j["scheme_version"] = kSchemeVersion;
  j["config"] = config_echo(cfg);
  j["kinetic_final"] = summary.kinetic_final;
  j["internal_final"] = summary.internal_final;
  j["total_initial"] = summary.total_initial;
  j["total_final"] = summary.total_final;
  j["dissipation_sum"] = summary.dissipation_sum;
  j["increment_sum"] = summary.increment_sum;
  j["increment_bound"] = summary.increment_bound;
  j["min_w"] = summary.min_w;
  j["steps_completed"] = summary.steps_completed;
  j["certificates_passed"] = summary.certificates_passed;
  j["failing_step"] = summary.failing_step;
  j["wall_seconds"] = summary.wall_seconds;
  std::ofstream(dir / "summary.json", std::ios::binary) << j.dump(2) << "\n";

  return summary;
}

RateReport refinement_study(const RunConfig& base_cfg,
                            const std::vector<double>& tau_list) {
  if (tau_list.size() < 3)
    throw std::invalid_argument("refinement study needs at least 3 tau values");
  for (double tau : tau_list)
    if (!(tau > 0.0))
      throw std::invalid_argument("tau values must be positive");

  std::filesystem::create_directories(base_cfg.output_dir);
  const auto mesh = std::make_shared<TorusMesh>(
      TorusMesh::build_uniform(base_cfg.mesh_n));
  const auto fe = std::make_shared<FeSystem>(*mesh, base_cfg.fem_degree,
                                             base_cfg.fem_quad_order);
  const EnergyModel model =
      EnergyModel::make(base_cfg.kappa, base_cfg.gamma, base_cfg.p);
  const DiscreteState initial = make_initial_state(*fe, base_cfg);

  const auto run_at = [&](double tau) {
    StepConfig step;
    step.tau = tau;
    step.newton_tol = base_cfg.newton_tol;
    step.max_newton = base_cfg.max_newton;
    Trajectory traj = run(*fe, model, initial, step, base_cfg.t_final);
    if (!traj.completed)
      throw std::runtime_error("refinement run failed at tau = " +
                               format_double(tau));
    return traj;
  };

  const double tau_min = *std::min_element(tau_list.begin(), tau_list.end());
  const auto fine =
      std::make_shared<Trajectory>(run_at(tau_min / 16.0));
  const ReferenceSolution surrogate = surrogate_reference(fe, fine);

  RateReport report;
  report.taus = tau_list;
  for (double tau : tau_list) {
    const Trajectory traj = run_at(tau);
    report.sup_eta_r.push_back(
        gronwall_monitor(*fe, model, traj, surrogate).sup_eta_r);
  }

  const bool all_positive =
      std::all_of(report.sup_eta_r.begin(), report.sup_eta_r.end(),
                  [](double s) { return s > 0.0; });
  if (all_positive) {
    // Least-squares slope of log sqrt(sup eta_r) against log(tau): the
    // convergence order of the relative-entropy distance.
    const int m = static_cast<int>(tau_list.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
      const double x = std::log(tau_list[i]);
      const double y = 0.5 * std::log(report.sup_eta_r[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    report.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    report.slope_defined = true;
  }

  std::ofstream out(std::filesystem::path(base_cfg.output_dir) / "rates.csv",
                    std::ios::binary);
  out << "tau,sup_eta_r,pairwise_rate\n";
  for (std::size_t i = 0; i < tau_list.size(); ++i) {
    out << format_double(tau_list[i]) << ","
        << format_double(report.sup_eta_r[i]) << ",";
    if (i > 0 && report.sup_eta_r[i] > 0.0 && report.sup_eta_r[i - 1] > 0.0)
      out << format_double(
          0.5 * std::log(report.sup_eta_r[i - 1] / report.sup_eta_r[i]) /
          std::log(tau_list[i - 1] / tau_list[i]));
    out << "\n";
  }
  return report;
}

}  // namespace polyelast
