#include "llsde/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace llsde {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  std::ostringstream os;
  os << "config line " << line << ": " << msg;
  throw std::runtime_error(os.str());
}

double to_double(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    parse_fail(line, "expected a number, got '" + s + "'");
  }
}

long long to_int(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    parse_fail(line, "expected an integer, got '" + s + "'");
  }
}

TestFunctional functional_by_label(const std::string& label, int line) {
  if (label == "x") return functional_x();
  if (label == "x2") return functional_x2();
  parse_fail(line, "unknown functional '" + label + "' (known: x, x2)");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void apply_scheme_key(NamedScheme& ns, const std::string& key,
                      const std::string& value, int line) {
  McScheme& s = ns.scheme;
  if (key == "label") {
    ns.label = value;
  } else if (key == "variant") {
    if (value == "euler") {
      s.euler = true;
    } else {
      s.euler = false;
      try {
        s.ll.variant = variant_from_name(value);
      } catch (const std::exception& e) {
        parse_fail(line, e.what());
      }
    }
  } else if (key == "beta") {
    s.ll.beta = int(to_int(value, line));
  } else if (key == "pade") {
    auto tk = tokens(value);
    if (tk.size() != 2) parse_fail(line, "pade expects two integers p q");
    s.ll.pade.p = int(to_int(tk[0], line));
    s.ll.pade.q = int(to_int(tk[1], line));
  } else if (key == "krylov_m") {
    s.ll.krylov.m = int(to_int(value, line));
  } else if (key == "noise") {
    if (value == "gaussian") {
      s.ll.noise = NoiseKind::Gaussian;
    } else if (value == "two-point") {
      s.ll.noise = NoiseKind::TwoPoint;
    } else {
      parse_fail(line, "noise must be 'gaussian' or 'two-point'");
    }
  } else if (key == "phi_defect") {
    s.ll.phi_defect = to_double(value, line);
  } else {
    parse_fail(line, "unknown scheme key '" + key + "'");
  }
}

void apply_top_key(ExperimentConfig& cfg, const std::string& key,
                   const std::string& value, int line) {
  if (key == "problem") {
    cfg.problem = value;
  } else if (key == "seed") {
    cfg.plan.seed = std::uint64_t(to_int(value, line));
  } else if (key == "samples") {
    cfg.plan.samples = to_int(value, line);
  } else if (key == "steps") {
    cfg.plan.steps.clear();
    for (const auto& t : tokens(value)) {
      cfg.plan.steps.push_back(to_double(t, line));
    }
  } else if (key == "functionals") {
    cfg.plan.functionals.clear();
    for (const auto& t : tokens(value)) {
      cfg.plan.functionals.push_back(functional_by_label(t, line));
    }
  } else if (key == "reference") {
    if (value == "analytic") {
      cfg.plan.reference = ReferenceKind::Analytic;
    } else if (value == "fine-grid") {
      cfg.plan.reference = ReferenceKind::FineGrid;
    } else {
      parse_fail(line, "reference must be 'analytic' or 'fine-grid'");
    }
  } else if (key == "fine_divisor") {
    cfg.plan.fine_step_divisor = to_double(value, line);
  } else if (key == "fine_factor") {
    cfg.plan.fine_sample_factor = to_double(value, line);
  } else if (key == "threads") {
    cfg.plan.threads = int(to_int(value, line));
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "jump") {
    auto tk = tokens(value);
    if (tk.size() != 3 || tk[0] != "constant") {
      parse_fail(line, "jump expects: constant <value> <intensity>");
    }
    JumpChannelConfig jc;
    jc.kind = tk[0];
    jc.value = to_double(tk[1], line);
    jc.mu = to_double(tk[2], line);
    if (jc.mu < 0.0) parse_fail(line, "jump intensity must be >= 0");
    cfg.jump_channels.push_back(jc);
  } else {
    parse_fail(line, "unknown key '" + key + "'");
  }
}

void finalize(ExperimentConfig& cfg) {
  if (cfg.problem.empty()) throw std::runtime_error("config: missing 'problem'");
  if (cfg.plan.steps.empty()) throw std::runtime_error("config: missing 'steps'");
  if (cfg.schemes.empty()) {
    throw std::runtime_error("config: at least one [scheme] section required");
  }
  if (cfg.plan.functionals.empty()) {
    cfg.plan.functionals = {functional_x(), functional_x2()};
  }
  // default labels; disambiguate duplicates by a numeric suffix
  for (auto& ns : cfg.schemes) {
    if (ns.label.empty()) {
      ns.label = ns.scheme.name();
      if (!ns.scheme.euler) ns.label += "-b" + std::to_string(ns.scheme.ll.beta);
    }
  }
  for (std::size_t i = 0; i < cfg.schemes.size(); ++i) {
    int dup = 1;
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.schemes[j].label == cfg.schemes[i].label) ++dup;
    }
    if (dup > 1) cfg.schemes[i].label += "-" + std::to_string(dup);
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.raw = text;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool in_scheme = false;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line == "[scheme]") {
        cfg.schemes.emplace_back();
        in_scheme = true;
        continue;
      }
      parse_fail(lineno, "unknown section '" + line + "'");
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) parse_fail(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) parse_fail(lineno, "empty key or value");
    if (in_scheme) {
      apply_scheme_key(cfg.schemes.back(), key, value, lineno);
    } else {
      apply_top_key(cfg, key, value, lineno);
    }
  }
  finalize(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str());
}

Problem resolve_problem(const ExperimentConfig& cfg) {
  Problem p = builtin_problem(cfg.problem);
  if (!cfg.jump_channels.empty()) {
    JumpSpec spec;
    std::vector<double> values;
    for (const auto& jc : cfg.jump_channels) {
      spec.mu.push_back(jc.mu);
      values.push_back(jc.value);
    }
    const int d = p.model.d;
    spec.coefficient = [values, d](int i, double, const Vector&) {
      return Vector::Constant(d, values[std::size_t(i)]).eval();
    };
    p.jumps = spec;
    // configured jump channels invalidate the catalog reference statistics
    if (p.ref.method.find("jump") == std::string::npos) {
      p.ref.method += " (diffusion only; jump channels added by config)";
    }
  }
  return p;
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;  // FNV-1a offset basis
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

void run_convergence(const ExperimentConfig& cfg) {
  const Problem problem = resolve_problem(cfg);

  // Compute everything first; write files only after full success so a
  // failure leaves no partial outputs.
  struct FileOut {
    std::string name;
    std::string content;
  };
  std::vector<FileOut> files;
  std::ostringstream summary;
  summary << "scheme,functional,slope,half_width,points_used,note\n";

  nlohmann::json manifest;
  manifest["tool"] = "llsde";
  manifest["version"] = "1.0.0";
  manifest["config_hash"] = config_hash(cfg.raw);
  manifest["seed"] = cfg.plan.seed;
  manifest["problem"] = cfg.problem;
  manifest["samples"] = cfg.plan.samples;
  manifest["steps"] = cfg.plan.steps;
  manifest["reference"] =
      cfg.plan.reference == ReferenceKind::Analytic ? "analytic" : "fine-grid";
  manifest["schemes"] = nlohmann::json::array();

  for (const auto& ns : cfg.schemes) {
    const WeakErrorReport report =
        estimate_weak_error(cfg.plan, ns.scheme, problem);
    std::ostringstream csv;
    csv << "scheme,functional,h,error,stderr,n\n";
    for (std::size_t f = 0; f < report.functional_labels.size(); ++f) {
      for (const auto& p : report.points[f]) {
        csv << ns.label << ',' << report.functional_labels[f] << ','
            << fmt(p.h) << ',' << fmt(p.error) << ',' << fmt(p.mc_stderr)
            << ',' << p.n << '\n';
      }
      const SlopeFit& fit = report.fits[f];
      int used = 0;
      for (const auto& p : report.points[f]) {
        if (p.above_floor) ++used;
      }
      summary << ns.label << ',' << report.functional_labels[f] << ','
              << (fit.valid ? fmt(fit.slope) : "") << ','
              << (fit.valid ? fmt(fit.half_width) : "") << ',' << used << ','
              << (fit.valid ? "" : fit.note) << '\n';
    }
    files.push_back({ns.label + ".csv", csv.str()});
    nlohmann::json js;
    js["label"] = ns.label;
    js["variant"] = ns.scheme.name();
    if (!ns.scheme.euler) {
      js["beta"] = ns.scheme.ll.beta;
      js["pade_p"] = ns.scheme.ll.pade.p;
      js["pade_q"] = ns.scheme.ll.pade.q;
      js["noise"] =
          ns.scheme.ll.noise == NoiseKind::Gaussian ? "gaussian" : "two-point";
    }
    manifest["schemes"].push_back(js);
  }
  files.push_back({"summary.csv", summary.str()});
  files.push_back({"manifest.json", manifest.dump(2) + "\n"});

  std::filesystem::create_directories(cfg.out_dir);
  for (const auto& f : files) {
    std::ofstream out(std::filesystem::path(cfg.out_dir) / f.name,
                      std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file " + f.name);
    out << f.content;
  }
}

void run_trajectory(const ExperimentConfig& cfg,
                    std::optional<std::uint64_t> seed_override,
                    std::optional<double> h_override) {
  const Problem problem = resolve_problem(cfg);
  const double h = h_override ? *h_override : cfg.plan.steps.front();
  const double span = problem.model.T - problem.model.t0;
  if (!(h > 0.0) || h > span + 1e-12) {
    throw std::runtime_error("run_trajectory: step size outside (0, T - t0]");
  }
  const std::uint64_t seed = seed_override ? *seed_override : cfg.plan.seed;
  const NamedScheme& ns = cfg.schemes.front();
  if (!ns.scheme.euler) check_scheme(ns.scheme.ll, problem.model);

  const TimeGrid base = uniform_grid(problem.model.t0, problem.model.T, h);
  RngStream rng(seed, 0);
  RngStream jump_rng(seed, 1);
  JumpSchedule sched;
  TimeGrid grid = base;
  if (problem.jumps) {
    sched = sample_jump_times(problem.jumps->mu, base.t0(), base.T(), jump_rng);
    grid = merged_grid(base, sched);
  }

  Vector y = problem.init.draw(rng);
  std::ostringstream csv;
  csv << "t";
  for (int i = 0; i < problem.model.d; ++i) csv << ",x" << i;
  csv << ",jump\n";
  auto jump_channel_at = [&](double t) {
    if (!problem.jumps) return 0;
    for (int c = 0; c < problem.jumps->channels(); ++c) {
      for (double s : sched.times[std::size_t(c)]) {
        if (std::abs(s - t) <= 1e-14 * std::max(std::abs(t), 1.0)) return c + 1;
      }
    }
    return 0;
  };
  auto emit = [&](double t, const Vector& state, int jump) {
    csv << fmt(t);
    for (int i = 0; i < problem.model.d; ++i) csv << ',' << fmt(state[i]);
    csv << ',' << jump << '\n';
  };
  emit(grid.t0(), y, 0);
  for (std::size_t i = 1; i < grid.t.size(); ++i) {
    const double tp = grid.t[i - 1];
    const double tn = grid.t[i];
    if (ns.scheme.euler) {
      y = euler_step(problem.model, tp, y, tn - tp, rng);
      if (problem.jumps) {
        const int c = jump_channel_at(tn);
        if (c > 0) y += problem.jumps->coefficient(c - 1, tn, y);
      }
    } else if (problem.jumps) {
      y = jump_step(ns.scheme.ll, problem.model, *problem.jumps, sched, tp, tn,
                    y, rng);
    } else {
      y = step(ns.scheme.ll, problem.model, tp, y, tn - tp, rng);
    }
    if (!y.allFinite()) {
      throw std::runtime_error("run_trajectory: non-finite state");
    }
    emit(tn, y, jump_channel_at(tn));
  }

  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream out(std::filesystem::path(cfg.out_dir) / "trajectory.csv",
                    std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trajectory.csv");
  out << csv.str();
}

std::string list_schemes_text() {
  std::ostringstream os;
  os << "pade-general   general LL route via the augmented block matrix;\n"
        "               works for time-dependent G; beta in {1, 2}\n"
        "pade-const-g   Van Loan block-matrix route; requires constant\n"
        "               diffusion G (constant-diffusion-only)\n"
        "krylov         exponential action computed in an m-dimensional\n"
        "               Krylov subspace; requires constant G; advisory\n"
        "               condition m >= 2 h |C_beta|_2 (warns, does not abort)\n"
        "ozaki-shoji    autonomous constant-G route; requires an invertible\n"
        "               Jacobian (singular Jacobian is an error)\n"
        "midpoint       exponential midpoint rule; beta = 2 only\n"
        "euler          Euler-Maruyama baseline (weak order 1)\n";
  return os.str();
}

}  // namespace llsde
