#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "superrad/correlations.hpp"
#include "superrad/coupling.hpp"
#include "superrad/dynamics.hpp"
#include "superrad/emitters.hpp"
#include "superrad/errors.hpp"
#include "superrad/montecarlo.hpp"
#include "superrad/serialization.hpp"

namespace superrad::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

// Records which flags were given on the command line so that only those
// override the config file.
class Overrides {
 public:
  template <class T>
  CLI::Option* option(CLI::App* app, const std::string& flag, const std::string& key, T& value,
                      const std::string& help) {
    CLI::Option* opt = app->add_option(flag, value, help);
    apply_.push_back([opt, key, &value](ordered_json& cfg) {
      if (opt->count() > 0) cfg[key] = value;
    });
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& flag, const std::string& key, bool& value,
                    const std::string& help) {
    CLI::Option* opt = app->add_flag(flag, value, help);
    apply_.push_back([opt, key, &value](ordered_json& cfg) {
      if (opt->count() > 0) cfg[key] = value;
    });
    return opt;
  }

  void apply(ordered_json& cfg) const {
    for (const auto& f : apply_) f(cfg);
  }

 private:
  std::vector<std::function<void(ordered_json&)>> apply_;
};

struct FlagValues {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::string env;
  std::string delta;
  double lambda0_nm = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  std::vector<int> sizes;
  std::vector<double> d_nm_list;
  std::vector<double> d_over_lambda;
  int n_side = 0;
  int n = 0;
  bool allow_coincident = false;
  double d_nm = 0.0;
  double x0_nm = 0.0;
  double z_nm = 0.0;

  std::string method;
  double t_end = 0.0;
  int steps = 0;
  int max_emitters = 0;

  std::string mode;
  double eta = 0.0;
  double delta_r_nm = 0.0;
  double delta_theta_deg = 0.0;
  int samples = 0;
  int bins = 0;
  int threads = 0;

  std::string matrix;
};

ordered_json common_defaults(const std::string& command) {
  ordered_json cfg;
  cfg["command"] = command;
  cfg["out"] = ".";
  cfg["env"] = "";
  cfg["delta"] = "";
  cfg["lambda0_nm"] = 708.9;
  cfg["beta"] = 0.8179;
  cfg["gamma"] = 1.0;
  cfg["seed"] = 1;
  return cfg;
}

void lattice_defaults(ordered_json& cfg) {
  const LatticeSpec spec{};
  cfg["d_nm"] = spec.lattice_const_nm;
  cfg["x0_nm"] = spec.offset_x0_nm;
  cfg["z_nm"] = spec.height_nm;
}

ordered_json defaults_for(const std::string& command) {
  ordered_json cfg = common_defaults(command);
  if (command == "scan-n") {
    cfg["sizes"] = {3, 5, 7, 9, 11};
    lattice_defaults(cfg);
  } else if (command == "scan-d") {
    cfg["d_nm_list"] = json::array();
    cfg["d_over_lambda"] = json::array();
    cfg["n_side"] = 3;
    cfg["allow_coincident"] = false;
    lattice_defaults(cfg);
  } else if (command == "dynamics") {
    cfg["method"] = "closed";
    cfg["n"] = 9;
    cfg["n_side"] = 3;
    cfg["t_end"] = 5.0;
    cfg["steps"] = 500;
    cfg["max_emitters"] = 12;
    lattice_defaults(cfg);
  } else if (command == "disorder") {
    cfg["mode"] = "filling";
    cfg["eta"] = 1.0;
    cfg["delta_r_nm"] = PositionMode{}.delta_r_nm;
    cfg["delta_theta_deg"] = OrientationMode{}.delta_theta_deg;
    cfg["steps"] = nullptr;
    cfg["samples"] = nullptr;
    cfg["n_side"] = nullptr;
    cfg["bins"] = 40;
    cfg["threads"] = 0;
    lattice_defaults(cfg);
  } else if (command == "validate") {
    cfg["matrix"] = "";
  }
  return cfg;
}

ordered_json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return ordered_json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

fs::path absolute_from(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

// Paths inside a config file are relative to the file itself.
void merge_config_file(ordered_json& cfg, const fs::path& path) {
  const ordered_json doc = read_json_file(path);
  if (!doc.is_object()) throw ParseError(path.string() + ": config must be a JSON object");
  const fs::path base = fs::absolute(path).parent_path();
  for (const auto& [key, value] : doc.items()) {
    if (key == "version") continue;
    if (key == "command") {
      if (value != cfg["command"])
        throw std::invalid_argument("config file is for command " + value.dump());
      continue;
    }
    if (!cfg.contains(key)) throw ParseError(path.string() + ": unknown key '" + key + "'");
    cfg[key] = value;
  }
  const std::string env = cfg["env"].get<std::string>();
  if (env.rfind("tabulated:", 0) == 0 && doc.contains("env"))
    cfg["env"] = "tabulated:" + absolute_from(env.substr(10), base).string();
  for (const char* key : {"delta", "matrix"}) {
    if (doc.contains(key) && cfg.contains(key))
      cfg[key] = absolute_from(cfg[key].get<std::string>(), base).string();
  }
}

void absolutize_paths(ordered_json& cfg) {
  const std::string env = cfg["env"].get<std::string>();
  if (env.rfind("tabulated:", 0) == 0 && env.size() > 10)
    cfg["env"] = "tabulated:" + fs::absolute(env.substr(10)).lexically_normal().string();
  for (const char* key : {"delta", "matrix"}) {
    if (!cfg.contains(key)) continue;
    const std::string p = cfg[key].get<std::string>();
    if (!p.empty()) cfg[key] = fs::absolute(p).lexically_normal().string();
  }
}

std::optional<fs::path> delta_path(const ordered_json& cfg) {
  const std::string p = cfg["delta"].get<std::string>();
  if (p.empty()) return std::nullopt;
  return fs::path(p);
}

EnvironmentModel resolve_environment(const ordered_json& cfg) {
  const std::string env = cfg["env"].get<std::string>();
  const double beta = cfg["beta"].get<double>();
  const double gamma = cfg["gamma"].get<double>();
  EnvironmentModel model;
  if (env.empty()) {
    throw std::invalid_argument("missing --env (freespace|bic|dicke|independent|tabulated:PATH)");
  } else if (env == "freespace") {
    model = FreeSpace{};
  } else if (env == "bic") {
    model = SingleModeBIC{gamma, beta};
  } else if (env == "dicke") {
    model = IdealDicke{gamma};
  } else if (env == "independent") {
    model = Independent{gamma};
  } else if (env.rfind("tabulated:", 0) == 0 && env.size() > 10) {
    ImportedMatrices m = import_decay_matrix(env.substr(10), delta_path(cfg));
    model = Tabulated{std::move(m.decay), std::move(m.coupling)};
  } else {
    throw std::invalid_argument("unknown environment '" + env + "'");
  }
  check_environment(model);
  return model;
}

LatticeSpec resolve_lattice(const ordered_json& cfg, int n_side, bool allow_coincident = false) {
  LatticeSpec spec;
  spec.n_side = n_side;
  spec.lattice_const_nm = cfg["d_nm"].get<double>();
  spec.offset_x0_nm = cfg["x0_nm"].get<double>();
  spec.height_nm = cfg["z_nm"].get<double>();
  spec.allow_coincident = allow_coincident;
  return spec;
}

int perfect_square_root(std::size_t n) {
  const auto r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (static_cast<std::size_t>(r) * static_cast<std::size_t>(r) != n)
    throw std::invalid_argument("tabulated matrix of size " + std::to_string(n) +
                                " is not a square lattice");
  return r;
}

// Indices of the centred n x n block of an m x m lattice (index i * m + j).
std::vector<std::size_t> centred_block(int m, int n) {
  if (n > m)
    throw std::invalid_argument("size " + std::to_string(n) + " exceeds tabulated " +
                                std::to_string(m) + "x" + std::to_string(m) + " matrix");
  if ((m - n) % 2 != 0)
    throw std::invalid_argument("cannot centre a " + std::to_string(n) + "x" +
                                std::to_string(n) + " block in a " + std::to_string(m) + "x" +
                                std::to_string(m) + " lattice");
  const int off = (m - n) / 2;
  std::vector<std::size_t> idx;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      idx.push_back(static_cast<std::size_t>((i + off) * m + (j + off)));
  return idx;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_manifest(const fs::path& dir, const ordered_json& cfg) {
  ordered_json manifest = cfg;
  manifest["version"] = kVersion;
  auto out = open_output(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

std::vector<double> diagonal_of(const DecayMatrix& m) {
  const Eigen::VectorXd d = m.diagonal();
  return {d.data(), d.data() + d.size()};
}

void cmd_scan_n(const ordered_json& cfg, const fs::path& out_dir, std::ostream& out) {
  const auto sizes = cfg["sizes"].get<std::vector<int>>();
  if (sizes.empty()) throw std::invalid_argument("--sizes must not be empty");
  for (int n : sizes)
    if (n < 3 || n % 2 == 0) throw std::invalid_argument("sizes must be odd integers >= 3");
  const EnvironmentModel env = resolve_environment(cfg);
  const bool bic = std::holds_alternative<SingleModeBIC>(env);
  const double lambda0 = cfg["lambda0_nm"].get<double>();

  std::ostringstream csv;
  csv << "n_side,n_total,g2,g2_independent,g2_dicke" << (bic ? ",g2_bic_analytic" : "") << '\n';
  for (int n : sizes) {
    DecayMatrix decay;
    if (const auto* tab = std::get_if<Tabulated>(&env)) {
      const int m = perfect_square_root(tab->decay.size());
      decay = tab->decay.subsample(centred_block(m, n));
    } else if (is_geometry_free(env)) {
      decay = build_matrices(static_cast<std::size_t>(n) * n, env).decay;
    } else {
      decay = build_matrices(build_square_lattice(resolve_lattice(cfg, n), lambda0), env).decay;
    }
    const auto diag = diagonal_of(decay);
    csv << n << ',' << decay.size() << ',' << format_double(g2_spectral(decay).value) << ','
        << format_double(g2_independent_limit(diag)) << ','
        << format_double(g2_dicke_limit(diag));
    if (bic)
      csv << ',' << format_double(g2_bic_analytic(n * n, std::get<SingleModeBIC>(env).beta));
    csv << '\n';
  }
  auto file = open_output(out_dir / "scan_n.csv");
  file << csv.str();
  out << csv.str();
}

void cmd_scan_d(const ordered_json& cfg, const fs::path& out_dir, std::ostream& out) {
  const double lambda0 = cfg["lambda0_nm"].get<double>();
  std::vector<double> d_values = cfg["d_nm_list"].get<std::vector<double>>();
  for (double r : cfg["d_over_lambda"].get<std::vector<double>>()) d_values.push_back(r * lambda0);
  if (d_values.empty()) throw std::invalid_argument("scan-d needs --d-nm or --d-over-lambda");
  const bool allow = cfg["allow_coincident"].get<bool>();
  for (double d : d_values) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("d must be >= 0");
    if (d == 0.0 && !allow)
      throw std::invalid_argument("d = 0 requires --allow-coincident (Dicke idealisation)");
  }
  const EnvironmentModel env = resolve_environment(cfg);
  if (std::holds_alternative<Tabulated>(env))
    throw std::invalid_argument("scan-d cannot rescale a tabulated matrix");
  const int n_side = cfg["n_side"].get<int>();

  std::ostringstream csv;
  csv << "d_nm,d_over_lambda,g2\n";
  for (double d : d_values) {
    ordered_json local = cfg;
    local["d_nm"] = d;
    const EmitterArray array =
        build_square_lattice(resolve_lattice(local, n_side, allow && d == 0.0), lambda0);
    const Matrices m = build_matrices(array, env);
    csv << format_double(d) << ',' << format_double(d / lambda0) << ','
        << format_double(g2_spectral(m.decay).value) << '\n';
  }
  auto file = open_output(out_dir / "scan_d.csv");
  file << csv.str();
  out << csv.str();
}

void cmd_dynamics(const ordered_json& cfg, const fs::path& out_dir, std::ostream& out) {
  const std::string method = cfg["method"].get<std::string>();
  const double t_end = cfg["t_end"].get<double>();
  const int steps = cfg["steps"].get<int>();
  if (!(t_end > 0.0) || steps < 1) throw std::invalid_argument("need t_end > 0 and steps >= 1");
  const double beta = cfg["beta"].get<double>();
  const double gamma = cfg["gamma"].get<double>();
  int n = cfg["n"].get<int>();

  RateTrace trace;
  ordered_json meta;
  meta["method"] = method;
  std::optional<ClosedFormRate> closed;
  if (method == "lindblad") {
    const EnvironmentModel env = resolve_environment(cfg);
    Matrices m;
    if (const auto* tab = std::get_if<Tabulated>(&env)) {
      m = build_matrices(tab->decay.size(), env);
    } else if (is_geometry_free(env)) {
      m = build_matrices(static_cast<std::size_t>(n), env);
    } else {
      const int n_side = cfg["n_side"].get<int>();
      m = build_matrices(
          build_square_lattice(resolve_lattice(cfg, n_side), cfg["lambda0_nm"].get<double>()),
          env);
    }
    n = static_cast<int>(m.decay.size());
    LindbladOptions opts;
    opts.max_emitters = cfg["max_emitters"].get<std::size_t>();
    trace = lindblad_rate_trace(m.decay, m.coupling, t_end, static_cast<std::size_t>(steps), opts);
    meta["env"] = cfg["env"];
  } else if (method == "ladder") {
    trace = ladder_rate_trace(n, gamma, beta, t_end, static_cast<std::size_t>(steps));
  } else if (method == "meanfield") {
    trace = meanfield_rate_trace(n, gamma, beta, t_end, static_cast<std::size_t>(steps));
  } else if (method == "closed") {
    trace = closed_form_trace(n, gamma, beta, t_end, static_cast<std::size_t>(steps));
    closed = closed_form_rate(n, gamma, beta, 0.0);
  } else {
    throw std::invalid_argument("unknown method '" + method + "'");
  }
  meta["n"] = n;
  if (method != "lindblad") {
    meta["beta"] = beta;
    meta["gamma"] = gamma;
  }
  const TraceSummary s = summarize(trace);
  if (closed) {
    const ClosedFormRate at_peak = closed_form_rate(n, gamma, beta, closed->t_peak);
    meta["peak_rate"] = at_peak.rate;
    meta["peak_time"] = closed->t_peak;
    meta["t0_exact"] = closed->t0_exact;
    meta["t0_quasi_dicke"] = closed->t0_quasi_dicke;
    meta["exponential_branch"] = closed->exponential_branch;
  } else {
    meta["peak_rate"] = s.peak_rate;
    meta["peak_time"] = s.peak_time;
  }
  meta["integrated"] = s.integrated;

  auto file = open_output(out_dir / "trace.csv");
  write_trace_csv(file, trace);
  auto meta_file = open_output(out_dir / "trace_meta.json");
  meta_file << meta.dump(2) << '\n';
  out << "peak_rate=" << format_double(meta["peak_rate"].get<double>())
      << " peak_time=" << format_double(meta["peak_time"].get<double>())
      << " integrated=" << format_double(s.integrated) << '\n';
}

DisorderConfig resolve_disorder(ordered_json& cfg) {
  DisorderConfig config;
  config.environment = resolve_environment(cfg);
  config.lambda0_nm = cfg["lambda0_nm"].get<double>();
  config.master_seed = cfg["seed"].get<std::uint64_t>();
  config.threads = cfg["threads"].get<std::size_t>();

  const std::string mode = cfg["mode"].get<std::string>();
  if (mode == "filling") {
    config.mode = FillingMode{cfg["eta"].get<double>()};
    cfg["steps"] = nullptr;
  } else if (mode == "position") {
    if (cfg["steps"].is_null()) cfg["steps"] = PositionMode{}.steps;
    config.mode = PositionMode{cfg["delta_r_nm"].get<double>(), cfg["steps"].get<int>()};
  } else if (mode == "orientation") {
    if (cfg["steps"].is_null()) cfg["steps"] = OrientationMode{}.steps;
    config.mode = OrientationMode{cfg["delta_theta_deg"].get<double>(), cfg["steps"].get<int>()};
  } else {
    throw std::invalid_argument("unknown disorder mode '" + mode + "'");
  }
  if (cfg["samples"].is_null()) cfg["samples"] = default_sample_count(config.mode);
  config.n_samples = cfg["samples"].get<std::size_t>();

  if (cfg["n_side"].is_null()) {
    if (const auto* tab = std::get_if<Tabulated>(&config.environment))
      cfg["n_side"] = perfect_square_root(tab->decay.size());
    else
      cfg["n_side"] = mode == "filling" ? 11 : 3;
  }
  config.lattice = resolve_lattice(cfg, cfg["n_side"].get<int>());
  check_config(config);
  return config;
}

void cmd_disorder(ordered_json& cfg, const fs::path& out_dir, std::ostream& out) {
  const DisorderConfig config = resolve_disorder(cfg);
  const int bins = cfg["bins"].get<int>();
  if (bins < 1) throw std::invalid_argument("--bins must be >= 1");
  const DisorderDistribution dist = run_disorder(config);

  auto json_file = open_output(out_dir / "distribution.json");
  json_file << distribution_to_json(dist, config).dump(2) << '\n';
  auto hist_file = open_output(out_dir / "histogram.csv");
  write_histogram_csv(hist_file, histogram(dist.samples, static_cast<std::size_t>(bins)));
  auto stats_file = open_output(out_dir / "stats.csv");
  write_stats_csv(stats_file, dist.stats);
  write_stats_csv(out, dist.stats);
}

int cmd_validate(const ordered_json& cfg, std::ostream& out) {
  const std::string path = cfg["matrix"].get<std::string>();
  if (path.empty()) throw std::invalid_argument("validate needs a matrix file");
  const ImportedMatrices m = read_decay_matrix(path, delta_path(cfg));
  const ValidationReport report = validate_physical(m.decay);
  if (report.ok()) {
    out << "ok: " << m.decay.size() << "x" << m.decay.size() << " decay matrix is physical\n";
    return kSuccess;
  }
  out << report.to_string();
  if (!report.to_string().empty() && report.to_string().back() != '\n') out << '\n';
  return kValidation;
}

constexpr const char* kFooter = R"(Examples:
  superrad scan-n --env bic --beta 0.8179 --sizes 3,5,7,9,11 --out runs/bic
  superrad scan-n --env freespace --d-nm 400 --sizes 3,5 --out runs/fs
  superrad scan-n --env tabulated:gamma_11x11.csv --sizes 3,5,7,9,11
  superrad scan-d --env freespace --n-side 3 --d-nm 0,100,200,400 --allow-coincident
  superrad scan-d --env freespace --d-over-lambda 0.25,0.5,1,2,3
  superrad dynamics --method lindblad --env bic --n 9 --t-end 1.5 --steps 300
  superrad dynamics --method closed --beta 0.8179 --n 9
  superrad disorder --env bic --mode orientation --delta-theta-deg 90 --seed 7
  superrad disorder --config runs/bic/manifest.json --out runs/again
  superrad validate gamma.csv --delta delta.csv

Precedence: built-in defaults < --config JSON < explicit flags. Every run
writes manifest.json (the resolved configuration) into --out; passing it back
through --config reproduces the outputs byte for byte.
Exit codes: 0 ok, 1 IO/parse/usage, 2 unphysical matrix, 3 numerical failure.)";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cooperative emission of two-level emitter arrays", "superrad"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  FlagValues v;
  Overrides common;
  app.add_option("--config", v.config, "JSON config file (flat keys as in manifest.json)");
  common.option(&app, "--out", "out", v.out, "output directory (created if missing)");
  common.option(&app, "--seed", "seed", v.seed, "master seed (disorder)");
  common.option(&app, "--env", "env", v.env,
                "environment: freespace|bic|dicke|independent|tabulated:PATH");
  common.option(&app, "--delta", "delta", v.delta, "coherent shift CSV paired with a matrix file");
  common.option(&app, "--lambda0-nm", "lambda0_nm", v.lambda0_nm, "transition wavelength in nm");
  common.option(&app, "--beta", "beta", v.beta, "single-mode coupling fraction");
  common.option(&app, "--gamma", "gamma", v.gamma, "single-emitter decay rate");

  auto add_lattice = [&](CLI::App* sub, Overrides& o) {
    o.option(sub, "--d-nm", "d_nm", v.d_nm, "lattice constant in nm");
    o.option(sub, "--x0-nm", "x0_nm", v.x0_nm, "x offset of the lattice centre in nm");
    o.option(sub, "--z-nm", "z_nm", v.z_nm, "height above the surface in nm");
  };

  Overrides scan_n_o;
  CLI::App* scan_n = app.add_subcommand("scan-n", "G2(0,0) against lattice size");
  scan_n_o.option(scan_n, "--sizes", "sizes", v.sizes, "odd lattice side lengths")
      ->delimiter(',');
  add_lattice(scan_n, scan_n_o);

  Overrides scan_d_o;
  CLI::App* scan_d = app.add_subcommand("scan-d", "G2(0,0) against lattice constant");
  scan_d_o.option(scan_d, "--d-nm", "d_nm_list", v.d_nm_list, "lattice constants in nm")
      ->delimiter(',');
  scan_d_o.option(scan_d, "--d-over-lambda", "d_over_lambda", v.d_over_lambda,
                  "lattice constants in units of lambda0")
      ->delimiter(',');
  scan_d_o.option(scan_d, "--n-side", "n_side", v.n_side, "lattice side length");
  scan_d_o.flag(scan_d, "--allow-coincident", "allow_coincident", v.allow_coincident,
                "permit d = 0 (all emitters at one point)");
  scan_d_o.option(scan_d, "--x0-nm", "x0_nm", v.x0_nm, "x offset of the lattice centre in nm");
  scan_d_o.option(scan_d, "--z-nm", "z_nm", v.z_nm, "height above the surface in nm");

  Overrides dyn_o;
  CLI::App* dyn = app.add_subcommand("dynamics", "emission rate R(t) from the inverted state");
  dyn_o.option(dyn, "--method", "method", v.method, "lindblad|ladder|meanfield|closed")
      ->check(CLI::IsMember({"lindblad", "ladder", "meanfield", "closed"}));
  dyn_o.option(dyn, "--n", "n", v.n, "number of emitters (geometry-free models)");
  dyn_o.option(dyn, "--n-side", "n_side", v.n_side, "lattice side length (freespace)");
  dyn_o.option(dyn, "--t-end", "t_end", v.t_end, "final time in units of 1/gamma");
  dyn_o.option(dyn, "--steps", "steps", v.steps, "output intervals");
  dyn_o.option(dyn, "--max-emitters", "max_emitters", v.max_emitters, "Lindblad size cap");
  add_lattice(dyn, dyn_o);

  Overrides dis_o;
  CLI::App* dis = app.add_subcommand("disorder", "Monte Carlo G2(0,0) distribution");
  dis_o.option(dis, "--mode", "mode", v.mode, "filling|position|orientation")
      ->check(CLI::IsMember({"filling", "position", "orientation"}));
  dis_o.option(dis, "--eta", "eta", v.eta, "filling fraction");
  dis_o.option(dis, "--delta-r-nm", "delta_r_nm", v.delta_r_nm, "position jitter radius in nm");
  dis_o.option(dis, "--delta-theta-deg", "delta_theta_deg", v.delta_theta_deg,
               "orientation jitter in degrees");
  dis_o.option(dis, "--steps", "steps", v.steps, "jitter grid intervals");
  dis_o.option(dis, "--samples", "samples", v.samples, "number of realisations");
  dis_o.option(dis, "--n-side", "n_side", v.n_side, "lattice side length");
  dis_o.option(dis, "--bins", "bins", v.bins, "histogram bins");
  dis_o.option(dis, "--threads", "threads", v.threads, "worker threads (0: all cores)");
  add_lattice(dis, dis_o);

  Overrides val_o;
  CLI::App* val = app.add_subcommand("validate", "check a decay matrix file for physicality");
  val_o.option(val, "matrix", "matrix", v.matrix, "decay matrix (.csv or .json)");

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kIoOrParse;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    ordered_json cfg = defaults_for(command);
    if (!v.config.empty()) merge_config_file(cfg, v.config);
    common.apply(cfg);
    if (sub == scan_n) scan_n_o.apply(cfg);
    if (sub == scan_d) scan_d_o.apply(cfg);
    if (sub == dyn) dyn_o.apply(cfg);
    if (sub == dis) dis_o.apply(cfg);
    if (sub == val) val_o.apply(cfg);
    absolutize_paths(cfg);

    const fs::path out_dir = cfg["out"].get<std::string>();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    int code = kSuccess;
    if (command == "scan-n") cmd_scan_n(cfg, out_dir, out);
    else if (command == "scan-d") cmd_scan_d(cfg, out_dir, out);
    else if (command == "dynamics") cmd_dynamics(cfg, out_dir, out);
    else if (command == "disorder") cmd_disorder(cfg, out_dir, out);
    else code = cmd_validate(cfg, out);
    write_manifest(out_dir, cfg);
    return code;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIoOrParse;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kIoOrParse;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kIoOrParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrParse;
  }
}

}  // namespace superrad::cli
