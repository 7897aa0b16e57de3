#include "cvc/experiment.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cvc/landscape.hpp"

namespace cvc {

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint32_t fnv1a(const std::string& s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt6(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

std::string build_identifier() {
  std::ostringstream os;
  os << "cvcompile " << kVersion << " (" << std::hex << fnv1a(std::string("cvcompile-") + kVersion)
     << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// config text form
// ---------------------------------------------------------------------------

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  const char* cmd = c.command == Command::Compile     ? "compile"
                    : c.command == Command::Nfl       ? "nfl"
                    : c.command == Command::Landscape ? "landscape"
                                                      : "verify";
  os << "command = " << cmd << "\n";
  os << "seed = " << c.seed << "\n";
  os << "cutoff = " << c.cutoff << "\n";
  os << "out = " << c.out << "\n";
  os << "shots = " << c.shots << "\n";
  os << "threads = " << c.threads << "\n";
  os << "allow_large = " << (c.allow_large ? 1 : 0) << "\n";
  os << "target.kind = " << c.target_kind << "\n";
  os << "target.random = " << (c.target_random ? 1 : 0) << "\n";
  os << "target.elliptic = " << (c.target_elliptic ? 1 : 0) << "\n";
  os << "target.params = " << join_doubles(c.target_params) << "\n";
  os << "ansatz.kind = " << c.ansatz_kind << "\n";
  os << "ansatz.layers = " << c.ansatz_layers << "\n";
  os << "ansatz.bounded = " << (c.ansatz_bounded ? 1 : 0) << "\n";
  os << "ansatz.lo = " << c.ansatz_lo << "\n";
  os << "ansatz.hi = " << c.ansatz_hi << "\n";
  os << "cost.kind = " << c.cost_kind << "\n";
  os << "cost.r = " << c.cost_r << "\n";
  os << "cost.energy = " << c.cost_energy << "\n";
  os << "cost.k = " << c.cost_k << "\n";
  os << "cost.rank = " << c.cost_rank << "\n";
  os << "cost.d = " << c.cost_d << "\n";
  os << "schedule.r = " << join_doubles(c.schedule_r) << "\n";
  os << "opt.method = " << c.opt_method << "\n";
  os << "opt.max_evals = " << c.opt_max_evals << "\n";
  os << "opt.f_tol = " << c.opt_f_tol << "\n";
  os << "opt.fd_step = " << c.opt_fd_step << "\n";
  os << "opt.stage0_starts = " << c.opt_stage0_starts << "\n";
  os << "opt.retries = " << c.opt_retries << "\n";
  os << "opt.retry_threshold = " << c.opt_retry_threshold << "\n";
  os << "opt.cost_floor = " << c.opt_cost_floor << "\n";
  os << "nfl.experiment = " << c.nfl_experiment << "\n";
  os << "nfl.samples = " << c.nfl_samples << "\n";
  os << "nfl.sigma_samples = " << c.nfl_sigma_samples << "\n";
  os << "nfl.d_max = " << c.nfl_d_max << "\n";
  os << "landscape.r = " << join_doubles(c.landscape_r) << "\n";
  os << "landscape.eps = " << join_doubles(c.landscape_eps) << "\n";
  os << "landscape.samples = " << c.landscape_samples << "\n";
  os << "landscape.m_max = " << c.landscape_m_max << "\n";
  os << "landscape.grad_samples = " << c.landscape_grad_samples << "\n";
  return os.str();
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (blank) continue;
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    auto trim = [](std::string s) {
      const char* ws = " \t\r";
      s.erase(0, s.find_first_not_of(ws));
      const size_t last = s.find_last_not_of(ws);
      s.erase(last == std::string::npos ? 0 : last + 1);
      return s;
    };
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "command") {
        const std::string v = lower(val);
        if (v == "compile") c.command = Command::Compile;
        else if (v == "nfl") c.command = Command::Nfl;
        else if (v == "landscape") c.command = Command::Landscape;
        else if (v == "verify") c.command = Command::Verify;
        else throw std::invalid_argument("unknown command '" + val + "'");
      } else if (key == "seed") c.seed = std::stoull(val);
      else if (key == "cutoff") c.cutoff = std::stoi(val);
      else if (key == "out") c.out = val;
      else if (key == "shots") c.shots = std::stoll(val);
      else if (key == "threads") c.threads = std::stoi(val);
      else if (key == "allow_large") c.allow_large = std::stoi(val) != 0;
      else if (key == "target.kind") c.target_kind = lower(val);
      else if (key == "target.random") c.target_random = std::stoi(val) != 0;
      else if (key == "target.elliptic") c.target_elliptic = std::stoi(val) != 0;
      else if (key == "target.params") c.target_params = split_doubles(val);
      else if (key == "ansatz.kind") c.ansatz_kind = lower(val);
      else if (key == "ansatz.layers") c.ansatz_layers = std::stoi(val);
      else if (key == "ansatz.bounded") c.ansatz_bounded = std::stoi(val) != 0;
      else if (key == "ansatz.lo") c.ansatz_lo = std::stod(val);
      else if (key == "ansatz.hi") c.ansatz_hi = std::stod(val);
      else if (key == "cost.kind") c.cost_kind = lower(val);
      else if (key == "cost.r") c.cost_r = std::stod(val);
      else if (key == "cost.energy") c.cost_energy = std::stod(val);
      else if (key == "cost.k") c.cost_k = std::stoi(val);
      else if (key == "cost.rank") c.cost_rank = std::stoi(val);
      else if (key == "cost.d") c.cost_d = std::stoi(val);
      else if (key == "schedule.r") c.schedule_r = split_doubles(val);
      else if (key == "opt.method") c.opt_method = lower(val);
      else if (key == "opt.max_evals") c.opt_max_evals = std::stoll(val);
      else if (key == "opt.f_tol") c.opt_f_tol = std::stod(val);
      else if (key == "opt.fd_step") c.opt_fd_step = std::stod(val);
      else if (key == "opt.stage0_starts") c.opt_stage0_starts = std::stoi(val);
      else if (key == "opt.retries") c.opt_retries = std::stoi(val);
      else if (key == "opt.retry_threshold") c.opt_retry_threshold = std::stod(val);
      else if (key == "opt.cost_floor") c.opt_cost_floor = std::stod(val);
      else if (key == "nfl.experiment") c.nfl_experiment = lower(val);
      else if (key == "nfl.samples") c.nfl_samples = std::stoll(val);
      else if (key == "nfl.sigma_samples") c.nfl_sigma_samples = std::stoll(val);
      else if (key == "nfl.d_max") c.nfl_d_max = std::stod(val);
      else if (key == "landscape.r") c.landscape_r = split_doubles(val);
      else if (key == "landscape.eps") c.landscape_eps = split_doubles(val);
      else if (key == "landscape.samples") c.landscape_samples = std::stoi(val);
      else if (key == "landscape.m_max") c.landscape_m_max = std::stoi(val);
      else if (key == "landscape.grad_samples") c.landscape_grad_samples = std::stoi(val);
      else throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::exception& e) {
      const std::string what = e.what();
      if (what.rfind("config line", 0) == 0 || what.rfind("unknown", 0) == 0) throw;
      throw std::invalid_argument("config line " + std::to_string(lineno) + ", key '" + key +
                                  "': " + what);
    }
  }
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------------

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  const std::string n = lower(name);
  if (n == "fig4-gaussian") {
    c.command = Command::Compile;
    c.target_kind = "gaussian";
    c.ansatz_kind = "gaussian";
    c.cost_kind = "le-tmss";
    c.schedule_r = {0.1, 0.5, 2.5};
    c.cutoff = 50;
    c.opt_cost_floor = 1e-9;
  } else if (n == "fig4-kerr") {
    c.command = Command::Compile;
    c.target_kind = "kerr";
    c.target_random = false;
    c.target_params = {3.0};
    c.ansatz_kind = "layered";
    c.ansatz_layers = 4;
    c.ansatz_bounded = true;
    c.ansatz_lo = 0.0;
    c.ansatz_hi = 1.0;
    c.cost_kind = "le-tmss";
    c.schedule_r = {0.1, 0.5, 2.5};
    c.cutoff = 50;
    c.opt_max_evals = 60000;
    c.opt_cost_floor = 1e-9;
  } else if (n == "fig4-beamsplitter") {
    c.command = Command::Compile;
    c.target_kind = "beamsplitter";
    c.ansatz_kind = "two-mode-layered";
    c.cost_kind = "le-tmss";
    c.schedule_r = {0.1, 0.5, 2.5};
    c.cutoff = 14;
    c.opt_max_evals = 60000;
    c.opt_cost_floor = 1e-9;
  } else if (n == "fig5-acs-k1" || n == "fig5-acs-k2") {
    c.command = Command::Compile;
    c.target_kind = "gaussian";
    c.target_elliptic = true;
    c.ansatz_kind = "gaussian";
    c.cost_kind = "acs";
    c.cost_energy = 1.0;
    c.cost_k = (n == "fig5-acs-k1") ? 1 : 2;
    c.cutoff = 50;
  } else if (n == "fig5-ecfs") {
    c.command = Command::Compile;
    c.target_kind = "gaussian";
    c.target_elliptic = true;
    c.ansatz_kind = "gaussian";
    c.cost_kind = "ecfs";
    c.cost_energy = 1.0;
    c.cost_k = 1;
    c.cost_rank = 2;
    c.cutoff = 50;
  } else if (n == "fig6-kerr-0.1" || n == "fig6-kerr-0.5") {
    c.command = Command::Compile;
    c.target_kind = "kerr";
    c.target_random = false;
    c.target_params = {n == "fig6-kerr-0.1" ? 0.1 : 0.5};
    c.ansatz_kind = "layered";
    c.ansatz_layers = 1;
    c.cost_kind = "acs";  // switched to ecfs / k=2 by the caller as needed
    c.cost_energy = 1.0;
    c.cost_k = 1;
    c.cutoff = 50;
  } else if (n == "fig3-gaussian") {
    c.command = Command::Landscape;
    c.target_kind = "gaussian";
    c.ansatz_kind = "gaussian";
    c.cost_kind = "le-tmss";
    c.cost_r = 0.5;
    c.cutoff = 50;
  } else if (n == "fig3-kerr") {
    c.command = Command::Landscape;
    c.target_kind = "kerr";
    c.target_random = false;
    c.target_params = {3.0};
    c.ansatz_kind = "layered";
    c.ansatz_layers = 4;
    c.cost_kind = "le-tmss";
    c.cost_r = 0.5;
    c.cutoff = 50;
  } else if (n == "nfl-thm1") {
    c.command = Command::Nfl;
    c.nfl_experiment = "thm1";
    c.nfl_samples = 2000;
  } else if (n == "nfl-thm2") {
    c.command = Command::Nfl;
    c.nfl_experiment = "thm2";
    c.nfl_samples = 2000;
  } else if (n == "nfl-cor1") {
    c.command = Command::Nfl;
    c.nfl_experiment = "cor1";
    c.nfl_samples = 2000;
  } else if (n == "nfl-appd") {
    c.command = Command::Nfl;
    c.nfl_experiment = "appd";
    c.nfl_samples = 10000;
    c.nfl_sigma_samples = 100;
    c.nfl_d_max = 2.0;
  } else if (n == "verify") {
    c.command = Command::Verify;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return c;
}

std::vector<std::string> preset_names() {
  return {"fig3-gaussian", "fig3-kerr",     "fig4-gaussian",    "fig4-kerr",
          "fig4-beamsplitter", "fig5-acs-k1", "fig5-acs-k2",    "fig5-ecfs",
          "fig6-kerr-0.1", "fig6-kerr-0.5", "nfl-thm1",         "nfl-thm2",
          "nfl-cor1",      "nfl-appd",      "verify"};
}

// ---------------------------------------------------------------------------
// record output
// ---------------------------------------------------------------------------

void ExperimentRecord::write(std::ostream& os) const {
  nlohmann::json header;
  header["build"] = build_identifier();
  header["config"] = serialize_config(config);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  header["generated_unix"] = long(now);
  os << "# " << header.dump() << "\n";
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) os << ",";
    os << columns[i];
  }
  os << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      os << row[i];
    }
    os << "\n";
  }
}

void ExperimentRecord::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write(out);
}

// ---------------------------------------------------------------------------
// targets, ansaetze, resource guard
// ---------------------------------------------------------------------------

CostKind parse_cost_kind(const std::string& name) {
  const std::string n = lower(name);
  if (n == "hst") return CostKind::Hst;
  if (n == "le-tmss") return CostKind::LeTmss;
  if (n == "r-tmss") return CostKind::RTmss;
  if (n == "r-tmss-normalized") return CostKind::RTmssNormalized;
  if (n == "le-tmss-local") return CostKind::LeTmssLocal;
  if (n == "acs") return CostKind::Acs;
  if (n == "acs-local") return CostKind::AcsLocal;
  if (n == "ecfs") return CostKind::Ecfs;
  throw std::invalid_argument("unknown cost kind: " + name);
}

CompileTarget make_target(const ExperimentConfig& config, RngStream& rng) {
  CompileTarget t;
  const int N = config.cutoff;
  if (config.target_kind == "gaussian") {
    t.kind = CompileTarget::Kind::Gaussian;
    VectorXd p(5);
    if (config.target_random) {
      // The generator beta a^2 + beta* a^dag^2 + phi n is hyperbolic when
      // 4|beta|^2 > phi^2; its truncated exponential then never converges at
      // the working cutoffs (the low-lying block keeps changing with the
      // cutoff). The elliptic guard bounds the internal squeezing
      // (ratio (phi+2|b|)/(phi-2|b|) <= e^2) and keeps the elliptic angle
      // away from the 2 pi displacement resonance.
      do {
        for (int i = 0; i < 4; ++i) p(i) = rng.uniform();
        p(4) = rng.uniform(0.0, 2.0 * M_PI);
        if (!config.target_elliptic) break;
        const double twob = 2.0 * std::hypot(p(2), p(3));
        if (p(4) < 1.35 * twob + 0.3) continue;
        const double mu = std::sqrt(p(4) * p(4) - twob * twob);
        if (mu > 2.0 * M_PI - 0.35) continue;
        break;
      } while (true);
    } else {
      if (config.target_params.size() != 5)
        throw std::invalid_argument("gaussian target needs 5 parameters");
      for (int i = 0; i < 5; ++i) p(i) = config.target_params[size_t(i)];
    }
    t.true_params = p;
    t.op = gaussian_unitary(Complex(p(0), p(1)), Complex(p(2), p(3)), p(4), N);
  } else if (config.target_kind == "kerr") {
    t.kind = CompileTarget::Kind::Kerr;
    double chi = config.target_random
                     ? rng.uniform(0.05, 1.0)
                     : (config.target_params.empty() ? 1.0 : config.target_params[0]);
    t.true_params = VectorXd::Constant(1, chi);
    t.op = kerr(chi, N);
  } else if (config.target_kind == "beamsplitter") {
    t.kind = CompileTarget::Kind::Beamsplitter;
    VectorXd p(2);
    if (config.target_random) {
      p(0) = rng.uniform(0.0, 2.0 * M_PI);
      p(1) = rng.uniform(0.0, 2.0 * M_PI);
    } else {
      if (config.target_params.size() != 2)
        throw std::invalid_argument("beamsplitter target needs 2 parameters");
      p(0) = config.target_params[0];
      p(1) = config.target_params[1];
    }
    t.true_params = p;
    t.op = beamsplitter(p(0), p(1), N);
  } else if (config.target_kind == "identity") {
    t.kind = CompileTarget::Kind::Identity;
    t.true_params = VectorXd();
    t.op = Operator(HilbertSpec(N, 1), MatrixXcd::Identity(N, N));
  } else {
    throw std::invalid_argument("unknown target kind: " + config.target_kind);
  }
  return t;
}

AnsatzSpec make_ansatz(const ExperimentConfig& config) {
  AnsatzSpec spec;
  if (config.ansatz_kind == "gaussian") spec.kind = AnsatzKind::Gaussian;
  else if (config.ansatz_kind == "gaussian-factored") spec.kind = AnsatzKind::GaussianFactored;
  else if (config.ansatz_kind == "layered") spec.kind = AnsatzKind::Layered;
  else if (config.ansatz_kind == "two-mode-layered") spec.kind = AnsatzKind::TwoModeLayered;
  else throw std::invalid_argument("unknown ansatz kind: " + config.ansatz_kind);
  spec.layers = config.ansatz_layers;
  spec.cutoff = config.cutoff;
  if (config.ansatz_bounded) spec.bounds = {config.ansatz_lo, config.ansatz_hi};
  return spec;
}

void check_resources(const ExperimentConfig& config) {
  if (config.allow_large) return;
  const long long limit = 1LL << 24;
  const int m = (config.target_kind == "beamsplitter") ? 2 : 1;
  long long amps = 1;
  const CostKind kind = (config.command == Command::Compile || config.command == Command::Landscape)
                            ? parse_cost_kind(config.cost_kind)
                            : CostKind::Hst;
  int state_modes = m;
  if (kind == CostKind::LeTmss || kind == CostKind::RTmss ||
      kind == CostKind::RTmssNormalized || kind == CostKind::LeTmssLocal)
    state_modes = 2 * m;
  else if (kind == CostKind::Ecfs)
    state_modes = m + 1;
  for (int i = 0; i < state_modes; ++i) {
    amps *= config.cutoff;
    if (amps > limit)
      throw resource_refusal(
          "configuration needs more than 2^24 amplitudes; reduce the cutoff (e.g. " +
          std::to_string(int(std::floor(std::pow(double(limit), 1.0 / state_modes)))) +
          ") or pass allow_large");
  }
}

// ---------------------------------------------------------------------------
// runners
// ---------------------------------------------------------------------------

namespace {

VectorXd initial_params(const ExperimentConfig& config, const AnsatzSpec& spec,
                        RngStream& rng) {
  const int n = ansatz_param_count(spec);
  VectorXd init(n);
  if (spec.kind == AnsatzKind::Gaussian || spec.kind == AnsatzKind::GaussianFactored) {
    for (int i = 0; i < 4; ++i) init(i) = rng.uniform();
    init(4) = rng.uniform(0.0, 2.0 * M_PI);
  } else if (spec.kind == AnsatzKind::TwoModeLayered) {
    init(0) = rng.uniform(0.0, 2.0 * M_PI);
    init(1) = rng.uniform(0.0, 2.0 * M_PI);
    for (int i = 2; i < n; ++i) init(i) = rng.uniform(0.0, 0.1);
  } else {
    for (int i = 0; i < n; ++i) init(i) = rng.uniform(0.0, 0.1);
  }
  if (config.ansatz_bounded)
    for (int i = 0; i < n; ++i)
      init(i) = std::min(config.ansatz_hi, std::max(config.ansatz_lo, init(i)));
  return init;
}

OptimizerConfig optimizer_from(const ExperimentConfig& config) {
  OptimizerConfig opt;
  opt.method = (config.opt_method == "nelder-mead") ? OptMethod::SimplexDerivativeFree
                                                    : OptMethod::QuasiNewtonFiniteDifference;
  opt.max_evals = config.opt_max_evals;
  opt.f_tol = config.opt_f_tol;
  opt.fd_step = config.opt_fd_step;
  opt.cost_floor = config.opt_cost_floor;
  opt.seed = config.seed;
  return opt;
}

std::vector<std::string> record_row(const TrainRecord& rec,
                                    const std::vector<std::string>& metric_keys) {
  std::vector<std::string> row = {std::to_string(rec.iteration),
                                  std::to_string(rec.evals),
                                  std::to_string(rec.stage),
                                  fmt6(rec.r),
                                  fmt(rec.cost),
                                  fmt(rec.hst5),
                                  fmt(rec.hst50)};
  for (const auto& k : metric_keys) {
    auto it = rec.metrics.find(k);
    row.push_back(it == rec.metrics.end() ? "" : fmt(it->second));
  }
  row.push_back(fmt6(rec.wall_seconds));
  row.push_back(std::to_string(rec.seed));
  return row;
}

}  // namespace

ExperimentRecord run_compile(const ExperimentConfig& config) {
  check_resources(config);
  RngStream rng(config.seed);
  RngStream target_rng = rng.substream(1);
  RngStream train_rng = rng.substream(2);
  RngStream init_rng = rng.substream(3);
  RngStream shot_rng = rng.substream(4);

  CompileTarget target = make_target(config, target_rng);
  AnsatzSpec ansatz = make_ansatz(config);
  const CostKind kind = parse_cost_kind(config.cost_kind);

  ShotModel shot_model{config.shots, &shot_rng};
  MaybeShots shots = config.shots > 0 ? &shot_model : nullptr;

  std::vector<TrainRecord> records;
  VectorXd final_params;
  double final_cost = 0.0;
  long long total_evals = 0;

  const bool tmss_kind = kind == CostKind::LeTmss || kind == CostKind::RTmss ||
                         kind == CostKind::RTmssNormalized || kind == CostKind::LeTmssLocal;

  if (tmss_kind && config.shots == 0) {
    ScheduleConfig schedule;
    schedule.r_values = config.schedule_r;
    schedule.opt = optimizer_from(config);
    schedule.stage0_starts = config.opt_stage0_starts;
    schedule.retries = config.opt_retries;
    schedule.retry_threshold = config.opt_retry_threshold;
    schedule.init_sampler = [&config, &ansatz](RngStream& r) {
      return initial_params(config, ansatz, r);
    };
    VectorXd init = initial_params(config, ansatz, init_rng);
    ScheduledTraining st =
        train_with_r_schedule(target, ansatz, kind, schedule, init, config.seed);
    records = std::move(st.records);
    final_params = st.final_params;
    final_cost = st.final_cost;
    total_evals = st.total_evals;
  } else {
    // single-stage training (ACS / ECFS / shot-noise runs)
    const int m = target.op.spec.modes;
    TrainingSet training;
    if (kind == CostKind::Acs || kind == CostKind::AcsLocal)
      training = sample_coherent_training(m, config.cost_energy, config.cost_k,
                                          config.cutoff, train_rng);
    else if (kind == CostKind::Ecfs)
      training = sample_ecfs_training(m, config.cost_energy, config.cost_rank,
                                      config.cost_k, config.cutoff, train_rng);

    auto objective = [&](const VectorXd& theta) {
      Operator v = build_ansatz(ansatz, theta);
      switch (kind) {
        case CostKind::Hst: return hst_truncated(target.op, v, config.cost_d);
        case CostKind::LeTmss: return le_tmss_cost(target.op, v, config.cost_r, shots);
        case CostKind::RTmss: return r_tmss_cost(target.op, v, config.cost_r, shots);
        case CostKind::RTmssNormalized:
          return r_tmss_normalized(target.op, v, config.cost_r);
        case CostKind::LeTmssLocal:
          return le_tmss_local_cost(target.op, v, config.cost_r, shots);
        case CostKind::Acs: return acs_cost(target.op, v, training, shots);
        case CostKind::AcsLocal: return acs_local_cost(target.op, v, training, shots);
        case CostKind::Ecfs: return ecfs_cost(target.op, v, training, shots);
      }
      throw std::logic_error("unreachable");
    };

    long long iteration = 0;
    const auto t0 = std::chrono::steady_clock::now();
    auto observer = [&](long long evals, const VectorXd& theta, double value) {
      TrainRecord rec;
      rec.iteration = iteration++;
      rec.evals = evals;
      rec.stage = 0;
      rec.r = 0.0;
      rec.cost = value;
      rec.metrics = diagnostics(ansatz, theta, target);
      rec.hst5 = rec.metrics["hst5"];
      rec.hst50 = rec.metrics["hst50"];
      rec.metrics.erase("hst5");
      rec.metrics.erase("hst50");
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rec.seed = config.seed;
      records.push_back(std::move(rec));
    };

    std::optional<BoxBounds> box;
    if (ansatz.bounds) {
      const int n = ansatz_param_count(ansatz);
      box = BoxBounds{VectorXd::Constant(n, ansatz.bounds->first),
                      VectorXd::Constant(n, ansatz.bounds->second)};
    }
    VectorXd init = initial_params(config, ansatz, init_rng);
    const int starts = std::max(1, config.opt_stage0_starts * (config.opt_retries + 1));
    MinimizeResult best;
    best.best_value = std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s) {
      VectorXd begin = (s == 0) ? init : initial_params(config, ansatz, init_rng);
      MinimizeResult mr = minimize(objective, begin, optimizer_from(config),
                                   box ? &*box : nullptr, observer);
      total_evals += mr.evals;
      if (mr.best_value < best.best_value) best = std::move(mr);
      if (best.best_value <= config.opt_retry_threshold) break;
    }
    final_params = best.best_params;
    final_cost = best.best_value;
  }

  std::vector<std::string> metric_keys;
  if (!records.empty())
    for (const auto& [k, v] : records.front().metrics) metric_keys.push_back(k);

  ExperimentRecord rec;
  rec.config = config;
  rec.columns = {"iteration", "evals", "stage", "r", "cost", "hst5", "hst50"};
  for (const auto& k : metric_keys) rec.columns.push_back(k);
  rec.columns.push_back("wall_seconds");
  rec.columns.push_back("seed");
  for (const auto& r : records) rec.rows.push_back(record_row(r, metric_keys));

  // summary row: final state
  TrainRecord last;
  last.iteration = records.empty() ? 0 : records.back().iteration + 1;
  last.evals = total_evals;
  last.stage = records.empty() ? 0 : records.back().stage;
  last.r = config.schedule_r.empty() ? 0.0 : config.schedule_r.back();
  last.cost = final_cost;
  last.metrics = diagnostics(ansatz, final_params, target);
  last.hst5 = last.metrics["hst5"];
  last.hst50 = last.metrics["hst50"];
  last.metrics.erase("hst5");
  last.metrics.erase("hst50");
  last.seed = config.seed;
  last.wall_seconds = records.empty() ? 0.0 : records.back().wall_seconds;
  if (!tmss_kind || config.shots != 0) last.r = 0.0;
  rec.rows.push_back(record_row(last, metric_keys));
  return rec;
}

ExperimentRecord run_nfl(const ExperimentConfig& config) {
  check_resources(config);
  ExperimentRecord rec;
  rec.config = config;
  rec.columns = {"experiment", "m",      "set_size",      "rank", "kind",
                 "d_max",      "n_samples", "mc_mean",    "mc_stderr", "theory",
                 "theory_finite", "tolerance", "pass",    "skipped"};
  RngStream rng(config.seed);
  std::uint64_t cell = 0;

  auto emit = [&](const std::string& exp, int m, int s, int rank, MapKind kind) {
    RngStream sub = rng.substream(cell++);
    std::vector<std::string> row(rec.columns.size());
    row[0] = exp;
    row[1] = std::to_string(m);
    row[2] = std::to_string(s);
    row[3] = std::to_string(rank);
    row[4] = kind == MapKind::Orthogonal ? "orthogonal" : "symplectic";
    row[5] = "";
    if (rank * s > 2 * m) {
      row[13] = "1";
      rec.rows.push_back(row);
      return;
    }
    RiskEstimate est = expected_risk_mc(m, s, rank, kind, config.nfl_samples, sub);
    const double tol = std::max(3.0 * est.stderr_, 0.01);
    row[6] = std::to_string(est.n_samples);
    row[7] = fmt(est.mean);
    row[8] = fmt(est.stderr_);
    row[9] = fmt(est.theory);
    row[10] = fmt(est.theory);
    row[11] = fmt(tol);
    row[12] = std::abs(est.mean - est.theory) <= tol ? "1" : "0";
    row[13] = "0";
    rec.rows.push_back(row);
  };

  const std::string exp = config.nfl_experiment;
  if (exp == "thm1") {
    for (int m = 1; m <= 3; ++m)
      for (int s = 0; s <= 2 * m; ++s) emit(exp, m, s, 1, MapKind::Orthogonal);
  } else if (exp == "thm2") {
    // the s = 3 cell at (m = 2, rank = 2) is infeasible and demonstrates
    // the skipped-row contract
    for (int s = 0; s <= 3; ++s) emit(exp, 2, s, 2, MapKind::Orthogonal);
    for (int s = 0; s <= 3; ++s) emit(exp, 3, s, 2, MapKind::Orthogonal);
    for (int s = 0; s <= 2; ++s) emit(exp, 3, s, 3, MapKind::Orthogonal);
  } else if (exp == "cor1") {
    for (int m = 1; m <= 3; ++m)
      for (int s = 0; s <= 2 * m; s += 2) emit(exp, m, s, 1, MapKind::Symplectic);
  } else if (exp == "appd") {
    const int m = 10;
    const double dmax = config.nfl_d_max;
    for (int s : {0, 2, 4}) {
      RngStream sub = rng.substream(cell++);
      double sum = 0.0, sum2 = 0.0;
      for (long long i = 0; i < config.nfl_samples; ++i) {
        PhaseSpaceMap target = haar_orthogonal(2 * m, sub);
        PhaseSpaceMap learner = block_perfect_learner(target, s, sub);
        const double r = covariance_risk_mc(target.mat, learner.mat, dmax, m,
                                            config.nfl_sigma_samples, sub);
        sum += r;
        sum2 += r * r;
      }
      const double mean = sum / double(config.nfl_samples);
      const double var = std::max(0.0, sum2 / double(config.nfl_samples) - mean * mean);
      const double se = std::sqrt(var / double(config.nfl_samples));
      const double theory = expected_covariance_risk(m, s, dmax);
      const double fin = expected_covariance_risk_finite(m, s, dmax);
      const double tol = 3.0 * se + 10.0 / double(m * m);
      std::vector<std::string> row = {exp,
                                      std::to_string(m),
                                      std::to_string(s),
                                      "1",
                                      "orthogonal",
                                      fmt6(dmax),
                                      std::to_string(config.nfl_samples),
                                      fmt(mean),
                                      fmt(se),
                                      fmt(theory),
                                      fmt(fin),
                                      fmt(tol),
                                      std::abs(mean - theory) <= tol ? "1" : "0",
                                      "0"};
      rec.rows.push_back(row);
    }
    // |S|^2 scaling identity of the closed form
    const double lhs = expected_covariance_risk(m, 2, dmax) - expected_covariance_risk(m, 0, dmax);
    const double dd = dmax - 1.0 / dmax;
    const double rhs = -dd * dd * 4.0 / (8.0 * m * std::log(dmax) * std::log(dmax));
    std::vector<std::string> row = {"appd-s2-scaling", std::to_string(m), "2", "1",
                                    "orthogonal", fmt6(dmax), "0", fmt(lhs), "0",
                                    fmt(rhs), fmt(rhs), "1e-12",
                                    std::abs(lhs - rhs) <= 1e-12 ? "1" : "0", "0"};
    rec.rows.push_back(row);
  } else {
    throw std::invalid_argument("unknown nfl experiment: " + exp);
  }
  return rec;
}

ExperimentRecord run_landscape(const ExperimentConfig& config) {
  check_resources(config);
  ExperimentRecord rec;
  rec.config = config;
  rec.columns = {"section", "r", "eps", "sample", "cost",
                 "m",       "mc_mean", "mc_stderr", "analytic", "analytic_local"};
  RngStream rng(config.seed);
  RngStream target_rng = rng.substream(1);

  CompileTarget target = make_target(config, target_rng);
  AnsatzSpec ansatz = make_ansatz(config);
  const CostKind kind = parse_cost_kind(config.cost_kind);

  // exact representation of the target inside the ansatz family
  VectorXd theta_opt;
  if (ansatz.kind == AnsatzKind::Gaussian && target.kind == CompileTarget::Kind::Gaussian) {
    theta_opt = target.true_params;
  } else if (ansatz.kind == AnsatzKind::Layered && target.kind == CompileTarget::Kind::Kerr) {
    theta_opt = VectorXd::Zero(6 * ansatz.layers);
    for (int l = 0; l < ansatz.layers; ++l)
      theta_opt(6 * l + 5) = target.true_params(0) / ansatz.layers;
  } else if (ansatz.kind == AnsatzKind::TwoModeLayered &&
             target.kind == CompileTarget::Kind::Beamsplitter) {
    theta_opt = VectorXd::Zero(14);
    theta_opt(0) = target.true_params(0);
    theta_opt(1) = target.true_params(1);
  } else {
    throw std::invalid_argument("run_landscape: ansatz family does not contain the target");
  }

  VectorXd eps(int(config.landscape_eps.size()));
  for (size_t i = 0; i < config.landscape_eps.size(); ++i) eps(int(i)) = config.landscape_eps[i];

  for (size_t ri = 0; ri < config.landscape_r.size(); ++ri) {
    const double r = config.landscape_r[ri];
    auto cost = [&](const VectorXd& theta) {
      Operator v = build_ansatz(ansatz, theta);
      switch (kind) {
        case CostKind::LeTmss: return le_tmss_cost(target.op, v, r);
        case CostKind::RTmss: return r_tmss_cost(target.op, v, r);
        case CostKind::LeTmssLocal: return le_tmss_local_cost(target.op, v, r);
        default:
          throw std::invalid_argument("run_landscape: cost kind must be a TMSS kind");
      }
    };
    LandscapeScan scan = landscape_scan(cost, theta_opt, eps, config.landscape_samples,
                                        config.seed + ri);
    for (int s = 0; s < scan.samples_per_eps; ++s)
      for (Eigen::Index e = 0; e < scan.eps_grid.size(); ++e)
        rec.rows.push_back({"scan", fmt6(r), fmt6(scan.eps_grid(e)), std::to_string(s),
                            fmt(scan.costs(s, e)), "", "", "", "", ""});
  }

  // gradient-expectation table on the closed-form phase-gate cost
  RngStream grad_rng = rng.substream(2);
  const double r = config.cost_r;
  for (int m = 1; m <= config.landscape_m_max; ++m) {
    RngStream sub = grad_rng.substream(std::uint64_t(m));
    auto cost = [&](const VectorXd& phis) { return analytic_phase_cost(phis, r); };
    auto [mean, se] = grad_magnitude_mc(cost, m, config.landscape_grad_samples, 1e-5, sub);
    rec.rows.push_back({"grad", fmt6(r), "", "", "", std::to_string(m), fmt(mean), fmt(se),
                        fmt(analytic_grad_expectation(r, m)),
                        fmt(analytic_local_grad_expectation(r, m))});
  }
  return rec;
}

ExperimentRecord run_verify(const ExperimentConfig& config) {
  ExperimentRecord rec;
  rec.config = config;
  rec.columns = {"check", "p1", "p2", "value", "reference", "tolerance", "pass"};
  RngStream rng(config.seed);

  auto emit = [&](const std::string& check, const std::string& p1, const std::string& p2,
                  double value, double reference, double tol) {
    rec.rows.push_back({check, p1, p2, fmt(value), fmt(reference), fmt(tol),
                        std::abs(value - reference) <= tol ? "1" : "0"});
  };

  // appA: expected inner-product modulus over Haar U(rank) against the
  // rank-truncated TMSS weights
  {
    RngStream sub = rng.substream(10);
    const long long n = 10000;
    for (int rank : {2, 4, 8}) {
      for (double r : {0.5, 1.0, 2.0}) {
        const double t = std::tanh(r);
        double pref = (1.0 - t * t) / (1.0 - std::pow(t, 2.0 * rank));
        double sum = 0.0, sum2 = 0.0;
        for (long long i = 0; i < n; ++i) {
          MatrixXcd v = haar_unitary_matrix(rank, sub);
          double x = 0.0;
          for (int a = 0; a < rank; ++a)
            for (int b = 0; b < rank; ++b)
              x += std::pow(t, a + b) * std::norm(v(a, b));
          x *= pref;
          sum += x;
          sum2 += x * x;
        }
        const double mean = sum / n;
        const double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n);
        const double closed = (1.0 / rank) * (1.0 + t) / (1.0 + std::pow(t, rank)) *
                              (1.0 - std::pow(t, rank)) / (1.0 - t);
        emit("appA", std::to_string(rank), fmt6(r), mean, closed, 0.02 * closed + 3.0 * se);
      }
    }
    // r -> infinity limit at rank 2
    {
      const int rank = 2;
      const double r = 6.0;
      const double t = std::tanh(r);
      double pref = (1.0 - t * t) / (1.0 - std::pow(t, 2.0 * rank));
      double sum = 0.0, sum2 = 0.0;
      for (long long i = 0; i < n; ++i) {
        MatrixXcd v = haar_unitary_matrix(rank, sub);
        double x = 0.0;
        for (int a = 0; a < rank; ++a)
          for (int b = 0; b < rank; ++b) x += std::pow(t, a + b) * std::norm(v(a, b));
        sum += pref * x;
        sum2 += pref * x * pref * x;
      }
      const double mean = sum / n;
      const double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n);
      emit("appA-limit", std::to_string(rank), fmt6(r), mean, 1.0,
           2.0 * (rank - 1) * std::exp(-2.0 * r) + 3.0 * se);
    }
  }

  // appB: thermal inner product vs TMSS sandwich; normalized-cost faithfulness
  {
    RngStream sub = rng.substream(20);
    const int N = 20;
    const double r = 0.5;
    double max_dev = 0.0;
    for (int i = 0; i < 20; ++i) {
      Operator u(HilbertSpec(N, 1), haar_unitary_matrix(N, sub));
      Operator v(HilbertSpec(N, 1), haar_unitary_matrix(N, sub));
      Complex lhs = gce_inner_product(u, v, r);
      Complex rhs = tmss_sandwich(u, Operator(v.spec, v.mat.conjugate()), r);
      max_dev = std::max(max_dev, std::abs(lhs - rhs));
    }
    emit("appB-identity", "20", fmt6(r), max_dev, 0.0, 1e-8);

    double worst_zero = 0.0;
    double worst_perturbed = 1.0;
    for (int i = 0; i < 20; ++i) {
      Operator u(HilbertSpec(N, 1), haar_unitary_matrix(N, sub));
      const double phase = sub.uniform(0.0, 2.0 * M_PI);
      Operator v_same(u.spec, std::exp(Complex(0.0, phase)) * u.mat);
      worst_zero = std::max(worst_zero, r_tmss_normalized(u, v_same, r));
      MatrixXcd h(N, N);
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) h(a, b) = Complex(sub.normal(), sub.normal());
      h = ((h + h.adjoint()) / 2.0).eval();
      h /= h.norm();
      Operator pert = matrix_exponential_unitary(Operator(u.spec, 0.2 * h));
      Operator v_p(u.spec, u.mat * pert.mat);
      worst_perturbed = std::min(worst_perturbed, r_tmss_normalized(u, v_p, r));
    }
    emit("appB-faithful-zero", "20", fmt6(r), worst_zero, 0.0, 1e-10);
    rec.rows.push_back({"appB-faithful-floor", "20", fmt6(r), fmt(worst_perturbed), "1e-4",
                        "", worst_perturbed >= 1e-4 ? "1" : "0"});
  }

  // appD: degree-2 conjugation moments over Orth(6)
  {
    RngStream sub = rng.substream(30);
    const int m = 3;
    MatrixXd eye = MatrixXd::Identity(2 * m, 2 * m);
    auto [ii_mc, ij_mc] = lemma1_mc(eye, 0, 1, 20000, sub);
    emit("appD-lemma-ii", "I", std::to_string(m), ii_mc, orth_moment_diag(eye), 1e-12);
    emit("appD-lemma-ij", "I", std::to_string(m), ij_mc, orth_moment_offdiag(eye), 1e-12);
    MatrixXd l = haar_orthogonal_matrix(2 * m, sub);
    auto [ii2, ij2] = lemma1_mc(l, 0, 1, 100000, sub);
    emit("appD-lemma-ii", "randO", std::to_string(m), ii2, orth_moment_diag(l),
         0.01 * orth_moment_diag(l));
    emit("appD-lemma-ij", "randO", std::to_string(m), ij2, orth_moment_offdiag(l),
         0.01 * orth_moment_offdiag(l));
  }
  return rec;
}

ExperimentRecord run(const ExperimentConfig& config) {
  switch (config.command) {
    case Command::Compile: return run_compile(config);
    case Command::Nfl: return run_nfl(config);
    case Command::Landscape: return run_landscape(config);
    case Command::Verify: return run_verify(config);
  }
  throw std::logic_error("unreachable");
}

}  // namespace cvc
