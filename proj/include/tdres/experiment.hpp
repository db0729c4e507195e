#pragma once

// Declarative experiment runner: strict JSON configs, the built-in recipe
// catalog and the run manifest.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdres/anneal.hpp"
#include "tdres/core.hpp"
#include "tdres/errors.hpp"
#include "tdres/io.hpp"
#include "tdres/multilevel.hpp"
#include "tdres/optctl.hpp"
#include "tdres/resonance.hpp"
#include "tdres/stokes.hpp"

namespace tdres::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;
inline constexpr const char* kOutputEnv = "TDRES_OUTPUT_DIR";

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Strict field access

class Fields {
 public:
  Fields(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw InvalidArgument(prefix_.empty() ? "config" : prefix_, "must be a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  double number(const std::string& key, std::optional<double> fallback = {}) {
    if (!has(key)) return require_default(key, fallback);
    const json& v = j_.at(key);
    if (!v.is_number()) throw InvalidArgument(name(key), "must be a number");
    return v.get<double>();
  }

  long long integer(const std::string& key, std::optional<long long> fallback = {}) {
    if (!has(key)) return require_default(key, fallback);
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw InvalidArgument(name(key), "must be an integer");
    return v.get<long long>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = {}) {
    if (!has(key)) return require_default(key, fallback);
    const json& v = j_.at(key);
    if (!v.is_string()) throw InvalidArgument(name(key), "must be a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, std::optional<bool> fallback = {}) {
    if (!has(key)) return require_default(key, fallback);
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw InvalidArgument(name(key), "must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = {}) {
    if (!has(key)) return require_default(key, fallback);
    const json& v = j_.at(key);
    if (!v.is_array()) throw InvalidArgument(name(key), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw InvalidArgument(name(key), "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<long long> integers(const std::string& key, std::optional<std::vector<long long>> fallback = {}) {
    if (!has(key)) return require_default(key, fallback);
    const json& v = j_.at(key);
    if (!v.is_array()) throw InvalidArgument(name(key), "must be an array of integers");
    std::vector<long long> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw InvalidArgument(name(key), "must be an array of integers");
      out.push_back(e.get<long long>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key, std::optional<std::vector<std::string>> fallback = {}) {
    if (!has(key)) return require_default(key, fallback);
    const json& v = j_.at(key);
    if (!v.is_array()) throw InvalidArgument(name(key), "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw InvalidArgument(name(key), "must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  RealMatrix matrix(const std::string& key) {
    if (!has(key)) throw InvalidArgument(name(key), "required field missing");
    const json& v = j_.at(key);
    const auto bad = [&] { return InvalidArgument(name(key), "must be a square array of number rows"); };
    if (!v.is_array() || v.empty()) throw bad();
    const auto rows = static_cast<Eigen::Index>(v.size());
    RealMatrix m(rows, rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const json& row = v[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) throw bad();
      for (Eigen::Index c = 0; c < rows; ++c) {
        const json& e = row[static_cast<std::size_t>(c)];
        if (!e.is_number()) throw bad();
        m(r, c) = e.get<double>();
      }
    }
    return m;
  }

  Fields object(const std::string& key) {
    static const json empty = json::object();
    if (!has(key)) return Fields(empty, name(key));
    return Fields(j_.at(key), name(key));
  }

  /// Rejects every key that was never asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw InvalidArgument(name(it.key()), "unknown field");
  }

  std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

 private:
  template <class T>
  T require_default(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) throw InvalidArgument(name(key), "required field missing");
    return *fallback;
  }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& field, const std::string& detail) {
  if (!ok) throw InvalidArgument(field, detail);
}

inline int odd_power(long long n, const std::string& field) {
  require(n >= 1 && n % 2 == 1 && n <= 15, field, "must be an odd integer in [1, 15]");
  return static_cast<int>(n);
}

inline std::size_t count(long long v, const std::string& field, long long lo, long long hi) {
  require(v >= lo && v <= hi, field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<std::size_t>(v);
}

inline double positive(double v, const std::string& field) {
  require(v > 0.0 && std::isfinite(v), field, "must be a finite positive number");
  return v;
}

struct Integrator {
  double energy_factor = 0.1;
  double max_step = 0.1;

  static Integrator parse(Fields& f) {
    Integrator i;
    i.energy_factor = positive(f.number("energy_factor", 0.1), f.name("energy_factor"));
    i.max_step = positive(f.number("max_step", 0.1), f.name("max_step"));
    return i;
  }

  StepControl control() const {
    StepControl c;
    c.energy_factor = energy_factor;
    c.max_step = max_step;
    return c;
  }
};

struct Optimizer {
  OptimizerConfig config;

  static Optimizer parse(Fields& f) {
    Optimizer o;
    o.config.max_iterations = count(f.integer("max_iterations", 10000), f.name("max_iterations"), 1, 10000000);
    o.config.gradient_tolerance = positive(f.number("gradient_tolerance", 1e-6), f.name("gradient_tolerance"));
    o.config.initial_step = f.number("initial_step", 0.0);
    require(o.config.initial_step >= 0.0, f.name("initial_step"), "must be >= 0 (0 selects the automatic step)");
    const double bt = f.number("backtracking", 0.5);
    require(bt > 0.0 && bt < 1.0, f.name("backtracking"), "must lie in (0, 1)");
    o.config.backtracking = bt;
    f.finish();
    return o;
  }
};

// ---------------------------------------------------------------------------
// Experiment configurations

struct SimulateConfig {
  ModelParams params;
  std::string drive = "none";
  std::optional<std::vector<double>> alphas;
  double alpha_scale = 1.0;
  std::optional<double> amplitude;
  std::optional<double> omega_tilde;
  std::size_t samples = 1001;
  Integrator integrator;
};

struct StokesConfig {
  std::string model = "sweep";
  std::vector<int> n_values{1};
  double delta_tilde = 1.0;
  double tau0 = -5.0;
  double tauf = 5.0;
  double dbar_x = 10.0;
  double dbar_z = 10.0;
  double refine = 1.0;
};

struct SweepConfig {
  ModelParams params;
  int sweep_index = 0;
  double alpha_min = 0.0;
  double alpha_max = 0.3;
  std::size_t points = 31;
  std::string others = "optimal";
  Integrator integrator;
};

struct HarmonicConfig {
  double delta_min = 1.0;
  double delta_max = 2.0;
  std::size_t points = 11;
  double omega_factor = 2.0;
  double window = 1e4;
};

struct OptimizeConfig {
  int n = 1;
  std::vector<double> deltas{0.5};
  double tau0 = -5.0;
  double tauf = 5.0;
  std::size_t intervals = 2000;
  std::optional<double> u_minus;
  std::optional<double> u_plus;
  Optimizer optimizer;
};

struct AnnealConfig {
  std::vector<int> n_values{1};
  std::vector<double> dbar_x{10.0};
  std::vector<double> dbar_z{10.0};
  std::vector<std::string> stages{"energy", "stokes", "fit"};
  std::size_t intervals = 2000;
  std::size_t samples = 401;
  double lower = 0.0;
  double upper = 1.0;
  FreeAmplitudeSource free_source = FreeAmplitudeSource::propagated;
  Optimizer optimizer;

  bool stage(const std::string& s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }
};

struct MultilevelConfig {
  std::string preset = "reference";
  RealMatrix hx;
  RealMatrix hprob;
  double dbar_x = 8.0;
  double dbar_z = 8.0;
  std::size_t intervals = 2000;
  std::size_t samples = 401;
  MultiFreeSource free_source = MultiFreeSource::propagated;
  std::optional<std::pair<double, double>> alpha_xi;

  MultiLevelSpec spec() const {
    if (preset == "reference") return reference_three_level(dbar_x, dbar_z);
    if (preset == "two-level") return two_level_spec(dbar_x, dbar_z);
    return {hx, hprob, dbar_x, dbar_z};
  }
};

using ExperimentParams = std::variant<SimulateConfig, StokesConfig, SweepConfig, HarmonicConfig, OptimizeConfig,
                                      AnnealConfig, MultilevelConfig>;

struct ExperimentConfig {
  std::string experiment;
  std::string description;
  std::optional<std::string> output_dir;
  long long seed = 0;
  int format_version = kFormatVersion;
  ExperimentParams params;
  /// The parsed document, for hashing and the manifest.
  json source;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"simulate", "stokes",  "resonance-sweep", "harmonic-compare",
                                              "optimize", "fit",     "anneal",          "multilevel"};
  return names;
}

namespace detail {

inline ModelParams sweep_params(Fields& f, double default_tauf) {
  ModelParams p;
  p.n = odd_power(f.integer("n", 1), "n");
  p.delta_tilde = f.number("delta_tilde");
  p.tauf = f.number("tauf", default_tauf);
  p.tau0 = f.number("tau0", -p.tauf);
  p.validate();
  return p;
}

inline std::vector<int> odd_powers(Fields& f, const std::string& key) {
  std::vector<int> out;
  for (long long n : f.integers(key, std::vector<long long>{1})) out.push_back(odd_power(n, key));
  require(!out.empty(), key, "must not be empty");
  return out;
}

inline SimulateConfig parse_simulate(Fields& f) {
  SimulateConfig c;
  c.params = sweep_params(f, 100.0);
  c.drive = f.string("drive", "none");
  require(c.drive == "none" || c.drive == "resonance" || c.drive == "harmonic", "drive",
          "must be one of none, resonance, harmonic");
  if (f.has("alphas")) c.alphas = f.numbers("alphas");
  c.alpha_scale = f.number("alpha_scale", 1.0);
  if (f.has("amplitude")) c.amplitude = f.number("amplitude");
  if (f.has("omega_tilde")) c.omega_tilde = positive(f.number("omega_tilde"), "omega_tilde");
  require(c.drive == "resonance" || (!c.alphas && c.alpha_scale == 1.0), "alphas",
          "only meaningful with drive = resonance");
  require(c.drive == "harmonic" || (!c.amplitude && !c.omega_tilde), "amplitude",
          "only meaningful with drive = harmonic");
  require(c.drive != "harmonic" || c.params.n == 1, "n", "the harmonic drive is defined for n = 1");
  c.samples = count(f.integer("samples", 1001), "samples", 2, 1000000);
  auto integ = f.object("integrator");
  c.integrator = Integrator::parse(integ);
  integ.finish();
  return c;
}

inline StokesConfig parse_stokes(Fields& f) {
  StokesConfig c;
  c.model = f.string("model", "sweep");
  require(c.model == "sweep" || c.model == "anneal", "model", "must be sweep or anneal");
  c.n_values = odd_powers(f, "n_values");
  if (c.model == "sweep") {
    c.delta_tilde = f.number("delta_tilde");
    c.tauf = f.number("tauf", 5.0);
    c.tau0 = f.number("tau0", -c.tauf);
    for (int n : c.n_values) ModelParams{n, c.delta_tilde, c.tau0, c.tauf}.validate();
  } else {
    c.dbar_x = f.number("dbar_x");
    c.dbar_z = f.number("dbar_z");
    for (int n : c.n_values) AnnealSpec{n, c.dbar_x, c.dbar_z}.validate();
  }
  c.refine = f.number("refine", 1.0);
  require(c.refine >= 1.0 && c.refine <= 100.0, "refine", "must lie in [1, 100]");
  return c;
}

inline SweepConfig parse_sweep(Fields& f) {
  SweepConfig c;
  c.params = sweep_params(f, 100.0);
  c.sweep_index = static_cast<int>(f.integer("sweep_index", 0));
  require(c.sweep_index >= 0 && c.sweep_index < c.params.n, "sweep_index", "must lie in [0, n)");
  c.alpha_min = f.number("alpha_min", 0.0);
  c.alpha_max = f.number("alpha_max");
  require(c.alpha_min < c.alpha_max, "alpha_max", "must exceed alpha_min");
  c.points = count(f.integer("points", 31), "points", 2, 100000);
  c.others = f.string("others", "optimal");
  require(c.others == "optimal" || c.others == "zero", "others", "must be optimal or zero");
  auto integ = f.object("integrator");
  c.integrator = Integrator::parse(integ);
  integ.finish();
  return c;
}

inline HarmonicConfig parse_harmonic(Fields& f) {
  HarmonicConfig c;
  c.delta_min = positive(f.number("delta_min"), "delta_min");
  c.delta_max = positive(f.number("delta_max"), "delta_max");
  require(c.delta_min <= c.delta_max, "delta_max", "must be >= delta_min");
  c.points = count(f.integer("points", 11), "points", 1, 100000);
  c.omega_factor = positive(f.number("omega_factor", 2.0), "omega_factor");
  c.window = positive(f.number("window", 1e4), "window");
  return c;
}

inline OptimizeConfig parse_optimize(Fields& f, bool sweep) {
  OptimizeConfig c;
  c.n = odd_power(f.integer("n", 1), "n");
  if (sweep) {
    c.deltas = f.numbers("deltas");
    require(!c.deltas.empty(), "deltas", "must not be empty");
  } else {
    c.deltas = {f.number("delta_tilde")};
  }
  c.tauf = f.number("tauf", 5.0);
  c.tau0 = f.number("tau0", -c.tauf);
  for (double d : c.deltas) {
    require(d > 0.0 && std::isfinite(d), sweep ? "deltas" : "delta_tilde", "must be a finite positive number");
    ModelParams{c.n, d, c.tau0, c.tauf}.validate();
  }
  c.intervals = count(f.integer("intervals", 2000), "intervals", 4, 1000000);
  if (f.has("u_minus")) c.u_minus = f.number("u_minus");
  if (f.has("u_plus")) c.u_plus = f.number("u_plus");
  const double um = c.u_minus.value_or(-ipow(c.tauf, c.n));
  const double up = c.u_plus.value_or(ipow(c.tauf, c.n));
  require(um < up, "u_plus", "must exceed u_minus");
  auto opt = f.object("optimizer");
  c.optimizer = Optimizer::parse(opt);
  return c;
}

inline AnnealConfig parse_anneal(Fields& f) {
  AnnealConfig c;
  c.n_values = odd_powers(f, "n_values");
  c.dbar_x = f.numbers("dbar_x");
  c.dbar_z = f.numbers("dbar_z");
  require(!c.dbar_z.empty(), "dbar_z", "must not be empty");
  require(c.dbar_x.size() == c.dbar_z.size(), "dbar_x", "must have the same length as dbar_z");
  for (std::size_t i = 0; i < c.dbar_x.size(); ++i) {
    positive(c.dbar_x[i], "dbar_x");
    positive(c.dbar_z[i], "dbar_z");
  }
  c.stages = f.strings("stages", std::vector<std::string>{"energy", "stokes", "fit"});
  require(!c.stages.empty(), "stages", "must not be empty");
  for (const auto& s : c.stages)
    require(s == "energy" || s == "stokes" || s == "fit", "stages", "unknown stage '" + s + "'");
  c.intervals = count(f.integer("intervals", 2000), "intervals", 4, 1000000);
  c.samples = count(f.integer("samples", 401), "samples", 2, 1000000);
  c.lower = f.number("lower", 0.0);
  c.upper = f.number("upper", 1.0);
  require(c.lower <= 0.0 && c.upper >= 1.0, "lower", "bounds must contain the schedule range [0, 1]");
  const std::string src = f.string("free_source", "propagated");
  require(src == "propagated" || src == "wkb", "free_source", "must be propagated or wkb");
  c.free_source = src == "wkb" ? FreeAmplitudeSource::wkb : FreeAmplitudeSource::propagated;
  auto opt = f.object("optimizer");
  c.optimizer = Optimizer::parse(opt);
  return c;
}

inline MultilevelConfig parse_multilevel(Fields& f) {
  MultilevelConfig c;
  c.preset = f.string("preset", "reference");
  require(c.preset == "reference" || c.preset == "two-level" || c.preset == "custom", "preset",
          "must be reference, two-level or custom");
  if (c.preset == "custom") {
    c.hx = f.matrix("hx");
    c.hprob = f.matrix("hprob");
  } else {
    require(!f.has("hx") && !f.has("hprob"), "hx", "only allowed with preset = custom");
  }
  c.dbar_x = f.number("dbar_x", 8.0);
  c.dbar_z = f.number("dbar_z", 8.0);
  c.intervals = count(f.integer("intervals", 2000), "intervals", 16, 1000000);
  c.samples = count(f.integer("samples", 401), "samples", 2, 1000000);
  const std::string src = f.string("free_source", "propagated");
  require(src == "propagated" || src == "wkb", "free_source", "must be propagated or wkb");
  c.free_source = src == "wkb" ? MultiFreeSource::wkb : MultiFreeSource::propagated;
  const bool ha = f.has("alpha");
  const bool hxi = f.has("xi");
  require(ha == hxi, ha ? "xi" : "alpha", "alpha and xi must be given together");
  if (ha) c.alpha_xi = std::make_pair(f.number("alpha"), f.number("xi"));
  c.spec().validate();
  return c;
}

}  // namespace detail

/// Parses and validates a config document. Throws InvalidArgument naming the
/// offending field.
inline ExperimentConfig parse_config(const json& j) {
  Fields f(j, "");
  ExperimentConfig c;
  c.source = j;
  require(f.has("format_version"), "format_version", "required field missing");
  const long long fv = f.integer("format_version");
  require(fv == kFormatVersion, "format_version", "unsupported version " + std::to_string(fv) + " (expected 1)");
  c.experiment = f.string("experiment");
  const auto& names = experiment_names();
  require(std::find(names.begin(), names.end(), c.experiment) != names.end(), "experiment",
          "unknown experiment '" + c.experiment + "'");
  c.description = f.string("description", "");
  if (f.has("output_dir")) c.output_dir = f.string("output_dir");
  c.seed = f.integer("seed", 0);
  if (c.experiment == "simulate") c.params = detail::parse_simulate(f);
  else if (c.experiment == "stokes") c.params = detail::parse_stokes(f);
  else if (c.experiment == "resonance-sweep") c.params = detail::parse_sweep(f);
  else if (c.experiment == "harmonic-compare") c.params = detail::parse_harmonic(f);
  else if (c.experiment == "optimize") c.params = detail::parse_optimize(f, false);
  else if (c.experiment == "fit") c.params = detail::parse_optimize(f, true);
  else if (c.experiment == "anneal") c.params = detail::parse_anneal(f);
  else c.params = detail::parse_multilevel(f);
  f.finish();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("config", "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

/// 64-bit FNV-1a over the canonical (sorted-key, compact) serialization.
inline std::string config_hash(const json& j) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Execution

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Results must be
/// stored by index; the first failing index (lowest) is rethrown.
inline void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::exception_ptr> errors(count);
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  void csv(const std::string& rel, const io::CsvTable& t) {
    t.write(dir_ / rel);
    add(rel);
  }
  void json_file(const std::string& rel, const json& j) {
    io::write_json(dir_ / rel, j);
    add(rel);
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  void add(const std::string& rel) {
    std::lock_guard<std::mutex> lock(mu_);
    files_.push_back(rel);
  }
  std::filesystem::path dir_;
  std::vector<std::string> files_;
  std::mutex mu_;
};

struct RunOptions {
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> output_dir;
};

struct RunManifest {
  std::string config_hash;
  std::string tool_version = kVersion;
  double wall_time = 0.0;
  std::vector<std::string> files;
  std::filesystem::path output_dir;
};

namespace detail {

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? a : (i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

inline std::string tag(const std::string& base, std::size_t i) { return base + "_" + std::to_string(i); }

inline double numeric_pe(const ModelParams& p, const ControlFunction& u, const StepControl& ctrl) {
  const QuantumState init = ground_state(u(p.tau0), p.delta_tilde, p.tau0);
  const Trajectory tr = propagate(u, p.delta_tilde, init, p.tau0, p.tauf, ctrl);
  return transition_probability(tr.back(), eigenframe(u(p.tauf), p.delta_tilde));
}

inline void run_simulate(const SimulateConfig& c, OutputSet& out) {
  const ModelParams& p = c.params;
  ControlFunction u{[n = p.n](double t) { return ipow(t, n); }, "tau^n"};
  json summary{{"drive", c.drive}};
  if (c.drive == "resonance") {
    const StokesGeometry g = stokes_geometry(p);
    std::vector<double> a = c.alphas.value_or(optimal_amplitudes(p, g));
    require(a.size() == g.crossings.size(), "alphas",
            "expected " + std::to_string(g.crossings.size()) + " amplitudes (one per crossing)");
    for (double& v : a) v *= c.alpha_scale;
    u = build_control(make_protocol(p, g, a));
    summary["alphas"] = a;
    summary["crossings"] = g.crossings;
    summary["Pe_analytic"] = predict_Pe_perturbative(p, a, g).pe;
  } else if (c.drive == "harmonic") {
    const double w = c.omega_tilde.value_or(2.0 * p.delta_tilde);
    const double amp = c.amplitude.value_or(harmonic_optimal_amplitude(p.delta_tilde, w));
    u = harmonic_control(p.n, {amp, w});
    summary["amplitude"] = amp;
    summary["omega_tilde"] = w;
    summary["Pe_analytic"] = harmonic_Pe(p.delta_tilde, amp, w).pe;
  }
  StepControl ctrl = c.integrator.control();
  ctrl.output_times = linspace(p.tau0, p.tauf, c.samples);
  const QuantumState init = ground_state(u(p.tau0), p.delta_tilde, p.tau0);
  const Trajectory tr = propagate(u, p.delta_tilde, init, p.tau0, p.tauf, ctrl);
  const double d = p.delta_tilde;
  out.csv("trajectory.csv", io::trajectory_table(tr, [&](double t) { return eigenframe(u(t), d); }));
  summary["Pe"] = transition_probability(tr.back(), eigenframe(u(p.tauf), d));
  summary["Pe_lzsm"] = std::exp(-std::numbers::pi * d * d);
  out.json_file("summary.json", summary);
}

inline void write_geometry(const StokesGeometry& g, const std::string& dir, OutputSet& out) {
  for (std::size_t i = 0; i < g.lines.size(); ++i) out.csv(dir + "/" + tag("line", i) + ".csv", io::polyline_table(g.lines[i]));
  out.json_file(dir + "/geometry.json", io::geometry_json(g));
}

inline void run_stokes(const StokesConfig& c, OutputSet& out, std::size_t jobs) {
  TraceOptions opt;
  opt.max_step_factor /= c.refine;
  opt.curvature_factor /= c.refine;
  std::vector<StokesGeometry> gs(c.n_values.size());
  parallel_for(gs.size(), jobs, [&](std::size_t i) {
    const int n = c.n_values[i];
    if (c.model == "sweep") {
      const ModelParams p{n, c.delta_tilde, c.tau0, c.tauf};
      gs[i] = stokes_geometry(sweep_surface(p), p.tau0, p.tauf, std::nullopt, opt);
    } else {
      gs[i] = anneal_geometry({n, c.dbar_x, c.dbar_z}, opt);
    }
  });
  for (std::size_t i = 0; i < gs.size(); ++i) write_geometry(gs[i], "n" + std::to_string(c.n_values[i]), out);
}

inline void run_sweep(const SweepConfig& c, OutputSet& out, std::size_t jobs) {
  const ModelParams& p = c.params;
  const StokesGeometry g = stokes_geometry(p);
  const int slot = crossing_slot(g, c.sweep_index);
  require(slot >= 0, "sweep_index", "turning point has no real-axis crossing in the window");
  const auto opt = optimal_amplitudes(p, g);
  std::vector<double> base = c.others == "optimal" ? opt : std::vector<double>(opt.size(), 0.0);
  const auto alphas = linspace(c.alpha_min, c.alpha_max, c.points);
  std::vector<double> num(alphas.size()), ana(alphas.size());
  const StepControl ctrl = c.integrator.control();
  parallel_for(alphas.size(), jobs, [&](std::size_t i) {
    std::vector<double> a = base;
    a[static_cast<std::size_t>(slot)] = alphas[i];
    num[i] = numeric_pe(p, build_control(make_protocol(p, g, a)), ctrl);
    ana[i] = predict_Pe_perturbative(p, a, g).pe;
  });
  io::CsvTable t({"alpha", "Pe_numeric", "Pe_analytic"});
  for (std::size_t i = 0; i < alphas.size(); ++i) t.add_row({alphas[i], num[i], ana[i]});
  out.csv("sweep.csv", t);
  const auto best = static_cast<std::size_t>(std::min_element(num.begin(), num.end()) - num.begin());
  out.json_file("summary.json", {{"alpha_opt", opt[static_cast<std::size_t>(slot)]},
                                 {"alphas_opt", opt},
                                 {"crossings", g.crossings},
                                 {"indices", g.indices},
                                 {"alpha_min_numeric", alphas[best]},
                                 {"Pe_min_numeric", num[best]},
                                 {"Pe_at_first_alpha", num.front()}});
}

/// alpha_opt for n = 1 on [-window, window] and the optimal harmonic amplitude.
inline std::pair<double, double> harmonic_row(double delta, const HarmonicConfig& c) {
  const ModelParams p{1, delta, -c.window, c.window};
  const EnergySurface s = sweep_surface(p);
  const StokesGeometry g = stokes_geometry(s, p.tau0, p.tauf);
  return {optimal_amplitudes(p, g).at(0), harmonic_optimal_amplitude(delta, c.omega_factor * delta)};
}

inline void run_harmonic(const HarmonicConfig& c, OutputSet& out, std::size_t jobs) {
  const auto deltas = linspace(c.delta_min, c.delta_max, c.points);
  std::vector<std::pair<double, double>> rows(deltas.size());
  parallel_for(deltas.size(), jobs, [&](std::size_t i) { rows[i] = harmonic_row(deltas[i], c); });
  io::CsvTable t({"delta", "alpha_opt", "A_opt"});
  for (std::size_t i = 0; i < deltas.size(); ++i) t.add_row({deltas[i], rows[i].first, rows[i].second});
  out.csv("compare.csv", t);
}

struct OptimizeOutcome {
  double delta = 0.0;
  OptimizeResult result;
  ForwardBackward fb;
  std::vector<double> pg_opt;
  std::vector<double> pg_0;
  StokesGeometry geometry;
  FitSummary fit;
  std::vector<double> analytic_alphas;
  double shape_error = 0.0;
};

inline OptimizeOutcome optimize_one(const OptimizeConfig& c, double delta) {
  OptimizeOutcome o;
  o.delta = delta;
  const ModelParams p{c.n, delta, c.tau0, c.tauf};
  const OptProblem prob = sweep_problem(p, c.intervals, c.u_plus, c.u_minus);
  o.result = optimize(prob, c.optimizer.config);
  o.fb = forward_backward(prob, o.result.grid.values);
  o.pg_opt = ground_state_probability_trace(prob, o.result.grid.values, o.fb);
  o.pg_0 = ground_state_probability_trace(prob, prob.grid.values, forward_backward(prob));
  o.geometry = stokes_geometry(p);
  const auto u0 = [n = c.n](double t) { return ipow(t, n); };
  const ResonanceBasis basis{[p](double t) { return free_energy(t, p); }, energy_phase_table(p), o.geometry.crossings,
                             false};
  o.fit = fit_resonance(o.result.grid, u0, basis);
  o.analytic_alphas = optimal_amplitudes(p, o.geometry);
  const ControlFunction analytic = build_control(make_protocol(p, o.geometry, o.analytic_alphas));
  o.shape_error = oscillation_shape_error(o.result.grid, u0, [&](double t) { return analytic(t); });
  return o;
}

inline json fit_json(const OptimizeOutcome& o) {
  std::vector<double> alphas;
  for (const auto& f : o.fit.components) alphas.push_back(f.alpha);
  return {{"delta_tilde", o.delta},
          {"alphas", alphas},
          {"alphas_analytic", o.analytic_alphas},
          {"residuals", {{"rms", o.fit.residual}, {"oscillation_rms", o.fit.oscillation_rms}}},
          {"crossings", o.geometry.crossings},
          {"indices", o.geometry.indices},
          {"rank", o.fit.rank},
          {"shape_error", o.shape_error},
          {"window", {o.fit.window_lo, o.fit.window_hi}},
          {"objective", o.result.objective},
          {"grad_norm", o.result.grad_norm},
          {"iterations", o.result.log.size() - 1},
          {"stop_reason", o.result.reason == StopReason::converged ? "converged"
                          : o.result.reason == StopReason::stalled ? "stalled"
                                                                   : "iteration_cap"}};
}

inline void write_optimize(const OptimizeConfig& c, const OptimizeOutcome& o, const std::string& prefix,
                           OutputSet& out) {
  io::CsvTable log({"iter", "J", "grad_norm", "step"});
  for (const auto& r : o.result.log)
    log.add_row({static_cast<double>(r.iteration), r.objective, r.grad_norm, r.step});
  out.csv(prefix + "iterations.csv", log);
  const ModelParams p{c.n, o.delta, c.tau0, c.tauf};
  const ResonanceBasis basis{[p](double t) { return free_energy(t, p); }, energy_phase_table(p), o.geometry.crossings,
                             false};
  const ControlFunction analytic = build_control(make_protocol(p, o.geometry, o.analytic_alphas));
  io::CsvTable ctl({"tau", "u_opt", "u0", "u_fit"});
  io::CsvTable ref({"tau", "u_analytic"});
  io::CsvTable pop({"tau", "Pg_opt", "Pg_0"});
  const ControlGrid& g = o.result.grid;
  for (std::size_t j = 0; j <= g.intervals(); ++j) {
    const double t = g.time(j);
    const double u0 = ipow(t, c.n);
    ctl.add_row({t, g.values[j], u0, u0 + resonance_sum(basis, o.fit.components, t)});
    ref.add_row({t, analytic(t)});
    pop.add_row({t, o.pg_opt[j], o.pg_0[j]});
  }
  out.csv(prefix + "control.csv", ctl);
  out.csv(prefix + "analytic.csv", ref);
  out.csv(prefix + "ground_population.csv", pop);
  out.json_file(prefix + "fit.json", fit_json(o));
}

inline void run_optimize(const OptimizeConfig& c, OutputSet& out, bool sweep, std::size_t jobs) {
  std::vector<OptimizeOutcome> res(c.deltas.size());
  parallel_for(res.size(), jobs, [&](std::size_t i) { res[i] = optimize_one(c, c.deltas[i]); });
  if (!sweep) {
    write_optimize(c, res.front(), "", out);
    return;
  }
  io::CsvTable summary({"delta", "alpha_fit", "alpha_analytic", "shape_error"});
  json all = json::array();
  for (std::size_t i = 0; i < res.size(); ++i) {
    write_optimize(c, res[i], tag("delta", i) + "/", out);
    // The component at turning point k = 0.
    const int slot = crossing_slot(res[i].geometry, 0);
    const auto s = static_cast<std::size_t>(std::max(slot, 0));
    summary.add_row({res[i].delta, res[i].fit.components[s].alpha, res[i].analytic_alphas[s], res[i].shape_error});
    all.push_back(fit_json(res[i]));
  }
  out.csv("summary.csv", summary);
  out.json_file("fit.json", all);
}

struct AnnealOutcome {
  StokesGeometry geometry;
  cplx free_amplitude{};
  AnnealAmplitudes tuned;
  std::optional<OptimizeResult> optimized;
  std::optional<FitSummary> fit;
};

inline void run_anneal(const AnnealConfig& c, OutputSet& out, std::size_t jobs) {
  const std::size_t pairs = c.dbar_z.size();
  const std::size_t total = c.n_values.size() * pairs;
  std::vector<AnnealOutcome> res(total);
  const bool need_geometry = c.stage("stokes") || c.stage("fit");
  parallel_for(total, jobs, [&](std::size_t idx) {
    if (!need_geometry) return;
    const AnnealSpec s{c.n_values[idx / pairs], c.dbar_x[idx % pairs], c.dbar_z[idx % pairs]};
    AnnealOutcome& o = res[idx];
    o.geometry = anneal_geometry(s);
    if (!c.stage("fit")) return;
    o.free_amplitude = anneal_free_amplitude(s, o.geometry, c.free_source);
    o.tuned = tune_complex_amplitudes(s, o.geometry, c.free_source);
    if (o.geometry.crossings.empty()) return;
    o.optimized = optimize(anneal_problem(s, c.intervals, c.lower, c.upper), c.optimizer.config);
    o.fit = fit_resonance(o.optimized->grid, [n = s.n](double t) { return ipow(t, n); }, anneal_basis(s, o.geometry));
  });

  for (std::size_t ni = 0; ni < c.n_values.size(); ++ni) {
    const int n = c.n_values[ni];
    const std::string nd = "n" + std::to_string(n);
    io::CsvTable cmp({"dbar_z", "re_tuned", "im_tuned", "re_fit", "im_fit"});
    json summary = json::array();
    for (std::size_t pi = 0; pi < pairs; ++pi) {
      const AnnealSpec s{n, c.dbar_x[pi], c.dbar_z[pi]};
      const AnnealOutcome& o = res[ni * pairs + pi];
      const std::string pd = nd + "/" + tag("pair", pi);
      if (c.stage("energy")) {
        io::CsvTable e({"tau", "E_minus", "E_plus", "coef_z", "coef_x"});
        for (double t : linspace(0.0, 1.0, c.samples)) {
          const double en = anneal_energy(t, s);
          const double tn = ipow(t, n);
          e.add_row({t, -en, en, s.dbar_z * tn, s.dbar_x * (1.0 - tn)});
        }
        out.csv(pd + "/energy.csv", e);
      }
      if (c.stage("stokes")) write_geometry(o.geometry, pd + "/stokes", out);
      if (!c.stage("fit")) continue;
      json entry{{"dbar_x", s.dbar_x},
                 {"dbar_z", s.dbar_z},
                 {"crossings", o.geometry.crossings},
                 {"indices", o.geometry.indices},
                 {"free_amplitude", io::complex_json(o.free_amplitude)}};
      json tuned = json::array();
      for (const auto& a : o.tuned) tuned.push_back({{"alpha", a.alpha_tilde}, {"xi", a.xi}});
      entry["tuned"] = tuned;
      if (o.fit) {
        const int k = o.geometry.indices.front();
        const cplx tv = o.tuned[static_cast<std::size_t>(k)].value();
        const cplx fv = o.fit->components.front().complex_amplitude;
        cmp.add_row({s.dbar_z, tv.real(), tv.imag(), fv.real(), fv.imag()});
        entry["fit"] = {{"alpha", o.fit->components.front().alpha},
                        {"xi", o.fit->components.front().xi},
                        {"residual", o.fit->residual},
                        {"oscillation_rms", o.fit->oscillation_rms}};
        entry["objective"] = o.optimized->objective;
        entry["ground_energy"] = -s.dbar_z;
        io::CsvTable ctl({"tau", "u_opt", "u0", "u_fit"});
        const ResonanceBasis basis = anneal_basis(s, o.geometry);
        const ControlGrid& g = o.optimized->grid;
        for (std::size_t j = 0; j <= g.intervals(); ++j) {
          const double t = g.time(j);
          const double u0 = ipow(t, n);
          ctl.add_row({t, g.values[j], u0, u0 + resonance_sum(basis, o.fit->components, t)});
        }
        out.csv(pd + "/control.csv", ctl);
      }
      summary.push_back(entry);
    }
    if (c.stage("fit")) {
      out.csv(nd + "/amplitudes.csv", cmp);
      out.json_file(nd + "/summary.json", summary);
    }
  }
}

inline void run_multilevel(const MultilevelConfig& c, OutputSet& out) {
  const auto model = std::make_shared<const GapModel>(c.spec(), c.intervals);
  io::CsvTable sp = [&] {
    std::vector<std::string> header{"tau"};
    for (Eigen::Index m = 0; m < model->spec().size(); ++m) header.push_back("E" + std::to_string(m));
    header.push_back("gap");
    return io::CsvTable(header);
  }();
  for (double t : linspace(0.0, 1.0, c.samples)) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(model->spec().hamiltonian(t), Eigen::EigenvaluesOnly);
    std::vector<double> row{t};
    for (Eigen::Index m = 0; m < es.eigenvalues().size(); ++m) row.push_back(es.eigenvalues()(m));
    row.push_back(es.eigenvalues()(1) - es.eigenvalues()(0));
    sp.add_row(row);
  }
  out.csv("spectrum.csv", sp);
  const SuppressionReport r = first_excited_amplitude(model, c.free_source, c.alpha_xi);
  out.json_file("suppression.json", {{"alpha", r.alpha},
                                     {"xi", r.xi},
                                     {"P01_free", r.p01_free},
                                     {"P01_controlled", r.p01_controlled},
                                     {"P0m_free", r.p0m_free},
                                     {"P0m_controlled", r.p0m_controlled},
                                     {"tau_r", r.tau_r},
                                     {"action", r.action},
                                     {"free_amplitude", io::complex_json(r.free_amplitude)},
                                     {"perturbative_amplitude", io::complex_json(r.perturbative_amplitude)}});
}

}  // namespace detail

inline std::filesystem::path resolve_output_dir(const ExperimentConfig& c, const RunOptions& opt) {
  if (opt.output_dir) return *opt.output_dir;
  if (c.output_dir) return *c.output_dir;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return "tdres-output";
}

/// Executes the experiment and writes its outputs plus manifest.json.
inline RunManifest run(const ExperimentConfig& c, const RunOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.output_dir = resolve_output_dir(c, opt);
  m.config_hash = config_hash(c.source);
  OutputSet out(m.output_dir);
  const std::size_t jobs = std::max<std::size_t>(1, opt.jobs);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SimulateConfig>) detail::run_simulate(p, out);
        else if constexpr (std::is_same_v<T, StokesConfig>) detail::run_stokes(p, out, jobs);
        else if constexpr (std::is_same_v<T, SweepConfig>) detail::run_sweep(p, out, jobs);
        else if constexpr (std::is_same_v<T, HarmonicConfig>) detail::run_harmonic(p, out, jobs);
        else if constexpr (std::is_same_v<T, OptimizeConfig>) detail::run_optimize(p, out, c.experiment == "fit", jobs);
        else if constexpr (std::is_same_v<T, AnnealConfig>) detail::run_anneal(p, out, jobs);
        else detail::run_multilevel(p, out);
      },
      c.params);
  out.json_file("config.json", c.source);
  m.files = out.files();
  m.files.push_back("manifest.json");
  m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::write_json(m.output_dir / "manifest.json", {{"config_hash", m.config_hash},
                                                  {"tool_version", m.tool_version},
                                                  {"experiment", c.experiment},
                                                  {"wall_time_seconds", m.wall_time},
                                                  {"files", m.files}});
  return m;
}

// ---------------------------------------------------------------------------
// Recipe catalog

struct Recipe {
  std::string name;
  std::string description;
  std::string runtime;
  json config;
};

inline const std::vector<Recipe>& recipes() {
  static const std::vector<Recipe> catalog = [] {
    const auto cfg = [](std::string experiment, std::string description, json body) {
      body["format_version"] = kFormatVersion;
      body["experiment"] = std::move(experiment);
      body["description"] = std::move(description);
      return body;
    };
    std::vector<Recipe> r;
    r.push_back({"fig1", "Stokes diagrams of the sweep model, n = 1 and n = 3", "< 1 s",
                 cfg("stokes", "Stokes diagrams, n = 1 and n = 3, delta = 1",
                     {{"model", "sweep"}, {"n_values", {1, 3}}, {"delta_tilde", 1.0}, {"tauf", 5.0}})});
    r.push_back({"fig2-left", "P_e vs resonance amplitude, n = 1, delta = 1, tauf = 100", "~2 s",
                 cfg("resonance-sweep", "P_e vs alpha, n = 1, delta = 1, tauf = -tau0 = 100",
                     {{"n", 1}, {"delta_tilde", 1.0}, {"tauf", 100.0}, {"alpha_min", 0.0}, {"alpha_max", 0.3},
                      {"points", 61}})});
    r.push_back({"fig2-right", "P_e vs alpha_0, n = 3, delta = 1, tauf = 5, alpha_1, alpha_2 optimal", "< 1 s",
                 cfg("resonance-sweep", "P_e vs alpha_0, n = 3, delta = 1, tauf = -tau0 = 5",
                     {{"n", 3}, {"delta_tilde", 1.0}, {"tauf", 5.0}, {"sweep_index", 0}, {"others", "optimal"},
                      {"alpha_min", 0.0}, {"alpha_max", 0.8}, {"points", 41}})});
    r.push_back({"fig3", "Optimal resonance amplitude vs optimal harmonic amplitude over delta in [0.5, 2]", "< 1 s",
                 cfg("harmonic-compare", "alpha_opt and A_opt vs delta, omega = 2 delta",
                     {{"delta_min", 0.5}, {"delta_max", 2.0}, {"points", 31}, {"omega_factor", 2.0}})});
    r.push_back({"fig4", "Optimal control and ground-state probability, n = 1, delta = 1/2, tauf = 5", "< 1 s",
                 cfg("optimize", "optimal control, n = 1, delta = 1/2, tauf = 5",
                     {{"n", 1}, {"delta_tilde", 0.5}, {"tauf", 5.0}, {"intervals", 2000}})});
    r.push_back({"fig5", "Fitted vs analytic resonance amplitude over delta, n = 1, tauf = 5", "< 1 s",
                 cfg("fit", "fitted alpha vs analytic alpha, n = 1, tauf = 5",
                     {{"n", 1},
                      {"deltas", {0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6}},
                      {"tauf", 5.0},
                      {"intervals", 2000}})});
    r.push_back({"fig6", "Optimized vs analytic oscillation, n = 3, tauf = 5, delta in {3/2, 2, 5/2}", "< 1 s",
                 cfg("fit", "u_opt - u0 vs the resonance control, n = 3, tauf = 5",
                     {{"n", 3}, {"deltas", {1.5, 2.0, 2.5}}, {"tauf", 5.0}, {"intervals", 10000}})});
    r.push_back({"figS-u", "Optimal controls, n = 1, tauf = 5, delta in {1/3, 2/3, 1}", "< 1 s",
                 cfg("fit", "optimal controls, n = 1, tauf = 5",
                     {{"n", 1}, {"deltas", {1.0 / 3.0, 2.0 / 3.0, 1.0}}, {"tauf", 5.0}, {"intervals", 2000}})});
    r.push_back({"figS-fit", "Resonance fits of u_opt - u0, n = 1, tauf = 5, delta in {2/3, 1, 1/3}", "< 1 s",
                 cfg("fit", "resonance fits, n = 1, tauf = 5",
                     {{"n", 1}, {"deltas", {2.0 / 3.0, 1.0, 1.0 / 3.0}}, {"tauf", 5.0}, {"intervals", 2000}})});
    r.push_back({"figC-energy", "Annealing energy levels and coefficients, n = 1 and n = 3", "< 1 s",
                 cfg("anneal", "annealing energy schedules",
                     {{"n_values", {1, 3}},
                      {"dbar_x", {10.0, 10.0, 20.0}},
                      {"dbar_z", {10.0, 20.0, 10.0}},
                      {"stages", {"energy"}}})});
    r.push_back({"figC-stokes-n1", "Annealing Stokes diagram, n = 1", "< 1 s",
                 cfg("stokes", "annealing Stokes diagram, n = 1",
                     {{"model", "anneal"}, {"n_values", {1}}, {"dbar_x", 10.0}, {"dbar_z", 10.0}})});
    r.push_back({"figC-stokes-n3", "Annealing Stokes diagram, n = 3", "< 1 s",
                 cfg("stokes", "annealing Stokes diagram, n = 3",
                     {{"model", "anneal"}, {"n_values", {3}}, {"dbar_x", 10.0}, {"dbar_z", 10.0}})});
    r.push_back({"figC-fit-n1", "Tuned vs optimizer-fitted annealing amplitude, n = 1", "< 1 s",
                 cfg("anneal", "tuned vs fitted alpha e^{-i xi}, n = 1, dbar_x = dbar_z / 2",
                     {{"n_values", {1}},
                      {"dbar_x", {5.0, 10.0, 20.0, 40.0}},
                      {"dbar_z", {10.0, 20.0, 40.0, 80.0}},
                      {"stages", {"fit"}}})});
    r.push_back({"figC-fit-n3", "Tuned vs optimizer-fitted annealing amplitude, n = 3", "< 1 s",
                 cfg("anneal", "tuned vs fitted alpha e^{-i xi}, n = 3, dbar_x = dbar_z / 2",
                     {{"n_values", {3}},
                      {"dbar_x", {5.0, 10.0, 20.0, 40.0}},
                      {"dbar_z", {10.0, 20.0, 40.0, 80.0}},
                      {"stages", {"fit"}}})});
    r.push_back({"figD-suppression", "First-excited-state suppression on the reference three-level model", "< 1 s",
                 cfg("multilevel", "three-level suppression, dbar_x = dbar_z = 8",
                     {{"preset", "reference"}, {"dbar_x", 8.0}, {"dbar_z", 8.0}})});
    return r;
  }();
  return catalog;
}

inline const Recipe* find_recipe(const std::string& name) {
  for (const auto& r : recipes())
    if (r.name == name) return &r;
  return nullptr;
}

}  // namespace tdres::cli
