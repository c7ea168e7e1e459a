#include "toa/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "toa/config.hpp"
#include "toa/errors.hpp"
#include "toa/verify.hpp"

namespace toa::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_rmse_csv(std::ostream& os, const MetricsSeries& ms) {
  os << "t,clock_rmse_ns,pos_rmse_m,full_branch_frac\n";
  for (std::size_t i = 0; i < ms.pos_rmse.size(); ++i) {
    os << (i + 1) << ',' << format_number(ms.clock_rmse[i]) << ','
       << format_number(ms.pos_rmse[i]) << ',' << format_number(ms.full_branch[i]) << '\n';
  }
}

void write_runtime_csv(std::ostream& os, const RuntimeSeries& rs) {
  os << "t,brmp_step_s,direct_step_s\n";
  for (std::size_t i = 0; i < rs.brmp_seconds.size(); ++i) {
    os << (i + 1) << ',' << format_number(rs.brmp_seconds[i]) << ','
       << format_number(rs.direct_seconds[i]) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "param_value,mode,avg_clock_rmse_ns,avg_pos_rmse_m,nlos_accuracy\n";
  for (const auto& r : rows) {
    os << format_number(r.value) << ',' << to_string(r.mode) << ','
       << format_number(r.avg_clock_rmse) << ',' << format_number(r.avg_pos_rmse) << ','
       << format_number(r.nlos_accuracy) << '\n';
  }
}

int steady_state_start(int t_max) { return t_max > 100 ? 101 : 1; }

namespace {

// Command-line overrides; unset members leave the config value alone.
struct Overrides {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> threads;
  std::optional<double> sigma;
  std::optional<int> anchors;
  std::optional<std::string> mode;
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::optional<int> t_max;
};

void add_common(CLI::App* sub, Overrides& o, bool scenario) {
  sub->add_option("--out", o.out_dir, "Output directory");
  sub->add_option("--seed", o.seed, "Base RNG seed");
  if (!scenario) return;
  sub->add_option("--config", o.config_path, "YAML scenario file");
  sub->add_option("--trials", o.trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
  sub->add_option("--threads", o.threads, "Worker threads (default: TOA_RTLS_THREADS or all)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--sigma", o.sigma, "Noise standard deviation, ns");
  sub->add_option("--anchors", o.anchors, "Anchor count (perfect square)");
  sub->add_option("--mode", o.mode, "Selection mode")
      ->check(CLI::IsMember({"rlsr", "all", "oracle"}));
  sub->add_option("--lambda", o.lambda, "Forgetting factor");
  sub->add_option("--alpha", o.alpha, "Proportion parameter");
  sub->add_option("--tmax", o.t_max, "Time instances per trial");
}

ScenarioConfig resolve(const Overrides& o) {
  ScenarioConfig cfg = o.config_path.empty() ? ScenarioConfig{} : load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.sigma) cfg.sigma = *o.sigma;
  if (o.anchors) cfg.m = *o.anchors;
  if (o.mode) cfg.selection_mode = selection_mode_from_string(*o.mode);
  if (o.lambda) cfg.lambda = *o.lambda;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.t_max) cfg.t_max = *o.t_max;
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("resolved config: ") + e.what());
  }
  return cfg;
}

int resolve_threads(const Overrides& o) {
  if (o.threads) return *o.threads;
  if (const char* env = std::getenv("TOA_RTLS_THREADS")) {
    int n = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto res = std::from_chars(env, end, n);
    if (res.ec != std::errc() || res.ptr != end || n < 1) {
      throw ConfigError(std::string("TOA_RTLS_THREADS: expected a positive integer, got '") +
                        env + "'");
    }
    return n;
  }
  return 0;
}

ordered_json config_json(const ScenarioConfig& c) {
  ordered_json j;
  j["scenario"] = {{"m", c.m},
                   {"n_agents", c.n_agents},
                   {"area_side", c.area_side},
                   {"anchor_height", c.anchor_height},
                   {"agent_height", c.agent_height}};
  j["noise"] = {{"sigma", c.sigma},
                {"nlos_fraction", c.nlos_fraction},
                {"nlos_range", {c.nlos_range.first, c.nlos_range.second}},
                {"offset_range", {c.offset_range.first, c.offset_range.second}},
                {"tx_time_range", {c.tx_time_range.first, c.tx_time_range.second}}};
  j["algorithm"] = {{"lambda", c.lambda},
                    {"alpha", c.alpha},
                    {"selection_mode", to_string(c.selection_mode)},
                    {"k_max", c.k_max},
                    {"k_ne", c.k_ne},
                    {"grad_tol", c.grad_tol},
                    {"fix_height", c.fix_height},
                    {"centering", to_string(c.centering)},
                    {"init_strategy", to_string(c.init_strategy)}};
  j["run"] = {{"t_max", c.t_max}, {"trials", c.trials}, {"seed", c.seed}};
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json manifest(const std::string& command, const ScenarioConfig& cfg,
                      const std::vector<std::string>& outputs, int threads,
                      const std::vector<std::string>& argv) {
  ordered_json j;
  j["artifact"] = "toa_rtls";
  j["version"] = kArtifactVersion;
  j["timestamp"] = utc_timestamp();
  j["command"] = command;
  j["argv"] = argv;
  j["config"] = config_json(cfg);
  j["threads"] = threads;
  ordered_json seeds = ordered_json::array();
  for (int k = 0; k < cfg.trials; ++k) seeds.push_back(trial_seed(cfg.seed, k));
  j["seed_provenance"] = {{"base_seed", cfg.seed},
                          {"trial_seed", "splitmix64(seed + (k + 1) * 0x9E3779B97F4A7C15)"},
                          {"trial_seeds", seeds}};
  j["outputs"] = outputs;
  return j;
}

// Writes through a temporary so a failed run leaves no half-written file.
void write_file(const fs::path& path, const std::string& body) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << body;
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    std::string item = list.substr(pos, comma - pos);
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    item = first == std::string::npos ? "" : item.substr(first, last - first + 1);
    if (!item.empty()) {
      double v = 0.0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
      if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
        throw ConfigError("--values: '" + item + "' is not a number");
      }
      out.push_back(v);
    } else if (comma < list.size()) {
      throw ConfigError("--values: empty entry");
    }
    pos = comma + 1;
  }
  return out;
}

ScenarioConfig sweep_point(ScenarioConfig cfg, const std::string& param, double value,
                           SelectionMode mode) {
  if (param == "sigma") {
    cfg.sigma = value;
  } else {
    if (value != std::floor(value)) {
      throw ConfigError("--values: anchor count " + format_number(value) + " is not an integer");
    }
    cfg.m = static_cast<int>(value);
  }
  cfg.selection_mode = mode;
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError("sweep " + param + "=" + format_number(value) + ": " + e.what());
  }
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint clock synchronisation and NLoS-robust localisation simulator",
               "toa_rtls"};
  app.require_subcommand(1);

  Overrides run_o;
  Overrides sweep_o;
  Overrides bench_o;
  Overrides verify_o;
  std::string sweep_param;
  std::string sweep_values;

  CLI::App* run = app.add_subcommand("run", "Monte-Carlo RMSE versus time");
  add_common(run, run_o, true);
  CLI::App* sweep = app.add_subcommand("sweep", "Steady-state averages over a parameter grid");
  add_common(sweep, sweep_o, true);
  sweep->add_option("--param", sweep_param, "Swept parameter")
      ->required()
      ->check(CLI::IsMember({"sigma", "anchors"}));
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  CLI::App* bench = app.add_subcommand("bench", "Per-step runtime, recursive vs direct");
  add_common(bench, bench_o, true);
  CLI::App* verify_cmd = app.add_subcommand("verify", "Oracle and invariant batteries");
  add_common(verify_cmd, verify_o, false);

  std::vector<std::string> args(argv, argv + argc);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  // Resolve everything that can fail on bad input before touching the disk.
  try {
    if (run->parsed()) {
      const ScenarioConfig cfg = resolve(run_o);
      const int threads = resolve_threads(run_o);
      const MetricsSeries ms = run_monte_carlo(cfg, threads);
      const fs::path dir = run_o.out_dir;
      prepare_out(dir);
      write_file(dir / "rmse_vs_t.csv", render([&](std::ostream& os) { write_rmse_csv(os, ms); }));
      write_file(dir / "manifest.json",
                 manifest("run", cfg, {"rmse_vs_t.csv"}, threads, args).dump(2) + "\n");
      const int from = steady_state_start(cfg.t_max);
      out << "run: " << cfg.trials << " trials x " << cfg.t_max << " steps; mean over t >= "
          << from << ": clock " << format_number(mean_over(ms.clock_rmse, from, cfg.t_max))
          << " ns, position " << format_number(mean_over(ms.pos_rmse, from, cfg.t_max))
          << " m, NLoS accuracy " << format_number(ms.nlos_accuracy) << '\n';
      return kOk;
    }
    if (sweep->parsed()) {
      const ScenarioConfig base = resolve(sweep_o);
      const int threads = resolve_threads(sweep_o);
      const std::vector<double> values = parse_values(sweep_values);
      if (values.empty()) throw ConfigError("--values: empty list");
      static constexpr SelectionMode kModes[] = {SelectionMode::Rlsr, SelectionMode::All,
                                                 SelectionMode::Oracle};
      std::vector<ScenarioConfig> points;
      for (double v : values) {
        for (SelectionMode mode : kModes) points.push_back(sweep_point(base, sweep_param, v, mode));
      }
      std::vector<SweepRow> rows;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const ScenarioConfig& cfg = points[i];
        const MetricsSeries ms = run_monte_carlo(cfg, threads);
        const int from = steady_state_start(cfg.t_max);
        SweepRow row;
        row.value = values[i / 3];
        row.mode = cfg.selection_mode;
        row.avg_clock_rmse = mean_over(ms.clock_rmse, from, cfg.t_max);
        row.avg_pos_rmse = mean_over(ms.pos_rmse, from, cfg.t_max);
        row.nlos_accuracy = ms.nlos_accuracy;
        rows.push_back(row);
        out << "sweep " << sweep_param << '=' << format_number(row.value) << ' '
            << to_string(row.mode) << ": clock " << format_number(row.avg_clock_rmse)
            << " ns, position " << format_number(row.avg_pos_rmse) << " m, NLoS accuracy "
            << format_number(row.nlos_accuracy) << '\n';
      }
      const std::string name = "sweep_" + sweep_param + ".csv";
      const fs::path dir = sweep_o.out_dir;
      prepare_out(dir);
      write_file(dir / name, render([&](std::ostream& os) { write_sweep_csv(os, rows); }));
      ordered_json m = manifest("sweep", base, {name}, threads, args);
      m["sweep"] = {{"param", sweep_param}, {"values", values}};
      write_file(dir / "manifest.json", m.dump(2) + "\n");
      return kOk;
    }
    if (bench->parsed()) {
      const ScenarioConfig cfg = resolve(bench_o);
      const int threads = resolve_threads(bench_o);
      const RuntimeSeries rs = runtime_comparison(cfg);
      const fs::path dir = bench_o.out_dir;
      prepare_out(dir);
      write_file(dir / "runtime_vs_t.csv",
                 render([&](std::ostream& os) { write_runtime_csv(os, rs); }));
      write_file(dir / "manifest.json",
                 manifest("bench", cfg, {"runtime_vs_t.csv"}, threads, args).dump(2) + "\n");
      const std::size_t last = rs.brmp_seconds.size() - 1;
      out << "bench: step time at t=" << (last + 1) << ": brmp "
          << format_number(rs.brmp_seconds[last]) << " s, direct "
          << format_number(rs.direct_seconds[last]) << " s\n";
      return kOk;
    }
    if (verify_cmd->parsed()) {
      const std::uint64_t seed = verify_o.seed.value_or(20250101);
      const auto reports = verify::run_all(seed);
      const std::string body = render([&](std::ostream& os) { verify::write_report(os, reports); });
      const fs::path dir = verify_o.out_dir;
      prepare_out(dir);
      write_file(dir / "verify_report.txt", body);
      out << body;
      bool ok = true;
      for (const auto& r : reports) ok = ok && r.passed();
      return ok ? kOk : kRuntimeFailure;
    }
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}

}  // namespace toa::cli
