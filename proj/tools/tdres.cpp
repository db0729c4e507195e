#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "tdres/experiment.hpp"

namespace {

// 0 success, 1 I/O or unexpected failure, 2 config error, 3 numerical error.
template <class F>
int guarded(F&& body) {
  try {
    body();
    return 0;
  } catch (const tdres::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tdres::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-dependent resonance experiments"};
  app.set_version_flag("--version", tdres::cli::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::size_t jobs = 1;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "run an experiment config (output dir: --out, then output_dir, then $" +
                                            std::string(tdres::cli::kOutputEnv) + ")");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("-j,--jobs", jobs, "worker threads for sweeps")->check(CLI::Range(1, 1024));
  run->add_option("-o,--out", out_dir, "output directory");

  std::string show;
  std::string write_dir;
  auto* rec = app.add_subcommand("recipes", "list the built-in recipes");
  rec->add_option("--show", show, "print the config of one recipe");
  rec->add_option("--write", write_dir, "write every recipe config as <name>.json into a directory");

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "check a config without running it");
  val->add_option("config", validate_path, "experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    return guarded([&] {
      const auto cfg = tdres::cli::load_config(config_path);
      tdres::cli::RunOptions opt;
      opt.jobs = jobs;
      if (!out_dir.empty()) opt.output_dir = out_dir;
      const auto m = tdres::cli::run(cfg, opt);
      std::printf("%s: %zu files in %s (%.2f s, config %s)\n", cfg.experiment.c_str(), m.files.size(),
                  m.output_dir.string().c_str(), m.wall_time, m.config_hash.c_str());
    });
  }
  if (*val) {
    return guarded([&] {
      const auto cfg = tdres::cli::load_config(validate_path);
      std::printf("ok: %s (format_version %d)\n", cfg.experiment.c_str(), cfg.format_version);
    });
  }
  return guarded([&] {
    const auto& catalog = tdres::cli::recipes();
    if (!show.empty()) {
      const auto* r = tdres::cli::find_recipe(show);
      if (!r) throw tdres::InvalidArgument("recipe", "no recipe named '" + show + "'");
      std::cout << r->config.dump(2) << "\n";
      return;
    }
    if (!write_dir.empty()) {
      for (const auto& r : catalog) tdres::io::write_json(std::filesystem::path(write_dir) / (r.name + ".json"), r.config);
      return;
    }
    for (const auto& r : catalog) std::printf("%-18s %-8s %s\n", r.name.c_str(), r.runtime.c_str(), r.description.c_str());
  });
}
