#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "spinflip/config.hpp"
#include "spinflip/errors.hpp"
#include "spinflip/export.hpp"
#include "spinflip/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Microwave spin-flip-blockade gate synthesis for Rydberg-dressed atom pairs"};
  app.set_version_flag("--version", std::string(spinflip::kToolVersion));

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  const unsigned hw = std::thread::hardware_concurrency();
  int workers = hw > 0 ? static_cast<int>(hw) : 1;
  bool resume = false;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--workers", workers, "worker threads for sweeps")->capture_default_str();
  app.add_flag("--resume", resume, "reuse matching per-point checkpoints");

  auto* exp = app.add_subcommand("export", "merge results.csv files below a directory");
  std::string export_dir;
  std::string format = "csv";
  exp->add_option("dir", export_dir, "results directory")->required();
  exp->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (exp->parsed()) {
    try {
      const auto path = spinflip::export_results(export_dir, spinflip::export_format_from_string(format));
      std::cout << path.string() << "\n";
      return 0;
    } catch (const spinflip::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  if (config_path.empty()) {
    std::cerr << "error: --config is required\n" << app.help();
    return 2;
  }

  try {
    spinflip::RunConfig config = spinflip::load_config(config_path);
    if (seed) config.seed = *seed;
    spinflip::RunOptions opts;
    opts.out_dir = out_dir;
    opts.workers = workers;
    opts.resume = resume;
    opts.log = &std::cout;
    spinflip::run(config, opts);
  } catch (const spinflip::Error& e) {
    spinflip::write_error_record(out_dir, e);
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    const spinflip::Error wrapped(spinflip::ErrorCode::Io, e.what());
    spinflip::write_error_record(out_dir, wrapped);
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
