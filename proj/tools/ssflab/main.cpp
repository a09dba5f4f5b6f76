// ssflab: run spectral-shift / Wegner experiments from a JSON config.
//
// Exit codes: 0 ok, 1 usage or I/O, 2 config parse error or unknown kind,
// 3 validation error, 4 numeric failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "ssflab/errors.hpp"
#include "ssflab/harness.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kParse = 2, kValidation = 3, kNumeric = 4 };

int cmd_list() {
  for (const auto& k : ssflab::experiment_kinds()) {
    std::cout << k.name << "\t" << k.target << '\n';
  }
  return kOk;
}

int cmd_describe(const std::string& kind) {
  const auto* info = ssflab::find_kind(kind);
  if (!info) {
    std::cerr << "error: unknown experiment kind '" << kind << "' (see 'ssflab list')\n";
    return kParse;
  }
  std::cout << ssflab::describe_kind(*info);
  return kOk;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::size_t threads,
            const std::string& out_dir) {
  ssflab::ExperimentConfig cfg;
  try {
    cfg = ssflab::load_config(path);
    if (seed) cfg.seed = *seed;
  } catch (const ssflab::ConfigParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ssflab::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  }
  try {
    const auto record = ssflab::run_experiment(cfg, {threads});
    const std::filesystem::path dir = out_dir.empty() ? cfg.output.directory : out_dir;
    for (const auto& p : ssflab::write_outputs(record, dir, cfg.output.prefix)) {
      std::cout << "wrote " << p.string() << '\n';
    }
    std::cout << "payload_hash " << record.payload_hash << '\n';
  } catch (const ssflab::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const ssflab::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral shift function and Wegner estimate laboratory"};
  app.set_version_flag("--version", ssflab::tool_version());
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "JSON config")->required();
  run->add_option("--seed-override", seed, "Replace the config's master seed");
  run->add_option("--threads", threads, "Worker threads for Monte Carlo realizations")
      ->check(CLI::PositiveNumber);
  run->add_option("--out-dir", out_dir, "Output directory (default: output.directory)");

  app.add_subcommand("list", "List experiment kinds");

  std::string kind;
  auto* describe = app.add_subcommand("describe", "Show the config schema of a kind");
  describe->add_option("kind", kind)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (*run) return cmd_run(config_path, seed, threads, out_dir);
  if (*describe) return cmd_describe(kind);
  return cmd_list();
}
