#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssflab/disorder.hpp"
#include "ssflab/lattice.hpp"
#include "ssflab/ssf.hpp"
#include "ssflab/wegner.hpp"

namespace ssflab {

using Json = nlohmann::json;

/// Malformed config document. field() is the dotted path of the culprit.
class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct NumericBlock {
  std::vector<double> epsilon_grid;
  double t = 1.0;
  std::optional<double> upper;  // T
  std::optional<double> energy;
  std::size_t realizations = 1;
  double eta = 0.1;
  std::vector<double> t_grid;
  std::vector<double> amplitudes;  // +inf = site deletion
  double amplitude = 1.0;          // perturbation strength for pair experiments
  std::vector<int> volumes;
  std::vector<double> energy_grid;
  std::size_t trials = 1;
  std::size_t dense_cap = kDefaultDenseCap;
  double decay_floor = kDefaultDecayFloor;
  std::size_t decay_skip = kDefaultDecaySkip;
  std::vector<double> alphas;
  std::vector<double> cutoffs;
  std::vector<double> x_grid;
  std::vector<double> y_grid;
};

struct OutputBlock {
  std::string directory = ".";
  std::string prefix;  // default: the kind
  bool tables = true;
  bool curves = true;
  bool raw_counts = true;
};

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  ModelSpec model;
  std::optional<DisorderLaw> disorder;
  double magnetic_field = 0.0;
  Gauge gauge = Gauge::landau;
  NumericBlock numeric;
  OutputBlock output;
};

/// Parses and validates. Throws ConfigParseError for structural problems
/// (bad JSON, wrong types, unknown or missing fields) and ValidationError for
/// out-of-range values; both name the offending field.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical document with every default spelled out. parse_config inverts it.
Json config_to_json(const ExperimentConfig& cfg);

struct KindInfo {
  std::string name;
  std::string target;
  std::string summary;
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

const std::vector<KindInfo>& experiment_kinds();
/// nullptr for an unknown kind.
const KindInfo* find_kind(const std::string& name);
std::string describe_kind(const KindInfo& info);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<double>> rows;
};

struct CurveOutput {
  std::string name;
  SSFCurve curve;
  std::map<std::string, std::string> metadata;
};

struct ExperimentRecord {
  Json config;
  std::string tool_version;
  double wall_clock_seconds = 0.0;
  Json payload;
  Json fits;
  std::string payload_hash;
  std::vector<Table> tables;
  std::vector<CurveOutput> curves;

  Json to_json() const;
};

struct RunOptions {
  std::size_t threads = 1;
};

/// Executes the experiment. The payload, fits and hash depend on the config
/// only, never on the thread count.
ExperimentRecord run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// FNV-1a 64 of the payload and fits, as 16 hex digits.
std::string payload_hash(const Json& payload, const Json& fits);

/// Writes <prefix>.record.json plus tables (.tsv) and curves (.curve.txt).
/// Returns the paths written.
std::vector<std::filesystem::path> write_outputs(const ExperimentRecord& record,
                                                 const std::filesystem::path& directory,
                                                 const std::string& prefix);

void write_table(std::ostream& out, const Table& table);

/// The config stored in a record document.
ExperimentConfig config_from_record(const Json& record);

std::string tool_version();

}  // namespace ssflab
