#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftnet/constructions.hpp"
#include "ftnet/optimize.hpp"

namespace ftnet::cli {

enum ExitCode : int { kOk = 0, kPropertyFailure = 1, kRejected = 2, kIoFailure = 3 };

// Raised for configs that parse but fail validation (unknown keys, bad ranges).
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Typed access to a JSON config object that rejects keys nobody asked for.
class Config {
public:
  explicit Config(nlohmann::json j, std::string section = "config");

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback);
  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t min,
                       std::int64_t max);
  std::uint64_t seed(const std::string& key, std::uint64_t fallback);
  std::string text(const std::string& key, const std::string& fallback,
                   const std::set<std::string>& allowed);
  std::vector<std::string> text_list(const std::string& key,
                                     const std::vector<std::string>& fallback,
                                     const std::set<std::string>& allowed);
  const nlohmann::json& raw(const std::string& key);
  // Throws ConfigError naming the first key that was never read.
  void reject_unknown() const;

private:
  nlohmann::json j_;
  std::string section_;
  std::set<std::string> seen_;
};

struct Options {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
};

// Worker count from FTNET_LAB_THREADS, else hardware concurrency.
std::size_t thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Embedding sweeps ---------------------------------------------------------

struct SweepSettings {
  std::uint64_t seed = 0;
  std::size_t instances = 200;
  std::size_t probes = 100;
  std::size_t max_input_dim = 8;
  std::size_t max_hidden = 16;
  std::size_t max_steps = 10;
  std::size_t assemblies = 50;
  bool flip_bias_sign = false;
};

const std::vector<std::string>& embedding_pairs();

struct InstanceOutcome {
  std::size_t instance_id = 0;
  EmbeddingReport report;
  double structure_gap = 0.0;  // receptor/trajectory identities, same scaling as the gap
  bool bookkeeping_ok = true;
  std::string bookkeeping_note;
  std::uint64_t seed = 0;
  nlohmann::json source;       // source model (or assembly parts)
  nlohmann::json worst_probe;  // input that produced the largest gap
};

struct SweepResult {
  std::string pair;
  std::vector<InstanceOutcome> outcomes;
  double max_gap = 0.0;
  double max_structure_gap = 0.0;
  bool bookkeeping_ok = true;
};

SweepResult run_embedding_sweep(const std::string& pair, const SweepSettings& settings);
// One instance of a sweep; `seed` fully determines the sampled model and probes.
InstanceOutcome run_embedding_instance(const std::string& pair, const SweepSettings& settings,
                                       std::size_t instance_id, std::uint64_t seed);

// Descent-probe campaigns ------------------------------------------------

struct ProbeCampaignSettings {
  std::uint64_t seed = 0;
  std::size_t instances = 100;
  std::size_t alpha_zero_instances = 50;  // the last ones get alpha = 0
  std::size_t min_input_dim = 2;
  std::size_t max_input_dim = 10;
  std::optional<std::size_t> input_dim;
  std::optional<std::size_t> samples;
  double delta = 0.1;
  double init_scale = 0.5;
  double min_loss = 1e-6;
  ActivationKind activation = ActivationKind::holexpm1();
  LossSpec loss = LossSpec::squared();
};

struct ProbeRecord {
  std::size_t instance_id = 0;
  std::uint64_t seed = 0;
  std::size_t I = 0;
  std::size_t n = 0;
  bool forced_alpha_zero = false;
  bool filtered = false;  // initial loss at or below min_loss
  ProbeResult result;
  // found, new loss recomputed below the old one and the perturbation inside the delta ball
  bool verified = false;
};

// Throws ConfigError when the settings cannot guarantee n <= I.
void validate_probe_settings(const ProbeCampaignSettings& settings);
ProbeRecord run_probe_instance(const ProbeCampaignSettings& settings, std::size_t instance_id,
                               std::uint64_t seed);
std::vector<ProbeRecord> run_probe_campaign(const ProbeCampaignSettings& settings);

// Commands -----------------------------------------------------------------

int cmd_convert(const nlohmann::json& config, const Options& options, std::ostream& out,
                std::ostream& err);
int cmd_verify(const nlohmann::json& config, const Options& options, std::ostream& out,
               std::ostream& err);
int cmd_train(const nlohmann::json& config, const Options& options, std::ostream& out,
              std::ostream& err);
int cmd_probe(const nlohmann::json& config, const Options& options, std::ostream& out,
              std::ostream& err);
int cmd_report(const nlohmann::json& config, const Options& options, std::ostream& out,
               std::ostream& err);

// Full command-line entry point (argv[0] is the program name).
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ftnet::cli
