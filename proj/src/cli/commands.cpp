#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include <CLI11.hpp>

#include "common.hpp"
#include "ftnet/errors.hpp"
#include "ftnet/model_io.hpp"

namespace ftnet::cli {

using nlohmann::json;

Config::Config(json j, std::string section) : j_(std::move(j)), section_(std::move(section)) {
  if (j_.is_null()) j_ = json::object();
  if (!j_.is_object()) throw ConfigError(section_ + ": expected a JSON object");
}

bool Config::has(const std::string& key) const { return j_.contains(key); }

double Config::number(const std::string& key, double fallback) {
  seen_.insert(key);
  if (!j_.contains(key)) return fallback;
  const json& v = j_.at(key);
  if (!v.is_number()) throw ConfigError(section_ + ": '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(section_ + ": '" + key + "' must be finite");
  return x;
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback, std::int64_t min,
                             std::int64_t max) {
  seen_.insert(key);
  std::int64_t value = fallback;
  if (j_.contains(key)) {
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(section_ + ": '" + key + "' must be an integer");
    value = v.get<std::int64_t>();
  }
  if (value < min || value > max) {
    throw ConfigError(section_ + ": '" + key + "' = " + std::to_string(value) + " outside [" +
                      std::to_string(min) + ", " + std::to_string(max) + "]");
  }
  return value;
}

std::uint64_t Config::seed(const std::string& key, std::uint64_t fallback) {
  seen_.insert(key);
  if (!j_.contains(key)) return fallback;
  const json& v = j_.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(section_ + ": '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string Config::text(const std::string& key, const std::string& fallback,
                         const std::set<std::string>& allowed) {
  seen_.insert(key);
  std::string value = fallback;
  if (j_.contains(key)) {
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(section_ + ": '" + key + "' must be a string");
    value = v.get<std::string>();
  }
  if (!allowed.empty() && !allowed.contains(value)) {
    throw ConfigError(section_ + ": '" + key + "' has unsupported value '" + value + "'");
  }
  return value;
}

std::vector<std::string> Config::text_list(const std::string& key,
                                           const std::vector<std::string>& fallback,
                                           const std::set<std::string>& allowed) {
  seen_.insert(key);
  if (!j_.contains(key)) return fallback;
  const json& v = j_.at(key);
  if (!v.is_array()) throw ConfigError(section_ + ": '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const json& item : v) {
    if (!item.is_string()) throw ConfigError(section_ + ": '" + key + "' must hold strings");
    std::string s = item.get<std::string>();
    if (!allowed.contains(s)) {
      throw ConfigError(section_ + ": '" + key + "' has unsupported entry '" + s + "'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

const json& Config::raw(const std::string& key) {
  seen_.insert(key);
  static const json null_value;
  return j_.contains(key) ? j_.at(key) : null_value;
}

void Config::reject_unknown() const {
  for (const auto& [key, value] : j_.items()) {
    if (!seen_.contains(key)) throw ConfigError(section_ + ": unknown key '" + key + "'");
  }
}

std::size_t thread_count() {
  if (const char* env = std::getenv("FTNET_LAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::uint64_t resolve_seed(Config& cfg, const Options& options) {
  const std::uint64_t from_config = cfg.seed("seed", 0);
  return options.seed.value_or(from_config);
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create '" + dir.string() + "': " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

double scaled_gap(double target, double source) {
  const double gap = std::abs(target - source) / (1.0 + std::abs(source));
  return std::isnan(gap) ? std::numeric_limits<double>::infinity() : gap;
}

LossSpec loss_option(Config& cfg) {
  const json& j = cfg.raw("loss");
  if (j.is_null()) return LossSpec::squared();
  try {
    return loss_from_json(j);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"FTNet laboratory: embeddings, training demos, descent probes, reports",
               "ftnet-lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string in_path;
  std::string target;
  std::string mode;
  double c = 0.0;
  std::string out_model;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "JSON config file");
    if (config_required) opt->required();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out", out_dir, "Output directory");
  };
  auto* convert = app.add_subcommand("convert", "Embed a model file into an FTNet");
  add_common(convert, false);
  convert->add_option("--in", in_path, "Source model JSON");
  convert->add_option("--to", target, "Target kind: fftnet or rftnet");
  convert->add_option("--mode", mode, "FNN embedding mode: induced or zrelu");
  convert->add_option("--c", c, "Imaginary bias offset for induced mode");
  convert->add_option("--out-model", out_model, "Converted model path");
  auto* verify = app.add_subcommand("verify", "Randomized embedding exactness sweeps");
  add_common(verify, false);
  auto* train = app.add_subcommand("train", "Training demos");
  add_common(train, true);
  auto* probe = app.add_subcommand("probe", "Descent-probe campaign");
  add_common(probe, false);
  auto* report = app.add_subcommand("report", "Hidden-size and parameter-count tables");
  add_common(report, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "ftnet-lab: " << e.what() << "\n";
    return kRejected;
  }

  CLI::App* sub = app.get_subcommands().front();
  Options options;
  options.out_dir = out_dir;
  if (sub->count("--seed") > 0) options.seed = seed;

  try {
    json config = json::object();
    if (!config_path.empty()) config = read_json_file(config_path);
    if (!config.is_object()) throw ConfigError("config: expected a JSON object");
    if (sub == convert) {
      if (convert->count("--in") > 0) config["in"] = in_path;
      if (convert->count("--to") > 0) config["to"] = target;
      if (convert->count("--mode") > 0) config["mode"] = mode;
      if (convert->count("--c") > 0) config["c"] = c;
      if (convert->count("--out-model") > 0) config["out_model"] = out_model;
      return cmd_convert(config, options, out, err);
    }
    if (sub == verify) return cmd_verify(config, options, out, err);
    if (sub == train) return cmd_train(config, options, out, err);
    if (sub == probe) return cmd_probe(config, options, out, err);
    return cmd_report(config, options, out, err);
  } catch (const FormatError& e) {
    err << "ftnet-lab: I/O failure: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "ftnet-lab: I/O failure: " << e.what() << "\n";
    return kIoFailure;
  } catch (const ConfigError& e) {
    err << "ftnet-lab: rejected config: " << e.what() << "\n";
    return kRejected;
  } catch (const ContractViolation& e) {
    err << "ftnet-lab: contract violation: " << e.what() << "\n";
    return kRejected;
  } catch (const DegenerateInput& e) {
    err << "ftnet-lab: degenerate input: " << e.what() << "\n";
    return kRejected;
  } catch (const NonFiniteLoss& e) {
    err << "ftnet-lab: " << e.what() << "\n";
    return kPropertyFailure;
  }
}

}  // namespace ftnet::cli
