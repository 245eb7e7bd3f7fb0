#include <cmath>
#include <iostream>
#include <sstream>

#include "common.hpp"
#include "ftnet/errors.hpp"
#include "ftnet/model_io.hpp"
#include "ftnet/random_models.hpp"

namespace ftnet::cli {

using nlohmann::json;

namespace {

struct DemoDefaults {
  std::size_t hidden;
  const char* activation;
  double step_size;
  double init_scale;
  std::int64_t max_iters;
  double target_mse;
};

DemoDefaults defaults_for(const std::string& demo) {
  if (demo == "sin_fit") return {32, "holsin", 1e-3, 0.5, 50000, 1e-3};
  if (demo == "dods") return {16, "holexpm1", 1e-3, 0.2, 20000, 1e-2};
  return {0, "holexpm1", 1e-2, 0.3, 20000, 0.0};
}

struct RunOutcome {
  TrainTrace trace;
  AnyModel model;
  std::size_t count = 1;  // samples (or sample-steps) behind the MSE
};

json run_summary(std::size_t run, const RunOutcome& r, double target_mse) {
  const double mse = r.trace.losses.back() / static_cast<double>(r.count);
  return {{"run", run},
          {"iterations", r.trace.iterations},
          {"initial_mse", r.trace.losses.front() / static_cast<double>(r.count)},
          {"final_mse", mse},
          {"reached_target", mse <= target_mse},
          {"stop_reason", r.trace.stop_reason}};
}

Dataset sin_dataset(std::size_t points) {
  Dataset d;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = points == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    d.xs.push_back({x});
    d.ys.push_back(std::sin(3.0 * x));
  }
  return d;
}

}  // namespace

int cmd_train(const json& config, const Options& options, std::ostream& out, std::ostream& err) {
  Config cfg(config);
  const std::string demo = cfg.text("demo", "", {"sin_fit", "dods", "interpolation"});
  const DemoDefaults def = defaults_for(demo);
  const std::uint64_t seed = resolve_seed(cfg, options);
  const ActivationKind kind = activation_from_string(
      cfg.text("activation", def.activation,
               {"zrelu", "modrelu", "crelu", "holexpm1", "holsin"}),
      cfg.number("modrelu_bias", -0.5));
  TrainConfig tc;
  tc.seed = seed;
  tc.step_size = cfg.number("step_size", def.step_size);
  tc.init_scale = cfg.number("init_scale", def.init_scale);
  tc.step_growth = cfg.number("step_growth", 1.0);
  tc.max_iters = static_cast<std::size_t>(cfg.integer("max_iters", def.max_iters, 0, 100'000'000));
  if (tc.step_size <= 0.0 || tc.init_scale <= 0.0 || tc.step_growth < 1.0) {
    throw ConfigError("train: step_size and init_scale must be positive, step_growth >= 1");
  }

  std::vector<RunOutcome> runs;
  double target_mse = def.target_mse;
  if (demo == "sin_fit") {
    const auto points = static_cast<std::size_t>(cfg.integer("points", 256, 1, 1'000'000));
    const auto H = static_cast<std::size_t>(cfg.integer("hidden", static_cast<std::int64_t>(def.hidden), 2, 4096));
    target_mse = cfg.number("target_mse", def.target_mse);
    cfg.reject_unknown();
    const Dataset data = sin_dataset(points);
    Rng rng(seed);
    const FFTNetParams p0 = random_fftnet(rng, 1, H, kind, tc.init_scale);
    tc.target_loss = target_mse * static_cast<double>(points);
    FFTNetTrainResult r = train_fftnet(p0, data, LossSpec::squared(), tc);
    runs.push_back({std::move(r.trace), AnyModel{std::move(r.params)}, points});
  } else if (demo == "dods") {
    const auto sequences = static_cast<std::size_t>(cfg.integer("sequences", 64, 1, 1'000'000));
    const auto T = static_cast<std::size_t>(cfg.integer("steps", 8, 1, 10'000));
    const auto H = static_cast<std::size_t>(cfg.integer("hidden", static_cast<std::int64_t>(def.hidden), 2, 4096));
    target_mse = cfg.number("target_mse", def.target_mse);
    cfg.reject_unknown();
    const DODSSpec dods = dods_linear(Matrix::from_rows({{2.0}, {-1.5}}),
                                      Matrix::from_rows({{0.5, 0.3}, {-0.2, 0.4}}), {1.0, 0.5},
                                      {0.0, 0.0});
    Rng data_rng(derive_seed(seed, 0));
    SequenceDataset data;
    for (std::size_t i = 0; i < sequences; ++i) {
      Sequence xs = random_sequence(data_rng, T, 1);
      data.ys.push_back(eval_dods(dods, xs));
      data.xs.push_back(std::move(xs));
    }
    Rng init_rng(derive_seed(seed, 1));
    const RFTNetParams p0 = random_rftnet(init_rng, 1, H, kind, tc.init_scale);
    const std::size_t count = sequences * T;
    tc.target_loss = target_mse * static_cast<double>(count);
    RFTNetTrainResult r = train_rftnet(p0, data, LossSpec::squared(), tc);
    runs.push_back({std::move(r.trace), AnyModel{std::move(r.params)}, count});
  } else {
    const auto I = static_cast<std::size_t>(cfg.integer("input_dim", 8, 1, 256));
    const auto n = static_cast<std::size_t>(cfg.integer("samples", 4, 1, 256));
    if (n > I) {
      throw ConfigError("train: interpolation needs samples <= input_dim (got " +
                        std::to_string(n) + " > " + std::to_string(I) + ")");
    }
    const auto H = static_cast<std::size_t>(
        cfg.integer("hidden", static_cast<std::int64_t>(I + 1), static_cast<std::int64_t>(I + 1), 4096));
    const auto run_count = static_cast<std::size_t>(cfg.integer("runs", 10, 1, 10'000));
    target_mse = cfg.number("target_mse", 1e-8 / static_cast<double>(n));
    cfg.reject_unknown();
    Rng data_rng(derive_seed(seed, 0));
    Dataset data;
    for (std::size_t i = 0; i < n; ++i) {
      data.xs.push_back(random_vector(data_rng, I, 1.0));
      data.ys.push_back(uniform(data_rng, -1.0, 1.0));
    }
    tc.target_loss = target_mse * static_cast<double>(n);
    runs.resize(run_count);
    parallel_for(run_count, [&](std::size_t k) {
      Rng rng(derive_seed(seed, k + 1));
      const FFTNetParams p0 = random_fftnet(rng, I, H, kind, tc.init_scale);
      FFTNetTrainResult r = train_fftnet(p0, data, LossSpec::squared(), tc);
      runs[k] = {std::move(r.trace), AnyModel{std::move(r.params)}, n};
    });
  }

  ensure_dir(options.out_dir);
  std::ostringstream trace;
  json summary = {{"demo", demo},      {"seed", seed},          {"activation", to_string(kind)},
                  {"target_mse", target_mse}, {"runs", json::array()}};
  bool passed = true;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const RunOutcome& r = runs[k];
    const auto count = static_cast<double>(r.count);
    for (std::size_t i = 0; i < r.trace.losses.size(); ++i) {
      json line = {{"run", k}, {"iter", i}, {"loss", r.trace.losses[i]},
                   {"mse", r.trace.losses[i] / count}};
      line["step"] = i == 0 ? json(nullptr) : json(r.trace.steps[i - 1]);
      trace << line.dump() << "\n";
    }
    json s = run_summary(k, r, target_mse);
    passed = passed && s["reached_target"].get<bool>();
    out << demo << " run " << k << ": " << r.trace.iterations << " iterations, mse "
        << format_double(s["final_mse"].get<double>()) << " (" << r.trace.stop_reason << ")\n";
    summary["runs"].push_back(std::move(s));
    const std::string name = runs.size() == 1 ? "model.json" : "model_run" + std::to_string(k) + ".json";
    save_model(options.out_dir / name, r.model);
  }
  summary["passed"] = passed;
  write_text(options.out_dir / "trace.jsonl", trace.str());
  write_text(options.out_dir / "summary.json", summary.dump(2) + "\n");
  if (!passed) err << demo << ": target mse " << format_double(target_mse) << " not reached\n";
  return passed ? kOk : kPropertyFailure;
}

}  // namespace ftnet::cli
