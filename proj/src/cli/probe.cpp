#include <algorithm>
#include <iostream>
#include <sstream>

#include "common.hpp"
#include "ftnet/errors.hpp"
#include "ftnet/model_io.hpp"
#include "ftnet/random_models.hpp"

namespace ftnet::cli {

using nlohmann::json;

void validate_probe_settings(const ProbeCampaignSettings& s) {
  if (s.min_input_dim < 1 || s.min_input_dim > s.max_input_dim) {
    throw ConfigError("probe: need 1 <= min_input_dim <= max_input_dim");
  }
  if (s.alpha_zero_instances > s.instances) {
    throw ConfigError("probe: alpha_zero_instances exceeds instances");
  }
  const std::size_t max_I = s.input_dim.value_or(s.max_input_dim);
  if (s.samples && *s.samples > max_I) {
    throw ConfigError("probe: samples n=" + std::to_string(*s.samples) +
                      " exceeds the input dimension " + std::to_string(max_I) +
                      "; linear independence needs n <= I");
  }
  if (s.samples && *s.samples < 1) throw ConfigError("probe: samples must be positive");
  if (!(s.delta > 0.0)) throw ConfigError("probe: delta must be positive");
  if (!s.activation.holomorphic()) {
    throw ConfigError("probe: activation '" + to_string(s.activation) + "' is not holomorphic");
  }
  const WellPosedReport wp = check_well_posed(s.loss);
  if (!wp.passed) {
    throw ConfigError("probe: loss " + to_string(s.loss) + " is not well posed: " + wp.message);
  }
}

ProbeRecord run_probe_instance(const ProbeCampaignSettings& s, std::size_t instance_id,
                               std::uint64_t seed) {
  ProbeRecord rec;
  rec.instance_id = instance_id;
  rec.seed = seed;
  rec.forced_alpha_zero = instance_id >= s.instances - s.alpha_zero_instances;
  Rng rng(seed);
  if (s.input_dim) {
    rec.I = *s.input_dim;
  } else {
    const std::size_t lo = std::max(s.min_input_dim, s.samples.value_or(1));
    rec.I = uniform_int(rng, lo, s.max_input_dim);
  }
  rec.n = s.samples ? *s.samples : uniform_int(rng, 1, rec.I);
  const std::size_t H = rec.I + 1;
  Dataset data;
  for (std::size_t i = 0; i < rec.n; ++i) {
    data.xs.push_back(random_vector(rng, rec.I, 1.0));
    data.ys.push_back(uniform(rng, -1.0, 1.0));
  }
  FFTNetParams p = random_fftnet(rng, rec.I, H, s.activation, s.init_scale);
  if (rec.forced_alpha_zero) std::fill(p.alpha.begin(), p.alpha.end(), 0.0);

  rec.result.old_loss = empirical_loss(p, data, s.loss);
  rec.result.new_loss = rec.result.old_loss;
  rec.result.case_tag = rec.forced_alpha_zero ? ProbeCase::AlphaZero : ProbeCase::AlphaNonzero;
  if (!(rec.result.old_loss > s.min_loss)) {
    rec.filtered = true;
    return rec;
  }
  rec.result = descent_probe(p, data, s.loss, s.delta, derive_seed(seed, 1));
  if (rec.result.found) {
    const double norm = frobenius_norm(rec.result.deltaZ) + norm2(rec.result.deltaAlpha);
    const double recomputed =
        empirical_loss(perturbed(p, rec.result.deltaZ, rec.result.deltaAlpha), data, s.loss);
    rec.verified = recomputed < rec.result.old_loss && norm <= s.delta;
  }
  return rec;
}

std::vector<ProbeRecord> run_probe_campaign(const ProbeCampaignSettings& s) {
  validate_probe_settings(s);
  std::vector<ProbeRecord> records(s.instances);
  parallel_for(s.instances, [&](std::size_t i) {
    records[i] = run_probe_instance(s, i, derive_seed(s.seed, i));
  });
  return records;
}

int cmd_probe(const json& config, const Options& options, std::ostream& out, std::ostream& err) {
  Config cfg(config);
  ProbeCampaignSettings s;
  s.seed = resolve_seed(cfg, options);
  s.instances = static_cast<std::size_t>(cfg.integer("instances", 100, 1, 1'000'000));
  s.alpha_zero_instances = static_cast<std::size_t>(
      cfg.integer("alpha_zero_instances", static_cast<std::int64_t>(s.instances / 2), 0, 1'000'000));
  s.min_input_dim = static_cast<std::size_t>(cfg.integer("min_input_dim", 2, 1, 256));
  s.max_input_dim = static_cast<std::size_t>(cfg.integer("max_input_dim", 10, 1, 256));
  if (cfg.has("input_dim")) s.input_dim = static_cast<std::size_t>(cfg.integer("input_dim", 1, 1, 256));
  if (cfg.has("samples")) s.samples = static_cast<std::size_t>(cfg.integer("samples", 1, 1, 4096));
  s.delta = cfg.number("delta", 0.1);
  s.init_scale = cfg.number("init_scale", 0.5);
  s.min_loss = cfg.number("min_loss", 1e-6);
  s.activation = activation_from_string(
      cfg.text("activation", "holexpm1", {"zrelu", "modrelu", "crelu", "holexpm1", "holsin"}),
      cfg.number("modrelu_bias", -0.5));
  s.loss = loss_option(cfg);
  cfg.reject_unknown();

  const std::vector<ProbeRecord> records = run_probe_campaign(s);

  ensure_dir(options.out_dir);
  std::ostringstream csv;
  std::ostringstream jsonl;
  csv << "instance_id,case_tag,old_loss,new_loss,perturbation_norm,found\n";
  std::size_t kept = 0;
  std::size_t filtered = 0;
  std::size_t verified = 0;
  std::vector<const ProbeRecord*> failures;
  for (const ProbeRecord& r : records) {
    const ProbeResult& res = r.result;
    json line = {{"instance_id", r.instance_id},
                 {"seed", r.seed},
                 {"I", r.I},
                 {"n", r.n},
                 {"case_tag", to_string(res.case_tag)},
                 {"old_loss", res.old_loss},
                 {"new_loss", res.new_loss},
                 {"perturbation_norm", res.perturbation_norm},
                 {"found", res.found},
                 {"verified", r.verified},
                 {"filtered", r.filtered},
                 {"diagnostics", res.diagnostics}};
    jsonl << line.dump() << "\n";
    if (r.filtered) {
      ++filtered;
      continue;
    }
    ++kept;
    csv << r.instance_id << "," << to_string(res.case_tag) << "," << format_double(res.old_loss)
        << "," << format_double(res.new_loss) << "," << format_double(res.perturbation_norm) << ","
        << (r.verified ? "true" : "false") << "\n";
    if (r.verified) {
      ++verified;
    } else {
      failures.push_back(&r);
    }
  }
  write_text(options.out_dir / "probe.csv", csv.str());
  write_text(options.out_dir / "probe.jsonl", jsonl.str());
  if (filtered > 0) {
    out << "note: " << filtered << " instance(s) with loss <= " << s.min_loss
        << " filtered out (already at zero loss)\n";
  }
  out << "descent found on " << verified << "/" << kept << " instances (delta "
      << s.delta << ")\n";
  for (const ProbeRecord* r : failures) {
    err << "not found: instance " << r->instance_id << " seed " << r->seed << " case "
        << to_string(r->result.case_tag) << ": " << r->result.diagnostics << "\n";
  }
  return failures.empty() ? kOk : kPropertyFailure;
}

}  // namespace ftnet::cli
