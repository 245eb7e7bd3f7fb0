#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "common.hpp"
#include "ftnet/constructions.hpp"
#include "ftnet/errors.hpp"
#include "ftnet/model_io.hpp"
#include "ftnet/random_models.hpp"

namespace ftnet::cli {

using nlohmann::json;

const std::vector<std::string>& embedding_pairs() {
  static const std::vector<std::string> pairs = {
      "fnn_fftnet_induced", "fnn_fftnet_zrelu", "additive_rftnet", "crnet_fftnet",
      "crnet_rftnet",       "rnn_rftnet",       "dods_assembly"};
  return pairs;
}

namespace {

const std::vector<ActivationKind>& complex_kinds() {
  static const std::vector<ActivationKind> kinds = {
      ActivationKind::zrelu(), ActivationKind::modrelu(-0.5), ActivationKind::crelu(),
      ActivationKind::holexpm1(), ActivationKind::holsin()};
  return kinds;
}

// Im sin(c + u i) = cos(c) sinh(u) makes recurrences overflow, so recurrent pairs skip holsin.
ActivationKind pick_kind(Rng& rng, bool recurrent = false) {
  const auto& kinds = complex_kinds();
  return kinds[uniform_int(rng, 0, kinds.size() - (recurrent ? 2 : 1))];
}

void flip_bias_column(Matrix& W) {
  const std::size_t last = W.cols() - 1;
  for (std::size_t r = 0; r < W.rows(); ++r) W(r, last) = -W(r, last);
}

std::size_t ftnet_entries(const Matrix& W, const Matrix& V, const Vector& alpha) {
  return W.data().size() + V.data().size() + alpha.size();
}

struct Bookkeeper {
  InstanceOutcome& out;

  void expect(bool ok, const std::string& note) {
    if (ok) return;
    out.bookkeeping_ok = false;
    if (!out.bookkeeping_note.empty()) out.bookkeeping_note += "; ";
    out.bookkeeping_note += note;
  }

  void ftnet_counts(std::size_t H, const Matrix& W, const Matrix& V, const Vector& alpha) {
    const std::size_t count = param_count(ModelKind::FTNet, H, out.report.I);
    out.report.target_params = count;
    expect(count == 2 * H * H + H, "FTNet parameter formula");
    expect(count <= 3 * H * H, "FTNet parameter count exceeds 3H^2");
    expect(ftnet_entries(W, V, alpha) == count, "FTNet stored entries differ from 2H^2+H");
  }
};

void record_gap(InstanceOutcome& out, double gap, const json& probe) {
  if (std::isnan(gap)) gap = std::numeric_limits<double>::infinity();
  if (!out.report.max_abs_output_gap || gap > *out.report.max_abs_output_gap) {
    out.report.max_abs_output_gap = gap;
    out.worst_probe = probe;
  }
}

double vector_gap(const Vector& target, const Vector& source) {
  double g = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) g = std::max(g, scaled_gap(target[t], source[t]));
  return g;
}

void run_fnn(InstanceOutcome& out, Rng& rng, const SweepSettings& s, FnnEmbedMode mode) {
  const std::size_t I = uniform_int(rng, 1, s.max_input_dim);
  const std::size_t H = uniform_int(rng, 1, s.max_hidden);
  double c = 0.0;
  RealActivation sigma = RealActivation::relu();
  if (mode == FnnEmbedMode::Induced) {
    const ActivationKind kind = pick_kind(rng);
    c = uniform(rng, -1.0, 1.0);
    sigma = RealActivation::restriction(kind, c, InducedConvention::RealArgImagBias, Part::Re);
  }
  const FNNParams f = random_fnn(rng, I, H, sigma);
  FFTNetParams net = fnn_to_fftnet(f, c, mode);
  if (s.flip_bias_sign) flip_bias_column(net.W);

  out.source = to_json(AnyModel{f});
  out.report = {"fnn", "fftnet", I, 1, H, net.H, param_count(ModelKind::FNN, H, I), {}, {}};
  Bookkeeper book{out};
  book.expect(net.H == std::max(H, I + 1), "hidden size != max{H_F, I+1}");
  book.expect(*out.report.source_params == 2 * H * (I + 1), "FNN parameter formula");
  book.ftnet_counts(net.H, net.W, net.V, net.alpha);

  for (std::size_t k = 0; k < s.probes; ++k) {
    const Vector x = random_vector(rng, I, 1.0);
    const double ys = eval_fnn(f, x);
    const double yt = eval_fftnet(net, x);
    record_gap(out, scaled_gap(yt, ys), {{"x", x}, {"source", ys}, {"target", yt}});
  }
}

void run_additive(InstanceOutcome& out, Rng& rng, const SweepSettings& s) {
  const std::size_t I = uniform_int(rng, 1, s.max_input_dim);
  const std::size_t H = uniform_int(rng, 1, s.max_hidden);
  const ActivationKind kind = pick_kind(rng, true);
  const double c = uniform(rng, -1.0, 1.0);
  const AdditiveFTNetParams a = random_additive(rng, I, H, kind, c);
  RFTNetParams net = additive_to_rftnet(a);
  if (s.flip_bias_sign) flip_bias_column(net.W);

  out.source = to_json(AnyModel{a});
  out.report = {"additive", "rftnet", I, 1, H, net.H, {}, {}, {}};
  Bookkeeper book{out};
  book.expect(net.H == I + H + 1, "hidden size != I+H+1");
  book.ftnet_counts(net.H, net.W, net.V, net.alpha);

  for (std::size_t k = 0; k < s.probes; ++k) {
    const std::size_t T = uniform_int(rng, 1, s.max_steps);
    out.report.T = std::max(out.report.T, T);
    const Sequence xs = random_sequence(rng, T, I);
    const AdditiveTrajectory src = trace_additive(a, xs);
    const RFTNetTrajectory tgt = trace_rftnet(net, xs);
    record_gap(out, vector_gap(tgt.y, src.y), {{"xs", xs}, {"source", src.y}, {"target", tgt.y}});
    for (std::size_t t = 0; t < T; ++t) {
      const Vector& r = tgt.r[t];
      for (std::size_t i = 0; i < net.H; ++i) {
        const bool in_q = i >= I && i < I + H;
        const double ref = in_q ? src.q[t][i - I] : 0.0;
        out.structure_gap = std::max(out.structure_gap, scaled_gap(r[i], ref));
      }
    }
  }
}

void run_crnet(InstanceOutcome& out, Rng& rng, const SweepSettings& s, bool recurrent) {
  const std::size_t I = 2 * uniform_int(rng, 1, std::max<std::size_t>(s.max_input_dim / 2, 1));
  const std::size_t H = uniform_int(rng, 1, s.max_hidden);
  const CRNetParams cr = random_crnet(rng, I, H);
  out.source = to_json(AnyModel{cr});
  if (!recurrent) {
    FFTNetParams net = crnet_to_fftnet(cr);
    if (s.flip_bias_sign) flip_bias_column(net.W);
    out.report = {"crnet", "fftnet", I, 1, H, net.H, param_count(ModelKind::CRNet, H, I), {}, {}};
    Bookkeeper book{out};
    book.expect(net.H == std::max(2 * H, I + 1), "hidden size != max{2H_C, I+1}");
    book.expect(*out.report.source_params == 2 * H * (I + 2), "CRNet parameter formula");
    book.ftnet_counts(net.H, net.W, net.V, net.alpha);
    for (std::size_t k = 0; k < s.probes; ++k) {
      const Vector x = random_vector(rng, I, 1.0);
      const double ys = eval_crnet(cr, x);
      const double yt = eval_fftnet(net, x);
      record_gap(out, scaled_gap(yt, ys), {{"x", x}, {"source", ys}, {"target", yt}});
    }
    return;
  }
  RFTNetParams net = crnet_to_rftnet(cr);
  if (s.flip_bias_sign) flip_bias_column(net.W);
  out.report = {"crnet", "rftnet", I, 1, H, net.H, param_count(ModelKind::CRNet, H, I), {}, {}};
  Bookkeeper book{out};
  book.expect(net.H == 2 * H + I + 1, "hidden size != 2H_C+I+1");
  book.expect(*out.report.source_params == 2 * H * (I + 2), "CRNet parameter formula");
  book.ftnet_counts(net.H, net.W, net.V, net.alpha);
  for (std::size_t k = 0; k < s.probes; ++k) {
    const std::size_t T = uniform_int(rng, 1, s.max_steps);
    out.report.T = std::max(out.report.T, T);
    const Sequence xs = random_sequence(rng, T, I);
    Vector ys(T);
    for (std::size_t t = 0; t < T; ++t) ys[t] = eval_crnet(cr, xs[t]);
    const RFTNetTrajectory tgt = trace_rftnet(net, xs);
    record_gap(out, vector_gap(tgt.y, ys), {{"xs", xs}, {"source", ys}, {"target", tgt.y}});
    for (const Vector& r : tgt.r) {
      for (std::size_t i = 0; i < I; ++i) out.structure_gap = std::max(out.structure_gap, scaled_gap(r[i], 0.0));
      out.structure_gap = std::max(out.structure_gap, scaled_gap(r[net.H - 1], 0.0));
    }
  }
}

void run_rnn(InstanceOutcome& out, Rng& rng, const SweepSettings& s) {
  const std::size_t I = uniform_int(rng, 1, s.max_input_dim);
  const std::size_t H = uniform_int(rng, 1, s.max_hidden);
  const RNNParams r = random_rnn(rng, I, H, RealActivation::relu());
  RFTNetParams net = rnn_to_rftnet(r);
  if (s.flip_bias_sign) flip_bias_column(net.W);

  out.source = to_json(AnyModel{r});
  out.report = {"rnn", "rftnet", I, 1, H, net.H, param_count(ModelKind::RNN, H, I), {}, {}};
  Bookkeeper book{out};
  book.expect(net.H == 2 * H + I + 1, "hidden size != 2H_R+I+1");
  book.expect(*out.report.source_params == H * (I + H + 2), "RNN parameter formula");
  book.ftnet_counts(net.H, net.W, net.V, net.alpha);

  for (std::size_t k = 0; k < s.probes; ++k) {
    const std::size_t T = uniform_int(rng, 1, s.max_steps);
    out.report.T = std::max(out.report.T, T);
    const Sequence xs = random_sequence(rng, T, I);
    const RNNTrajectory src = trace_rnn(r, xs);
    const RFTNetTrajectory tgt = trace_rftnet(net, xs);
    record_gap(out, vector_gap(tgt.y, src.y), {{"xs", xs}, {"source", src.y}, {"target", tgt.y}});
    for (std::size_t t = 0; t < T; ++t) {
      const Vector& rt = tgt.r[t];
      for (std::size_t i = 0; i < I; ++i) out.structure_gap = std::max(out.structure_gap, scaled_gap(rt[i], 0.0));
      out.structure_gap = std::max(out.structure_gap, scaled_gap(rt[net.H - 1], 0.0));
      for (std::size_t h = 0; h < H; ++h) {
        out.structure_gap =
            std::max(out.structure_gap, scaled_gap(rt[I + H + h], src.m[t][h]));
      }
    }
  }
}

StateApproximator random_state_approximator(Rng& rng, std::size_t I, std::size_t HD,
                                            std::size_t H) {
  StateApproximator phi;
  phi.A = random_matrix(rng, H, I, 1.0);
  phi.B = random_matrix(rng, H, HD, 1.0 / std::sqrt(static_cast<double>(HD)));
  phi.C = random_matrix(rng, HD, H, 1.0 / std::sqrt(static_cast<double>(H)));
  phi.bias = random_vector(rng, H, 1.0);
  return phi;
}

void run_dods(InstanceOutcome& out, Rng& rng, const SweepSettings& s) {
  const std::size_t I = uniform_int(rng, 1, s.max_input_dim);
  const std::size_t HD = uniform_int(rng, 1, std::min<std::size_t>(3, s.max_hidden));
  const std::size_t H1 = uniform_int(rng, HD, std::max(HD, s.max_hidden));
  const std::size_t H2 = uniform_int(rng, HD, std::max(HD, s.max_hidden));
  const std::size_t H5 = uniform_int(rng, 1, s.max_hidden);
  const ActivationKind kind = pick_kind(rng, true);
  const double c = uniform(rng, -1.0, 1.0);
  const RealActivation s1 =
      RealActivation::restriction(kind, c, InducedConvention::ImagArgRealBias, Part::Re);
  const RealActivation s2 =
      RealActivation::restriction(kind, c, InducedConvention::ImagArgRealBias, Part::Im);
  const StateApproximator phi1 = random_state_approximator(rng, I, HD, H1);
  const StateApproximator phi2 = random_state_approximator(rng, I, HD, H2);
  ReadoutApproximator psi;
  psi.A = random_matrix(rng, H5, I, 1.0);
  psi.B = random_matrix(rng, H5, H2, 1.0 / std::sqrt(static_cast<double>(H2)));
  psi.C = random_matrix(rng, 1, H5, 1.0);
  psi.bias = random_vector(rng, H5, 1.0);
  const Vector h0 = random_vector(rng, HD, 1.0);

  DodsAssembly d = assemble_dods_additive(phi1, phi2, psi, h0, s1, s2);
  if (s.flip_bias_sign) {
    for (double& b : d.net.bias) b = -b;
  }
  out.source = {{"I", I},          {"HD", HD},        {"H1", H1},   {"H2", H2},
                {"H5", H5},        {"h0", h0},        {"activation", to_string(kind)},
                {"c", c}};
  out.report = {"dods", "additive", I, 1, HD, d.net.H, {}, {}, {}};
  Bookkeeper book{out};
  book.expect(d.net.H == H1 + H2 + H5, "assembled hidden size != H1+H2+H5");
  book.expect(d.net.I == I, "assembled input dimension");

  for (std::size_t k = 0; k < s.probes; ++k) {
    const std::size_t T = uniform_int(rng, 1, s.max_steps);
    out.report.T = std::max(out.report.T, T);
    const Sequence xs = random_sequence(rng, T, I);
    const AssemblyTrace trace = trace_assembly(d, xs);
    const AssemblyCheck check = check_assembly(d, trace);
    record_gap(out, check.max(),
               {{"xs", xs},
                {"stage1_vs_stage2", check.stage1_vs_stage2},
                {"q3_tail_vs_q2", check.q3_tail_vs_q2},
                {"p_vs_p3p5", check.p_vs_p3p5}});
  }
  out.source["assembled"] = to_json(AnyModel{d.net});
}

}  // namespace

InstanceOutcome run_embedding_instance(const std::string& pair, const SweepSettings& settings,
                                       std::size_t instance_id, std::uint64_t seed) {
  require(settings.max_input_dim >= 1 && settings.max_hidden >= 1 && settings.max_steps >= 1,
          "sweep: dimensions must be positive");
  InstanceOutcome out;
  out.instance_id = instance_id;
  out.seed = seed;
  Rng rng(seed);
  if (pair == "fnn_fftnet_induced") {
    run_fnn(out, rng, settings, FnnEmbedMode::Induced);
  } else if (pair == "fnn_fftnet_zrelu") {
    run_fnn(out, rng, settings, FnnEmbedMode::ZReLU);
  } else if (pair == "additive_rftnet") {
    run_additive(out, rng, settings);
  } else if (pair == "crnet_fftnet") {
    run_crnet(out, rng, settings, false);
  } else if (pair == "crnet_rftnet") {
    require(settings.max_input_dim >= 2, "sweep: crnet pairs need max_input_dim >= 2");
    run_crnet(out, rng, settings, true);
  } else if (pair == "rnn_rftnet") {
    run_rnn(out, rng, settings);
  } else if (pair == "dods_assembly") {
    run_dods(out, rng, settings);
  } else {
    throw ContractViolation("sweep: unknown pair '" + pair + "'");
  }
  return out;
}

SweepResult run_embedding_sweep(const std::string& pair, const SweepSettings& settings) {
  const auto& pairs = embedding_pairs();
  const auto it = std::find(pairs.begin(), pairs.end(), pair);
  require(it != pairs.end(), "sweep: unknown pair '" + pair + "'");
  const auto pair_index = static_cast<std::uint64_t>(it - pairs.begin());
  const std::uint64_t pair_seed = derive_seed(settings.seed, pair_index);
  const std::size_t n = pair == "dods_assembly" ? settings.assemblies : settings.instances;

  SweepResult result;
  result.pair = pair;
  result.outcomes.resize(n);
  parallel_for(n, [&](std::size_t i) {
    result.outcomes[i] = run_embedding_instance(pair, settings, i, derive_seed(pair_seed, i));
  });
  for (const auto& o : result.outcomes) {
    result.max_gap = std::max(result.max_gap, o.report.max_abs_output_gap.value_or(0.0));
    result.max_structure_gap = std::max(result.max_structure_gap, o.structure_gap);
    result.bookkeeping_ok = result.bookkeeping_ok && o.bookkeeping_ok;
  }
  return result;
}

namespace {

json settings_json(const SweepSettings& s) {
  return {{"seed", s.seed},
          {"instances", s.instances},
          {"probes", s.probes},
          {"max_input_dim", s.max_input_dim},
          {"max_hidden", s.max_hidden},
          {"max_steps", s.max_steps},
          {"assemblies", s.assemblies},
          {"inject_fault", s.flip_bias_sign ? "flip_bias_sign" : "none"}};
}

bool instance_failed(const InstanceOutcome& o, double tolerance) {
  return o.report.max_abs_output_gap.value_or(0.0) > tolerance || o.structure_gap > tolerance ||
         !o.bookkeeping_ok;
}

void write_replay(const std::filesystem::path& dir, const std::string& pair,
                  const SweepSettings& settings, double tolerance, const InstanceOutcome& o) {
  const std::string stem = pair + "_" + std::to_string(o.instance_id);
  write_text(dir / (stem + ".model.json"), o.source.dump(2) + "\n");
  const json replay = {{"pair", pair},
                       {"instance_id", o.instance_id},
                       {"instance_seed", o.seed},
                       {"settings", settings_json(settings)},
                       {"tolerance", tolerance},
                       {"max_abs_output_gap", o.report.max_abs_output_gap.value_or(0.0)},
                       {"structure_gap", o.structure_gap},
                       {"bookkeeping_note", o.bookkeeping_note},
                       {"worst_probe", o.worst_probe}};
  write_text(dir / (stem + ".replay.json"), replay.dump(2) + "\n");
}

SweepSettings settings_from(const json& j) {
  Config cfg(j, "replay settings");
  SweepSettings s;
  s.seed = cfg.seed("seed", 0);
  s.instances = static_cast<std::size_t>(cfg.integer("instances", 200, 0, 1'000'000));
  s.probes = static_cast<std::size_t>(cfg.integer("probes", 100, 1, 1'000'000));
  s.max_input_dim = static_cast<std::size_t>(cfg.integer("max_input_dim", 8, 1, 64));
  s.max_hidden = static_cast<std::size_t>(cfg.integer("max_hidden", 16, 1, 256));
  s.max_steps = static_cast<std::size_t>(cfg.integer("max_steps", 10, 1, 1000));
  s.assemblies = static_cast<std::size_t>(cfg.integer("assemblies", 50, 0, 1'000'000));
  s.flip_bias_sign =
      cfg.text("inject_fault", "none", {"none", "flip_bias_sign"}) == "flip_bias_sign";
  cfg.reject_unknown();
  return s;
}

int replay_instance(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
  const json j = read_json_file(path);
  Config cfg(j, "replay");
  const std::string pair = cfg.text("pair", "", {});
  const auto id = static_cast<std::size_t>(cfg.integer("instance_id", 0, 0, INT64_MAX));
  const auto seed = cfg.seed("instance_seed", 0);
  const SweepSettings settings = settings_from(cfg.raw("settings"));
  const double tolerance = cfg.number("tolerance", 1e-12);
  for (const char* key : {"max_abs_output_gap", "structure_gap", "bookkeeping_note", "worst_probe"}) {
    cfg.raw(key);
  }
  cfg.reject_unknown();
  const InstanceOutcome o = run_embedding_instance(pair, settings, id, seed);
  out << embedding_csv_header() << "\n" << to_csv_row(o.report) << "\n";
  out << "structure_gap " << format_double(o.structure_gap) << "\n";
  if (!o.bookkeeping_ok) err << "bookkeeping: " << o.bookkeeping_note << "\n";
  return instance_failed(o, tolerance) ? kPropertyFailure : kOk;
}

}  // namespace

int cmd_verify(const json& config, const Options& options, std::ostream& out, std::ostream& err) {
  Config cfg(config);
  if (cfg.has("replay")) {
    const json& path = cfg.raw("replay");
    if (!path.is_string()) throw ConfigError("config: 'replay' must be a path");
    cfg.reject_unknown();
    return replay_instance(path.get<std::string>(), out, err);
  }
  SweepSettings s;
  s.seed = resolve_seed(cfg, options);
  s.instances = static_cast<std::size_t>(cfg.integer("instances", 200, 0, 1'000'000));
  s.probes = static_cast<std::size_t>(cfg.integer("probes", 100, 1, 1'000'000));
  s.max_input_dim = static_cast<std::size_t>(cfg.integer("max_input_dim", 8, 1, 64));
  s.max_hidden = static_cast<std::size_t>(cfg.integer("max_hidden", 16, 1, 256));
  s.max_steps = static_cast<std::size_t>(cfg.integer("max_steps", 10, 1, 1000));
  s.assemblies = static_cast<std::size_t>(cfg.integer("assemblies", 50, 0, 1'000'000));
  const double tolerance = cfg.number("tolerance", 1e-12);
  if (tolerance < 0.0) throw ConfigError("config: 'tolerance' must be non-negative");
  const auto& all = embedding_pairs();
  const std::vector<std::string> pairs =
      cfg.text_list("pairs", all, std::set<std::string>(all.begin(), all.end()));
  s.flip_bias_sign =
      cfg.text("inject_fault", "none", {"none", "flip_bias_sign"}) == "flip_bias_sign";
  const auto max_replays = static_cast<std::size_t>(cfg.integer("max_replays", 20, 0, 1'000'000));
  cfg.reject_unknown();
  if (s.max_input_dim < 2) {
    for (const auto& p : pairs) {
      if (p.starts_with("crnet")) throw ConfigError("config: crnet pairs need max_input_dim >= 2");
    }
  }

  ensure_dir(options.out_dir);
  std::ostringstream csv;
  csv << embedding_csv_header() << "\n";
  std::ostringstream summary;
  summary << "pair,instances,max_abs_output_gap,max_structure_gap,bookkeeping_ok,failures\n";
  bool ok = true;
  for (const auto& pair : pairs) {
    const SweepResult r = run_embedding_sweep(pair, s);
    std::size_t failures = 0;
    for (const auto& o : r.outcomes) {
      csv << to_csv_row(o.report) << "\n";
      if (!instance_failed(o, tolerance)) continue;
      if (failures < max_replays) {
        const auto dir = options.out_dir / "replay";
        ensure_dir(dir);
        write_replay(dir, pair, s, tolerance, o);
      }
      ++failures;
    }
    ok = ok && failures == 0;
    summary << pair << "," << r.outcomes.size() << "," << format_double(r.max_gap) << ","
            << format_double(r.max_structure_gap) << "," << (r.bookkeeping_ok ? "true" : "false")
            << "," << failures << "\n";
    out << (failures == 0 ? "ok   " : "FAIL ") << pair << ": " << r.outcomes.size()
        << " instances, max gap " << format_double(r.max_gap) << ", structure gap "
        << format_double(r.max_structure_gap) << ", bookkeeping "
        << (r.bookkeeping_ok ? "ok" : "broken") << "\n";
    if (failures > 0) {
      err << pair << ": " << failures << " instance(s) above tolerance " << format_double(tolerance)
          << "; replay files in " << (options.out_dir / "replay").string() << "\n";
    }
  }
  write_text(options.out_dir / "embeddings.csv", csv.str());
  write_text(options.out_dir / "verify_summary.csv", summary.str());
  return ok ? kOk : kPropertyFailure;
}

}  // namespace ftnet::cli
