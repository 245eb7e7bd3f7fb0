#include <algorithm>
#include <iostream>

#include "common.hpp"
#include "ftnet/constructions.hpp"
#include "ftnet/errors.hpp"
#include "ftnet/model_io.hpp"
#include "ftnet/random_models.hpp"

namespace ftnet::cli {

using nlohmann::json;

namespace {

struct Converted {
  AnyModel model;
  EmbeddingReport report;
  std::function<double(Rng&)> probe;  // one random input, returns its scaled gap
};

std::size_t ftnet_params(std::size_t H, std::size_t I) {
  return param_count(ModelKind::FTNet, H, I);
}

Converted convert_fnn(const FNNParams& f, const std::string& to, const std::string& mode_text,
                      std::optional<double> c_opt) {
  if (to != "fftnet") throw ContractViolation("convert: fnn converts to fftnet only, not '" + to + "'");
  std::string mode_name = mode_text;
  if (mode_name.empty()) mode_name = f.activation.induced ? "induced" : "zrelu";
  FnnEmbedMode mode;
  double c = 0.0;
  if (mode_name == "induced") {
    mode = FnnEmbedMode::Induced;
    c = c_opt.value_or(f.activation.c);
  } else if (mode_name == "zrelu") {
    mode = FnnEmbedMode::ZReLU;
  } else {
    throw ConfigError("convert: 'mode' must be induced or zrelu, got '" + mode_name + "'");
  }
  FFTNetParams net = fnn_to_fftnet(f, c, mode);
  EmbeddingReport report{"fnn", "fftnet", f.I, 1, f.H, net.H, param_count(ModelKind::FNN, f.H, f.I),
                         ftnet_params(net.H, f.I), {}};
  auto probe = [f, net](Rng& rng) {
    const Vector x = random_vector(rng, f.I, 1.0);
    return scaled_gap(eval_fftnet(net, x), eval_fnn(f, x));
  };
  return {AnyModel{net}, report, probe};
}

Converted convert_crnet(const CRNetParams& cr, const std::string& to) {
  if (to == "fftnet") {
    FFTNetParams net = crnet_to_fftnet(cr);
    EmbeddingReport report{"crnet", "fftnet", cr.I, 1, cr.H, net.H,
                           param_count(ModelKind::CRNet, cr.H, cr.I), ftnet_params(net.H, cr.I), {}};
    auto probe = [cr, net](Rng& rng) {
      const Vector x = random_vector(rng, cr.I, 1.0);
      return scaled_gap(eval_fftnet(net, x), eval_crnet(cr, x));
    };
    return {AnyModel{net}, report, probe};
  }
  if (to == "rftnet") {
    RFTNetParams net = crnet_to_rftnet(cr);
    EmbeddingReport report{"crnet", "rftnet", cr.I, 1, cr.H, net.H,
                           param_count(ModelKind::CRNet, cr.H, cr.I), ftnet_params(net.H, cr.I), {}};
    auto probe = [cr, net](Rng& rng) {
      const Vector x = random_vector(rng, cr.I, 1.0);
      return scaled_gap(eval_rftnet(net, Sequence{x}).front(), eval_crnet(cr, x));
    };
    return {AnyModel{net}, report, probe};
  }
  throw ContractViolation("convert: crnet converts to fftnet or rftnet, not '" + to + "'");
}

template <class Source, class Target>
std::function<double(Rng&)> sequence_probe(Source src, Target net, std::size_t T,
                                           Vector (*eval_src)(const Source&, const Sequence&)) {
  return [src, net, T, eval_src](Rng& rng) {
    const Sequence xs = random_sequence(rng, T, src.I);
    const Vector ys = eval_src(src, xs);
    const Vector yt = eval_rftnet(net, xs);
    double g = 0.0;
    for (std::size_t t = 0; t < T; ++t) g = std::max(g, scaled_gap(yt[t], ys[t]));
    return g;
  };
}

Converted convert_any(const AnyModel& model, const std::string& to, const std::string& mode,
                      std::optional<double> c, std::size_t steps) {
  if (const auto* f = std::get_if<FNNParams>(&model)) return convert_fnn(*f, to, mode, c);
  if (const auto* cr = std::get_if<CRNetParams>(&model)) return convert_crnet(*cr, to);
  if (const auto* r = std::get_if<RNNParams>(&model)) {
    if (to != "rftnet") throw ContractViolation("convert: rnn converts to rftnet only, not '" + to + "'");
    RFTNetParams net = rnn_to_rftnet(*r);
    EmbeddingReport report{"rnn", "rftnet", r->I, steps, r->H, net.H,
                           param_count(ModelKind::RNN, r->H, r->I), ftnet_params(net.H, r->I), {}};
    return {AnyModel{net}, report, sequence_probe(*r, net, steps, &eval_rnn)};
  }
  if (const auto* a = std::get_if<AdditiveFTNetParams>(&model)) {
    if (to != "rftnet") {
      throw ContractViolation("convert: additive converts to rftnet only, not '" + to + "'");
    }
    RFTNetParams net = additive_to_rftnet(*a);
    EmbeddingReport report{"additive", "rftnet", a->I, steps, a->H, net.H, {},
                           ftnet_params(net.H, a->I), {}};
    return {AnyModel{net}, report, sequence_probe(*a, net, steps, &eval_additive)};
  }
  throw ContractViolation("convert: no embedding from '" + kind_name(model) + "' to '" + to + "'");
}

}  // namespace

int cmd_convert(const json& config, const Options& options, std::ostream& out, std::ostream&) {
  Config cfg(config);
  const json& in = cfg.raw("in");
  if (!in.is_string()) throw ConfigError("convert: 'in' (source model path) is required");
  const std::string to = cfg.text("to", "", {"fftnet", "rftnet"});
  const std::string mode = cfg.text("mode", "", {"", "induced", "zrelu"});
  std::optional<double> c;
  if (cfg.has("c")) c = cfg.number("c", 0.0);
  const std::filesystem::path out_model =
      cfg.has("out_model") ? std::filesystem::path(cfg.text("out_model", "", {}))
                           : options.out_dir / "converted.model.json";
  const auto probes = static_cast<std::size_t>(cfg.integer("probes", 0, 0, 1'000'000));
  const auto steps = static_cast<std::size_t>(cfg.integer("steps", 1, 1, 1000));
  const std::uint64_t seed = resolve_seed(cfg, options);
  cfg.reject_unknown();

  const AnyModel source = load_model(in.get<std::string>());
  Converted conv = convert_any(source, to, mode, c, steps);
  if (probes > 0) {
    Rng rng(seed);
    double gap = 0.0;
    for (std::size_t k = 0; k < probes; ++k) gap = std::max(gap, conv.probe(rng));
    conv.report.max_abs_output_gap = gap;
  }
  if (out_model.has_parent_path()) ensure_dir(out_model.parent_path());
  save_model(out_model, conv.model);
  out << embedding_csv_header() << "\n" << to_csv_row(conv.report) << "\n";
  return kOk;
}

}  // namespace ftnet::cli
