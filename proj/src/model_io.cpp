#include "ftnet/model_io.hpp"

#include <fstream>
#include <set>

#include "ftnet/errors.hpp"

namespace ftnet {

using nlohmann::json;

std::string kind_name(const AnyModel& model) {
  struct Visitor {
    std::string operator()(const FNNParams&) const { return "fnn"; }
    std::string operator()(const RNNParams&) const { return "rnn"; }
    std::string operator()(const CRNetParams&) const { return "crnet"; }
    std::string operator()(const AdditiveFTNetParams&) const { return "additive"; }
    std::string operator()(const FFTNetParams&) const { return "fftnet"; }
    std::string operator()(const RFTNetParams&) const { return "rftnet"; }
  };
  return std::visit(Visitor{}, model);
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

json to_json(const Vector& v) { return json(v); }

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected an array of numbers");
  Vector v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw FormatError(what + ": expected an array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected an array of rows");
  std::vector<Vector> rows;
  for (std::size_t r = 0; r < j.size(); ++r)
    rows.push_back(vector_from_json(j[r], what + "[" + std::to_string(r) + "]"));
  if (rows.empty()) return {};
  for (const auto& row : rows)
    if (row.size() != rows.front().size()) throw FormatError(what + ": ragged rows");
  if (rows.front().empty()) return Matrix(rows.size(), 0);
  return Matrix::from_rows(rows);
}

namespace {

const json& field(const json& j, const std::string& key) {
  if (!j.contains(key)) throw FormatError("model: missing key '" + key + "'");
  return j.at(key);
}

std::size_t dim_field(const json& j, const std::string& key) {
  const json& v = field(j, key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw FormatError("model: '" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

double number_field(const json& j, const std::string& key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw FormatError("model: '" + key + "' must be a number");
  return v.get<double>();
}

void reject_unknown(const json& j, std::set<std::string> allowed) {
  allowed.insert({"kind", "I", "H", "activation", "c", "modrelu_bias"});
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw FormatError("model: unknown key '" + key + "'");
}

ActivationKind activation_field(const json& j) {
  const json& tag = field(j, "activation");
  if (!tag.is_string()) throw FormatError("model: 'activation' must be a string tag");
  const double b = j.contains("modrelu_bias") ? number_field(j, "modrelu_bias") : -0.5;
  try {
    return activation_from_string(tag.get<std::string>(), b);
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
}

void write_activation(json& j, const ActivationKind& kind) {
  j["activation"] = to_string(kind);
  if (kind.tag == ActivationTag::ModReLU) j["modrelu_bias"] = kind.modrelu_bias;
}

// Real activations: a real tag, or a complex tag plus "c" for Re sigma(x + c i).
RealActivation real_activation_field(const json& j) {
  const ActivationKind kind = activation_field(j);
  if (kind.real_valued()) return {kind};
  if (!j.contains("c"))
    throw FormatError("model: complex activation '" + to_string(kind) +
                      "' on a real network needs the offset 'c'");
  return RealActivation::restriction(kind, number_field(j, "c"),
                                     InducedConvention::RealArgImagBias, Part::Re);
}

void write_real_activation(json& j, const RealActivation& sigma) {
  write_activation(j, sigma.base);
  if (!sigma.induced) return;
  if (sigma.convention != InducedConvention::RealArgImagBias || sigma.part != Part::Re)
    throw ContractViolation("model: only Re sigma(x + c i) restrictions serialize on real nets");
  j["c"] = sigma.c;
}

}  // namespace

json to_json(const AnyModel& model) {
  json j;
  j["kind"] = kind_name(model);
  if (const auto* f = std::get_if<FNNParams>(&model)) {
    j["I"] = f->I;
    j["H"] = f->H;
    write_real_activation(j, f->activation);
    j["W"] = to_json(f->W);
    j["b"] = to_json(f->b);
    j["alpha"] = to_json(f->alpha);
  } else if (const auto* r = std::get_if<RNNParams>(&model)) {
    j["I"] = r->I;
    j["H"] = r->H;
    write_real_activation(j, r->activation);
    j["W"] = to_json(r->W);
    j["V"] = to_json(r->V);
    j["b"] = to_json(r->b);
    j["alpha"] = to_json(r->alpha);
    j["m0"] = to_json(r->m0);
  } else if (const auto* c = std::get_if<CRNetParams>(&model)) {
    j["I"] = c->I;
    j["H"] = c->H;
    write_activation(j, c->activation);
    j["W_re"] = to_json(c->W.re);
    j["W_im"] = to_json(c->W.im);
    j["b_re"] = to_json(c->b.re);
    j["b_im"] = to_json(c->b.im);
    j["alpha_re"] = to_json(c->alpha.re);
    j["alpha_im"] = to_json(c->alpha.im);
  } else if (const auto* a = std::get_if<AdditiveFTNetParams>(&model)) {
    j["I"] = a->I;
    j["H"] = a->H;
    const bool induced_pair =
        a->sigma1.induced && a->sigma2.induced && a->sigma1.base == a->sigma2.base &&
        a->sigma1.c == a->sigma2.c &&
        a->sigma1.convention == InducedConvention::ImagArgRealBias &&
        a->sigma2.convention == InducedConvention::ImagArgRealBias &&
        a->sigma1.part == Part::Re && a->sigma2.part == Part::Im;
    const bool real_pair = !a->sigma1.induced && a->sigma1 == a->sigma2;
    if (!induced_pair && !real_pair)
      throw ContractViolation("model: additive activations have no JSON form");
    write_activation(j, a->sigma1.base);
    if (induced_pair) j["c"] = a->sigma1.c;
    j["A"] = to_json(a->A);
    j["B"] = to_json(a->B);
    j["bias"] = to_json(a->bias);
    j["alpha"] = to_json(a->alpha);
    j["q0"] = to_json(a->q0);
  } else if (const auto* f = std::get_if<FFTNetParams>(&model)) {
    j["I"] = f->I;
    j["H"] = f->H;
    write_activation(j, f->activation);
    j["W"] = to_json(f->W);
    j["V"] = to_json(f->V);
    j["alpha"] = to_json(f->alpha);
  } else if (const auto* r = std::get_if<RFTNetParams>(&model)) {
    j["I"] = r->I;
    j["H"] = r->H;
    write_activation(j, r->activation);
    j["W"] = to_json(r->W);
    j["V"] = to_json(r->V);
    j["alpha"] = to_json(r->alpha);
    j["r0"] = to_json(r->r0);
  }
  return j;
}

AnyModel model_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("model: expected a JSON object");
  const json& kind_json = field(j, "kind");
  if (!kind_json.is_string()) throw FormatError("model: 'kind' must be a string");
  const std::string kind = kind_json.get<std::string>();
  const std::size_t I = dim_field(j, "I");
  const std::size_t H = dim_field(j, "H");
  if (kind == "fnn") {
    reject_unknown(j, {"W", "b", "alpha"});
    FNNParams f;
    f.I = I;
    f.H = H;
    f.activation = real_activation_field(j);
    f.W = matrix_from_json(field(j, "W"), "W");
    f.b = vector_from_json(field(j, "b"), "b");
    f.alpha = vector_from_json(field(j, "alpha"), "alpha");
    return f;
  }
  if (kind == "rnn") {
    reject_unknown(j, {"W", "V", "b", "alpha", "m0"});
    RNNParams r;
    r.I = I;
    r.H = H;
    r.activation = real_activation_field(j);
    r.W = matrix_from_json(field(j, "W"), "W");
    r.V = matrix_from_json(field(j, "V"), "V");
    r.b = vector_from_json(field(j, "b"), "b");
    r.alpha = vector_from_json(field(j, "alpha"), "alpha");
    r.m0 = j.contains("m0") ? vector_from_json(j.at("m0"), "m0") : Vector(H, 0.0);
    return r;
  }
  if (kind == "crnet") {
    reject_unknown(j, {"W_re", "W_im", "b_re", "b_im", "alpha_re", "alpha_im"});
    CRNetParams c;
    c.I = I;
    c.H = H;
    c.activation = activation_field(j);
    c.W.re = matrix_from_json(field(j, "W_re"), "W_re");
    c.W.im = matrix_from_json(field(j, "W_im"), "W_im");
    c.b.re = vector_from_json(field(j, "b_re"), "b_re");
    c.b.im = vector_from_json(field(j, "b_im"), "b_im");
    c.alpha.re = vector_from_json(field(j, "alpha_re"), "alpha_re");
    c.alpha.im = vector_from_json(field(j, "alpha_im"), "alpha_im");
    return c;
  }
  if (kind == "additive") {
    reject_unknown(j, {"A", "B", "bias", "alpha", "q0"});
    AdditiveFTNetParams a;
    a.I = I;
    a.H = H;
    const ActivationKind base = activation_field(j);
    if (base.real_valued()) {
      a.sigma1 = a.sigma2 = RealActivation{base};
    } else {
      if (!j.contains("c")) throw FormatError("model: additive net needs the offset 'c'");
      const double c = number_field(j, "c");
      a.sigma1 = RealActivation::restriction(base, c, InducedConvention::ImagArgRealBias, Part::Re);
      a.sigma2 = RealActivation::restriction(base, c, InducedConvention::ImagArgRealBias, Part::Im);
    }
    a.A = matrix_from_json(field(j, "A"), "A");
    a.B = matrix_from_json(field(j, "B"), "B");
    a.bias = vector_from_json(field(j, "bias"), "bias");
    a.alpha = vector_from_json(field(j, "alpha"), "alpha");
    a.q0 = j.contains("q0") ? vector_from_json(j.at("q0"), "q0") : Vector(H, 0.0);
    return a;
  }
  if (kind == "fftnet" || kind == "rftnet") {
    reject_unknown(j, {"W", "V", "alpha", "r0"});
    FFTNetParams f;
    f.I = I;
    f.H = H;
    f.activation = activation_field(j);
    f.W = matrix_from_json(field(j, "W"), "W");
    f.V = matrix_from_json(field(j, "V"), "V");
    f.alpha = vector_from_json(field(j, "alpha"), "alpha");
    if (kind == "fftnet") {
      if (j.contains("r0")) throw FormatError("model: 'r0' is only valid for rftnet");
      return f;
    }
    const Vector r0 = j.contains("r0") ? vector_from_json(j.at("r0"), "r0") : Vector(H, 0.0);
    return RFTNetParams{f.I, f.H, f.W, f.V, f.alpha, r0, f.activation};
  }
  throw FormatError("model: unknown kind '" + kind + "'");
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

AnyModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path));
}

void save_model(const std::filesystem::path& path, const AnyModel& model) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << to_json(model).dump(2) << '\n';
  if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

LossSpec loss_from_json(const json& j) {
  if (!j.is_object() || !j.contains("loss") || !j.at("loss").is_string())
    throw FormatError("loss: expected {\"loss\": \"squared\" | \"param_cosh\", ...}");
  const std::string kind = j.at("loss").get<std::string>();
  if (kind == "squared") {
    for (const auto& [key, value] : j.items())
      if (key != "loss") throw FormatError("loss: unknown key '" + key + "'");
    return LossSpec::squared();
  }
  if (kind == "param_cosh") {
    double abc[3] = {1.0, 1.0, 1.0};
    const char* names[3] = {"a", "b", "c"};
    for (const auto& [key, value] : j.items()) {
      if (key == "loss") continue;
      bool known = false;
      for (int i = 0; i < 3; ++i)
        if (key == names[i]) {
          if (!value.is_number()) throw FormatError("loss: '" + key + "' must be a number");
          abc[i] = value.get<double>();
          known = true;
        }
      if (!known) throw FormatError("loss: unknown key '" + key + "'");
    }
    return LossSpec::param_cosh(abc[0], abc[1], abc[2]);
  }
  throw FormatError("loss: unknown loss '" + kind + "'");
}

json to_json(const LossSpec& spec) {
  if (spec.kind == LossKind::Squared) return {{"loss", "squared"}};
  return {{"loss", "param_cosh"}, {"a", spec.a}, {"b", spec.b}, {"c", spec.c}};
}

}  // namespace ftnet
