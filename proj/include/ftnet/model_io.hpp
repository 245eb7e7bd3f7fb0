#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include <json.hpp>

#include "ftnet/losses.hpp"
#include "ftnet/models.hpp"

namespace ftnet {

using AnyModel = std::variant<FNNParams, RNNParams, CRNetParams, AdditiveFTNetParams,
                              FFTNetParams, RFTNetParams>;

// "fnn", "rnn", "crnet", "additive", "fftnet", "rftnet".
std::string kind_name(const AnyModel& model);

nlohmann::json to_json(const AnyModel& model);
// Throws FormatError on missing keys, wrong types or ragged arrays. Shape consistency
// between fields is left to the model's validate().
AnyModel model_from_json(const nlohmann::json& j);

AnyModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const AnyModel& model);

nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const Vector& v);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& what);
Vector vector_from_json(const nlohmann::json& j, const std::string& what);

// {"loss": "squared"} or {"loss": "param_cosh", "a": .., "b": .., "c": ..}.
LossSpec loss_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LossSpec& spec);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace ftnet
