#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "ftnet/cli.hpp"
#include "ftnet/losses.hpp"

namespace ftnet::cli {

std::uint64_t resolve_seed(Config& cfg, const Options& options);

// Creates the directory if needed; FormatError if that fails.
void ensure_dir(const std::filesystem::path& dir);
void write_text(const std::filesystem::path& path, const std::string& text);

// |target - source| / (1 + |source|); NaN maps to infinity.
double scaled_gap(double target, double source);

LossSpec loss_option(Config& cfg);

std::string format_double(double x);

}  // namespace ftnet::cli
