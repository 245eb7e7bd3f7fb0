#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "common.hpp"
#include "ftnet/errors.hpp"

namespace ftnet::cli {

using nlohmann::json;

namespace {

struct Row {
  std::string source;
  std::string target;
  std::size_t I = 0;
  std::size_t source_hidden = 0;
  std::size_t target_hidden = 0;
  std::optional<std::size_t> source_params;
  std::optional<std::size_t> target_params;
  std::optional<double> gap;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t parse_size(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw FormatError("embeddings.csv line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("embeddings.csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

std::vector<Row> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != embedding_csv_header()) {
    throw FormatError("'" + path.string() + "' does not start with the embedding CSV header");
  }
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 9) {
      throw FormatError("embeddings.csv line " + std::to_string(line_no) + ": expected 9 fields");
    }
    Row r;
    r.source = f[0];
    r.target = f[1];
    r.I = parse_size(f[2], line_no);
    r.source_hidden = parse_size(f[4], line_no);
    r.target_hidden = parse_size(f[5], line_no);
    if (!f[6].empty()) r.source_params = parse_size(f[6], line_no);
    if (!f[7].empty()) r.target_params = parse_size(f[7], line_no);
    if (!f[8].empty()) r.gap = parse_double(f[8], line_no);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw FormatError("'" + path.string() + "' has no embedding rows");
  return rows;
}

struct Rule {
  std::string source;
  std::string target;
  std::string label;
  std::function<std::optional<std::size_t>(const Row&)> width;
};

const std::vector<Rule>& rules() {
  static const std::vector<Rule> r = {
      {"fnn", "fftnet", "FNN H_F → FTNet max{H_F,I+1}",
       [](const Row& x) { return std::optional(std::max(x.source_hidden, x.I + 1)); }},
      {"crnet", "fftnet", "CRNet H_C → FTNet max{2H_C,I+1}",
       [](const Row& x) { return std::optional(std::max(2 * x.source_hidden, x.I + 1)); }},
      {"crnet", "rftnet", "CRNet H_C → R-FTNet 2H_C+I+1",
       [](const Row& x) { return std::optional(2 * x.source_hidden + x.I + 1); }},
      {"rnn", "rftnet", "RNN H_R → FTNet 2H_R+I+1",
       [](const Row& x) { return std::optional(2 * x.source_hidden + x.I + 1); }},
      {"additive", "rftnet", "Additive H → R-FTNet I+H+1",
       [](const Row& x) { return std::optional(x.I + x.source_hidden + 1); }},
      {"dods", "additive", "DODS assembly → additive H1+H2+H5",
       [](const Row&) { return std::optional<std::size_t>(); }},
  };
  return r;
}

struct Aggregate {
  std::size_t instances = 0;
  std::size_t rule_violations = 0;
  std::size_t param_violations = 0;
  std::size_t max_source_params = 0;
  std::size_t max_target_params = 0;
  std::size_t max_target_hidden = 0;
  std::optional<double> max_gap;
};

std::string opt_size(std::size_t v) { return v == 0 ? "" : std::to_string(v); }

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace

int cmd_report(const json& config, const Options& options, std::ostream& out, std::ostream&) {
  Config cfg(config);
  const std::filesystem::path input_dir =
      cfg.has("input_dir") ? std::filesystem::path(cfg.text("input_dir", "", {})) : options.out_dir;
  cfg.reject_unknown();

  const std::vector<Row> rows = read_rows(input_dir / "embeddings.csv");
  std::map<std::pair<std::string, std::string>, Aggregate> agg;
  for (const Row& row : rows) {
    const auto rule = std::find_if(rules().begin(), rules().end(), [&](const Rule& r) {
      return r.source == row.source && r.target == row.target;
    });
    if (rule == rules().end()) throw FormatError("embeddings.csv: unknown pair " + row.source + " → " + row.target);
    Aggregate& a = agg[{row.source, row.target}];
    ++a.instances;
    const auto expected = rule->width(row);
    if (expected && *expected != row.target_hidden) ++a.rule_violations;
    const std::size_t H = row.target_hidden;
    if (row.target_params && *row.target_params != 2 * H * H + H) ++a.param_violations;
    a.max_source_params = std::max(a.max_source_params, row.source_params.value_or(0));
    a.max_target_params = std::max(a.max_target_params, row.target_params.value_or(0));
    a.max_target_hidden = std::max(a.max_target_hidden, H);
    if (row.gap) a.max_gap = std::max(a.max_gap.value_or(0.0), *row.gap);
  }

  std::ostringstream md;
  std::ostringstream csv;
  md << "## Constructive widths (measured)\n\n"
     << "| Embedding | Instances | Width rule holds | FTNet params = 2H²+H | max source params | "
        "max FTNet params | max target width | max output gap |\n"
     << "|---|---|---|---|---|---|---|---|\n";
  csv << "embedding,instances,width_rule_violations,param_violations,max_source_params,"
         "max_target_params,max_target_hidden,max_abs_output_gap,status\n";
  for (const Rule& rule : rules()) {
    const auto it = agg.find({rule.source, rule.target});
    if (it == agg.end()) continue;
    const Aggregate& a = it->second;
    const bool has_rule = rule.width(Row{}).has_value();
    const std::string holds = !has_rule ? "n/a"
                              : a.rule_violations == 0
                                  ? "yes"
                                  : "no (" + std::to_string(a.rule_violations) + ")";
    const std::string params = a.max_target_params == 0 ? "n/a"
                               : a.param_violations == 0
                                   ? "yes"
                                   : "no (" + std::to_string(a.param_violations) + ")";
    const std::string gap = a.max_gap ? sci(*a.max_gap) : "";
    md << "| " << rule.label << " | " << a.instances << " | " << holds << " | " << params << " | "
       << opt_size(a.max_source_params) << " | " << opt_size(a.max_target_params) << " | "
       << a.max_target_hidden << " | " << gap << " |\n";
    csv << '"' << rule.label << "\"," << a.instances << "," << a.rule_violations << "," << a.param_violations
        << "," << opt_size(a.max_source_params) << "," << opt_size(a.max_target_params) << ","
        << a.max_target_hidden << "," << gap << ",measured\n";
  }

  md << "\n## FNN versus FTNet width (literal, lower bounds not reproduced)\n\n"
     << "| Target | FNN width | FTNet width | Status |\n|---|---|---|---|\n"
     << "| separation target | Ω(e^{ε₁I}/I) | O(I^{15/4}) | NOT-VERIFIED |\n"
     << "| any | H_F | O(H_F) | upper bound measured above |\n";
  md << "\n## RNN versus FTNet width (literal, lower bounds not reproduced)\n\n"
     << "| Target | RNN width | FTNet width | Status |\n|---|---|---|---|\n"
     << "| separation target | Ω(e^{ε₂I}) | O(I^{15/4}) | NOT-VERIFIED |\n"
     << "| any | H_R | O(H_R) | upper bound measured above |\n";
  csv << "\"FNN separation target: FNN Ω(e^{ε₁I}/I) vs FTNet O(I^{15/4})\",,,,,,,,NOT-VERIFIED\n"
      << "\"RNN separation target: RNN Ω(e^{ε₂I}) vs FTNet O(I^{15/4})\",,,,,,,,NOT-VERIFIED\n";

  ensure_dir(options.out_dir);
  write_text(options.out_dir / "report.md", md.str());
  write_text(options.out_dir / "report.csv", csv.str());
  out << md.str();
  return kOk;
}

}  // namespace ftnet::cli
