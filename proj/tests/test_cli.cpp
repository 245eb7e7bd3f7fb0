#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ftnet/cli.hpp"
#include "ftnet/model_io.hpp"
#include "ftnet/random_models.hpp"

using namespace ftnet;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ftnet-lab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ftnet_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const json kSmallVerify = {{"instances", 6}, {"probes", 10}, {"assemblies", 4}};

}  // namespace

TEST_CASE("verify passes on a small sweep and is deterministic") {
  const fs::path dir = fresh_dir("verify");
  const fs::path cfg = write_config(dir, "verify.json", kSmallVerify);
  const Outcome a = run_cli({"verify", "--config", cfg.string(), "--seed", "3", "--out", (dir / "a").string()});
  CHECK(a.code == 0);
  const Outcome b = run_cli({"verify", "--config", cfg.string(), "--seed", "3", "--out", (dir / "b").string()});
  CHECK(b.code == 0);
  const std::string csv = slurp(dir / "a" / "embeddings.csv");
  CHECK(csv == slurp(dir / "b" / "embeddings.csv"));
  CHECK(csv.rfind("source_kind,target_kind,I,T,source_hidden,target_hidden,source_params,target_params,"
                  "max_abs_output_gap\n",
                  0) == 0);
  CHECK(fs::exists(dir / "a" / "verify_summary.csv"));
  CHECK_FALSE(fs::exists(dir / "a" / "replay"));

  const Outcome report = run_cli({"report", "--out", (dir / "a").string()});
  CHECK(report.code == 0);
  CHECK(report.out.find("FNN H_F → FTNet max{H_F,I+1}") != std::string::npos);
  CHECK(report.out.find("RNN H_R → FTNet 2H_R+I+1") != std::string::npos);
  CHECK(report.out.find("NOT-VERIFIED") != std::string::npos);
  CHECK(fs::exists(dir / "a" / "report.csv"));
  CHECK(fs::exists(dir / "a" / "report.md"));
}

TEST_CASE("verify negative controls") {
  const fs::path dir = fresh_dir("verify_fault");
  json fault = kSmallVerify;
  fault["inject_fault"] = "flip_bias_sign";
  fault["pairs"] = {"fnn_fftnet_zrelu", "rnn_rftnet"};
  const Outcome flipped = run_cli({"verify", "--config", write_config(dir, "f.json", fault).string(), "--out",
                                   (dir / "f").string()});
  CHECK(flipped.code == 1);
  REQUIRE(fs::exists(dir / "f" / "replay"));

  fs::path replay;
  for (const auto& e : fs::directory_iterator(dir / "f" / "replay"))
    if (e.path().string().ends_with(".replay.json")) replay = e.path();
  REQUIRE_FALSE(replay.empty());
  const json rec = read_json_file(replay);
  const Outcome again = run_cli({"verify", "--config",
                                 write_config(dir, "r.json", json{{"replay", replay.string()}}).string()});
  CHECK(again.code == 1);
  cli::SweepSettings s;
  s.instances = 6;
  s.probes = 10;
  s.assemblies = 4;
  s.flip_bias_sign = true;
  const cli::InstanceOutcome o = cli::run_embedding_instance(
      rec["pair"].get<std::string>(), s, rec["instance_id"].get<std::size_t>(), rec["instance_seed"].get<std::uint64_t>());
  CHECK(o.report.max_abs_output_gap.value() == rec["max_abs_output_gap"].get<double>());

  json zero_tol = kSmallVerify;
  zero_tol["tolerance"] = 0.0;
  zero_tol["pairs"] = {"additive_rftnet"};
  const Outcome strict =
      run_cli({"verify", "--config", write_config(dir, "z.json", zero_tol).string(), "--out", (dir / "z").string()});
  CHECK(strict.code == 1);

  json unknown = kSmallVerify;
  unknown["instancez"] = 3;
  CHECK(run_cli({"verify", "--config", write_config(dir, "u.json", unknown).string(), "--out", (dir / "u").string()})
            .code == 2);
}

TEST_CASE("report needs sweep output") {
  const fs::path dir = fresh_dir("report_empty");
  CHECK(run_cli({"report", "--out", dir.string()}).code == 3);
  std::ofstream(dir / "embeddings.csv") << "not,a,header\n";
  CHECK(run_cli({"report", "--out", dir.string()}).code == 3);
}

TEST_CASE("convert") {
  const fs::path dir = fresh_dir("convert");
  Rng rng(101);
  const FNNParams f{1, 1, Matrix::from_rows({{1.0}}), {0.0}, {1.0}, RealActivation::relu()};
  save_model(dir / "fnn.json", f);
  const Outcome fnn = run_cli({"convert", "--in", (dir / "fnn.json").string(), "--to", "fftnet", "--mode", "zrelu",
                               "--out-model", (dir / "fnn_ft.json").string()});
  CHECK(fnn.code == 0);
  CHECK(fnn.out.find("fnn,fftnet,1,1,1,2,4,10,\n") != std::string::npos);
  const auto ft = std::get<FFTNetParams>(load_model(dir / "fnn_ft.json"));
  CHECK(eval_fftnet(ft, Vector{0.5}) == 0.5);

  save_model(dir / "rnn.json", random_rnn(rng, 2, 3, RealActivation::relu()));
  const fs::path cfg = write_config(dir, "rnn.json.cfg", json{{"in", (dir / "rnn.json").string()},
                                                               {"to", "rftnet"},
                                                               {"probes", 20},
                                                               {"steps", 4}});
  const Outcome rnn = run_cli({"convert", "--config", cfg.string(), "--out", (dir / "rnn_out").string()});
  CHECK(rnn.code == 0);
  const json converted = read_json_file(dir / "rnn_out" / "converted.model.json");
  CHECK(converted["H"] == 2 * 3 + 2 + 1);

  json odd = to_json(AnyModel{random_crnet(rng, 2, 2)});
  odd["I"] = 3;
  std::ofstream(dir / "odd.json") << odd.dump();
  CHECK(run_cli({"convert", "--in", (dir / "odd.json").string(), "--to", "fftnet", "--out", dir.string()}).code == 2);
  CHECK(run_cli({"convert", "--in", (dir / "fnn.json").string(), "--to", "rftnet", "--out", dir.string()}).code == 2);
  CHECK(run_cli({"convert", "--in", (dir / "missing.json").string(), "--to", "fftnet", "--out", dir.string()}).code ==
        3);
}

TEST_CASE("train") {
  const fs::path dir = fresh_dir("train");
  const json interp = {{"demo", "interpolation"}, {"input_dim", 4}, {"samples", 3}, {"runs", 2}, {"max_iters", 3000}};
  const fs::path cfg = write_config(dir, "interp.json", interp);
  const Outcome a = run_cli({"train", "--config", cfg.string(), "--seed", "5", "--out", (dir / "a").string()});
  const Outcome b = run_cli({"train", "--config", cfg.string(), "--seed", "5", "--out", (dir / "b").string()});
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(slurp(dir / "a" / "trace.jsonl") == slurp(dir / "b" / "trace.jsonl"));
  CHECK(fs::exists(dir / "a" / "model_run1.json"));
  const json summary = read_json_file(dir / "a" / "summary.json");
  CHECK(summary["passed"] == true);

  const json hopeless = {{"demo", "sin_fit"}, {"max_iters", 3}, {"target_mse", 1e-12}, {"points", 16}};
  const Outcome h = run_cli({"train", "--config", write_config(dir, "h.json", hopeless).string(), "--out",
                             (dir / "h").string()});
  CHECK(h.code == 1);
  CHECK(fs::exists(dir / "h" / "trace.jsonl"));

  const json wide = {{"demo", "interpolation"}, {"input_dim", 3}, {"samples", 8}};
  CHECK(run_cli({"train", "--config", write_config(dir, "w.json", wide).string(), "--out", (dir / "w").string()})
            .code == 2);
  CHECK(run_cli({"train", "--out", dir.string()}).code == 2);
}

TEST_CASE("probe") {
  const fs::path dir = fresh_dir("probe");
  const json small = {{"instances", 10}, {"alpha_zero_instances", 5}, {"max_input_dim", 6}};
  const Outcome ok = run_cli({"probe", "--config", write_config(dir, "p.json", small).string(), "--out",
                              (dir / "p").string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("descent found on 10/10 instances") != std::string::npos);
  const std::string csv = slurp(dir / "p" / "probe.csv");
  CHECK(csv.rfind("instance_id,case_tag,old_loss,new_loss,perturbation_norm,found\n", 0) == 0);
  CHECK(csv.find("alpha_zero") != std::string::npos);
  CHECK(csv.find("alpha_nonzero") != std::string::npos);

  json too_many = small;
  too_many["input_dim"] = 3;
  too_many["samples"] = 8;
  CHECK(run_cli({"probe", "--config", write_config(dir, "n.json", too_many).string(), "--out", dir.string()}).code ==
        2);
  json zrelu = small;
  zrelu["activation"] = "zrelu";
  CHECK(run_cli({"probe", "--config", write_config(dir, "z.json", zrelu).string(), "--out", dir.string()}).code == 2);
}

TEST_CASE("probe campaign filters solved instances") {
  cli::ProbeCampaignSettings s;
  s.instances = 4;
  s.alpha_zero_instances = 2;
  s.min_loss = 1e9;
  for (const auto& r : cli::run_probe_campaign(s)) CHECK(r.filtered);
  const fs::path dir = fresh_dir("probe_filtered");
  const Outcome o = run_cli({"probe", "--config",
                             write_config(dir, "c.json", json{{"instances", 4}, {"min_loss", 1e9}}).string(), "--out",
                             dir.string()});
  CHECK(o.code == 0);
  CHECK(o.out.find("note: 4 instance(s)") != std::string::npos);
}

TEST_CASE("command-line errors") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({"verify", "--config", "/nonexistent/config.json"}).code == 3);
  const fs::path dir = fresh_dir("errors");
  std::ofstream(dir / "broken.json") << "{";
  CHECK(run_cli({"verify", "--config", (dir / "broken.json").string()}).code == 3);
}

TEST_CASE("parallel_for is deterministic and propagates exceptions") {
  std::vector<std::size_t> out(100);
  cli::parallel_for(100, [&](std::size_t i) { out[i] = i * i; });
  for (std::size_t i = 0; i < 100; ++i) CHECK(out[i] == i * i);
  CHECK_THROWS_AS(cli::parallel_for(10, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
                  std::runtime_error);
}
