#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <cmath>
#include <sstream>
#include <string>

#include "smatch/report_io.hpp"
#include "smatch/verify.hpp"

using namespace smatch;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI binary; returns its exit code, captures stdout+stderr.
int run_cli(const std::string& args, std::string* output = nullptr) {
  fs::path log = fs::temp_directory_path() / "smatch_cli_log.txt";
  std::string cmd = std::string(SMATCH_CLI_PATH) + " " + args + " > " +
                    log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  if (output) *output = slurp(log);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("csv writer quotes per RFC 4180") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");

  std::ostringstream out;
  CsvWriter w(out);
  w.row({"x", "1,2", "q\"q"});
  CHECK(out.str() == "x,\"1,2\",\"q\"\"q\"\r\n");
}

TEST_CASE("config hash is stable and sensitive") {
  SimConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("summary json validates against the shipped schema") {
  auto schema = nlohmann::json::parse(
      slurp(fs::path(SMATCH_SOURCE_DIR) / "data" / "summary.schema.json"));

  SimConfig cfg;
  cfg.model = Model::fully_dynamic;
  cfg.d = 2;
  cfg.m = 64;
  cfg.N = 4000;
  cfg.replications = 2;
  cfg.init = Init::even_grid;
  auto report = run_fully_dynamic(cfg);
  auto doc = summary_json(cfg, report);

  std::string why;
  CHECK_MESSAGE(validate_against_schema(doc, schema, &why), why);

  // reps = 1 leaves stderr null; still valid
  cfg.replications = 1;
  auto doc1 = summary_json(cfg, run_fully_dynamic(cfg));
  CHECK(doc1["results"]["stderr_cost"].is_null());
  CHECK_MESSAGE(validate_against_schema(doc1, schema, &why), why);

  // the validator notices a missing required key and a type violation
  auto broken = doc;
  broken["results"].erase("mean_cost");
  CHECK_FALSE(validate_against_schema(broken, schema, &why));
  CHECK(why.find("mean_cost") != std::string::npos);
  broken = doc;
  broken["results"]["periods"] = "lots";
  CHECK_FALSE(validate_against_schema(broken, schema, &why));
}

TEST_CASE("verify suites are named and mapped") {
  CHECK(verify::suite_criteria("oracles") == std::vector<int>{1});
  CHECK(verify::suite_criteria("exponents-fast") == std::vector<int>{2, 3, 7});
  CHECK(verify::suite_criteria("exponents-full") == std::vector<int>{4, 5, 6});
  CHECK(verify::suite_criteria("invariants") == std::vector<int>{8});
  CHECK(verify::suite_criteria("capacity") == std::vector<int>{9});
  CHECK_THROWS_AS(verify::suite_criteria("nope"), std::invalid_argument);
}

TEST_CASE("cli: simulate smoke test writes summary and manifest") {
  fs::path dir = fs::temp_directory_path() / "smatch_t1";
  fs::remove_all(dir);
  std::string out;
  int code = run_cli(
      "simulate --model semi_dynamic --d 1 --N 4096 --M 0 --policy hg "
      "--seed 7 --out-dir " + dir.string(), &out);
  CHECK(code == 0);
  auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["results"]["mean_cost"].get<double>() > 0.0);
  CHECK(summary["config"]["seed"].get<std::uint64_t>() == 7);
  auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["config_hash"] == summary["config_hash"]);
  CHECK(!manifest["started_at"].get<std::string>().empty());
}

TEST_CASE("cli: reruns are byte-identical apart from the manifest timestamps") {
  fs::path d1 = fs::temp_directory_path() / "smatch_t2a";
  fs::path d2 = fs::temp_directory_path() / "smatch_t2b";
  fs::remove_all(d1);
  fs::remove_all(d2);
  std::string args =
      "simulate --model fully_dynamic --d 2 --m 64 --N 5000 --init even_grid "
      "--seed 11 --reps 2 --out-dir ";
  CHECK(run_cli(args + d1.string()) == 0);
  CHECK(run_cli(args + d2.string()) == 0);
  CHECK(slurp(d1 / "summary.json") == slurp(d2 / "summary.json"));
}

TEST_CASE("cli: missing required field exits 1 and names the field") {
  std::string out;
  int code = run_cli("simulate --model fully_dynamic --d 2 --N 1000", &out);
  CHECK(code == 1);
  CHECK(out.find("m") != std::string::npos);
}

TEST_CASE("cli: sweep writes csv with quoted per-level json and a fit") {
  fs::path dir = fs::temp_directory_path() / "smatch_t3";
  fs::remove_all(dir);
  int code = run_cli(
      "sweep --model semi_dynamic --d 1 --vary N --values 256,512,1024,2048 "
      "--excess-ratio 1.0 --reps 3 --seed 5 --out-dir " + dir.string());
  CHECK(code == 0);
  std::string csv = slurp(dir / "sweep.csv");
  CHECK(csv.find("scale_param,value,mean_cost,stderr,per_level_json") == 0);
  CHECK(csv.find("\r\n") != std::string::npos);
  CHECK(csv.find("\"[{") != std::string::npos);  // quoted JSON field
  auto fit = nlohmann::json::parse(slurp(dir / "fit.json"));
  CHECK(fit.contains("exponent"));
  CHECK(fit["points"].size() == 4);

  // reps=1 leaves the stderr column empty and the fit unweighted
  fs::path dir1 = fs::temp_directory_path() / "smatch_t3b";
  fs::remove_all(dir1);
  code = run_cli(
      "sweep --model semi_dynamic --d 1 --vary N --values 256,512,1024 "
      "--reps 1 --seed 5 --out-dir " + dir1.string());
  CHECK(code == 0);
  std::string csv1 = slurp(dir1 / "sweep.csv");
  CHECK(csv1.find(",,") != std::string::npos);  // empty stderr column
  auto fit1 = nlohmann::json::parse(slurp(dir1 / "fit.json"));
  CHECK(fit1["points"][0]["stderr"].is_null());

  // empty grid is a config error
  CHECK(run_cli("sweep --model semi_dynamic --d 1 --vary N") == 1);
}

TEST_CASE("cli: unwritable output directory exits 2") {
  std::string out;
  int code = run_cli(
      "simulate --model semi_dynamic --d 1 --N 64 "
      "--out-dir /proc/definitely/not/writable", &out);
  CHECK(code == 2);
}

TEST_CASE("cli: recipe sweep fits the line-matching rate") {
  fs::path dir = fs::temp_directory_path() / "smatch_t5";
  fs::remove_all(dir);
  int code = run_cli("sweep --recipe static-line --seed 3 --out-dir " +
                     dir.string());
  CHECK(code == 0);
  auto fit = nlohmann::json::parse(slurp(dir / "fit.json"));
  CHECK(std::fabs(fit["exponent"].get<double>() + 0.5) < 0.1);
}

TEST_CASE("cli: verify handles unknown suites and runs the oracle suite") {
  std::string out;
  CHECK(run_cli("verify nonsense", &out) == 1);
  CHECK(run_cli("verify oracles", &out) == 0);
  CHECK(out.find("[PASS] criterion 1") != std::string::npos);
}

TEST_CASE("cli: config file provides defaults, flags override") {
  fs::path dir = fs::temp_directory_path() / "smatch_t4";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path ini = dir / "run.ini";
  {
    std::ofstream f(ini);
    f << "[simulate]\n"
         "model=semi_dynamic\n"
         "d=1\n"
         "N=512\n"
         "seed=9\n"
         "out-dir=" << (dir / "out").string() << "\n";
  }
  CHECK(run_cli("--config " + ini.string() + " simulate --seed 10") == 0);
  auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["config"]["N"].get<int>() == 512);
  CHECK(summary["config"]["seed"].get<int>() == 10);  // flag wins
}
