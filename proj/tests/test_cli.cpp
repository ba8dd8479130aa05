#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("pafit_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run pafit(const std::string& args) {
  const auto out = work_dir() / "stdout.txt", err = work_dir() / "stderr.txt";
  const std::string cmd = std::string("\"") + PAFIT_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string path(const std::string& name) { return (work_dir() / name).string(); }

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("help lists every flag and exits 0") {
  const auto top = pafit("--help");
  CHECK(top.code == 0);
  for (const char* sub : {"simulate", "fit", "limits", "experiment", "ingest"}) CHECK(top.out.find(sub) != std::string::npos);
  const auto sim = pafit("simulate --help");
  CHECK(sim.code == 0);
  for (const char* flag : {"--model", "--n", "--seed", "--a", "--delta", "--pi", "--gamma", "--out"})
    CHECK(sim.out.find(flag) != std::string::npos);
  const auto ing = pafit("ingest --help");
  CHECK(ing.code == 0);
  for (const char* flag : {"--input", "--n-limit", "--top-fraction", "--blocklist", "--labels", "--report"})
    CHECK(ing.out.find(flag) != std::string::npos);
  CHECK(pafit("fit --help").code == 0);
  CHECK(pafit("limits --help").code == 0);
  CHECK(pafit("experiment --help").code == 0);
  CHECK(pafit("--version").code == 0);
}

TEST_CASE("usage errors exit 2") {
  CHECK(pafit("").code == 2);
  CHECK(pafit("simulate --model bo --n 10 --seed 1").code == 2);  // missing --a
  CHECK(pafit("simulate --model bogus --n 10 --seed 1").code == 2);
  CHECK(pafit("simulate --model hpam --pi 0.3,0.7 --gamma 1,0.5,0.5 --n 10 --seed 1").code == 2);
  CHECK(pafit("simulate --model bo --a -1 --n 10 --seed 1").code == 2);
  CHECK(pafit("limits --model bo").code == 2);
  CHECK(pafit("limits --model bo --a0 0").code == 2);
  CHECK(pafit("fit --model bo --input /nonexistent.csv").code == 2);
}

TEST_CASE("simulate writes identical files for identical flags") {
  const auto a = pafit("simulate --model bo --a 1.0 --n 100 --seed 7 --out " + path("h1.csv"));
  const auto b = pafit("simulate --model bo --a 1.0 --n 100 --seed 7 --out " + path("h2.csv"));
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const auto text = slurp(path("h1.csv"));
  CHECK(lines(text) == 101);  // header + 100 events
  CHECK(text == slurp(path("h2.csv")));
  CHECK(a.out.find("config:") != std::string::npos);
  CHECK(a.out.find("max_degree=") != std::string::npos);

  const auto h = pafit("simulate --model hpam --pi 0.3,0.7 --gamma 1,0.5,0.5,1.5 --n 100 --seed 7");
  REQUIRE(h.code == 0);
  CHECK(lines(h.out) == 101);
  CHECK(h.out.find(",1,") != std::string::npos);
}

TEST_CASE("fit reports estimates and exit codes") {
  REQUIRE(pafit("simulate --model lcd --n 1000 --seed 3 --out " + path("lcd.csv")).code == 0);
  const auto fit = pafit("fit --model bo --input " + path("lcd.csv") + " --out " + path("fit.json"));
  REQUIRE(fit.code == 0);
  const auto j = json::parse(slurp(path("fit.json")));
  CHECK(std::abs(j.at("a_hat").get<double>() - 1.0) < 0.35);
  CHECK(j.at("std_error").get<double>() > 0.0);
  CHECK(j.at("converged").get<bool>());

  REQUIRE(pafit("simulate --model bo --a 2 --n 1000 --seed 3 --out " + path("bo2.csv")).code == 0);
  const auto bounded = pafit("fit --model bo --eps 0.5 --max 0.6 --input " + path("bo2.csv"));
  REQUIRE(bounded.code == 0);
  const auto b = json::parse(bounded.out);
  CHECK(b.at("at_boundary").get<bool>());
  CHECK(b.at("a_hat").get<double>() == 0.6);

  CHECK(pafit("fit --model hpam --input " + path("lcd.csv")).code == 3);

  REQUIRE(pafit("simulate --model hpam --pi 0.3,0.7 --gamma 1,0.5,0.5,1.5 --n 1000 --seed 2 --out " + path("hp.csv"))
              .code == 0);
  const auto hf = pafit("fit --model hpam --input " + path("hp.csv"));
  REQUIRE(hf.code == 0);
  CHECK(json::parse(hf.out).at("K") == 2);

  std::ofstream(path("broken.csv")) << "node,target,membership,target_membership\n1,1,,\n2,5,,\n";
  CHECK(pafit("fit --model bo --input " + path("broken.csv")).code == 3);
}

TEST_CASE("limits subcommand") {
  const auto bo = pafit("limits --model bo --a0 1");
  REQUIRE(bo.code == 0);
  const auto j = json::parse(bo.out);
  CHECK(j.at("p")[0].get<double>() == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(bo.out == pafit("limits --model bo --a0 1").out);

  const auto hp = pafit("limits --model hpam --pi 0.3,0.7 --gamma 2,2,2,2");
  REQUIRE(hp.code == 0);
  const auto h = json::parse(hp.out);
  CHECK(h.at("p0")[0].get<double>() == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(h.at("p0")[1].get<double>() == doctest::Approx(1.4).epsilon(1e-12));
}

TEST_CASE("experiment runs the shipped BO sweep config") {
  const auto dir = path("bo_sweep");
  const auto r = pafit("experiment --config \"" PAFIT_SOURCE_DIR "/configs/bo_sweep.json\" --output-dir " + dir);
  REQUIRE(r.code == 0);
  const auto summary = slurp(fs::path(dir) / "summary.csv");
  CHECK(lines(summary) == 13);  // header + 3 values of a x 4 sample sizes
  CHECK(lines(slurp(fs::path(dir) / "raw_estimates.csv")) == 1 + 3 * 4 * 200);
}

TEST_CASE("experiment config errors exit 2 with the field path") {
  std::ofstream(path("bad.json")) << R"({"model": "BO", "true_params": {"a": 1}, "sample_sizes": [100, 50],
    "replications": 2, "base_seed": 0, "output_path": "x"})";
  const auto r = pafit("experiment --config " + path("bad.json"));
  CHECK(r.code == 2);
  CHECK(r.err.find("/sample_sizes/1") != std::string::npos);
}

TEST_CASE("ingest on the shipped fixture") {
  const auto r = pafit("ingest --input \"" PAFIT_SOURCE_DIR "/tests/fixtures/transactions.csv\" --top-fraction 0.25 "
                       "--blocklist 1Dice --out " + path("ingested.csv") + " --report " + path("report.json"));
  REQUIRE(r.code == 0);
  CHECK(lines(slurp(path("ingested.csv"))) == 9);
  const auto rep = json::parse(slurp(path("report.json")));
  CHECK(rep.at("dropped_blocked") == 2);
  CHECK(rep.at("dropped_existing_pair") == 2);
  CHECK(pafit("fit --model hpam --input " + path("ingested.csv")).code == 0);

  CHECK(pafit("ingest --input \"" PAFIT_SOURCE_DIR "/tests/fixtures/transactions.csv\" --top-fraction 1.5").code == 2);
  std::ofstream(path("empty.csv")) << "receiver,sender,timestamp\n";
  CHECK(pafit("ingest --input " + path("empty.csv")).code == 3);
}
