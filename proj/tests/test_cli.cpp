#include "commands.hpp"
#include "csv.hpp"
#include "verify.hpp"

#include <doctest.h>
#include <json.hpp>

#include <clocale>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using bbq::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "bbqlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bbqlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("alpha grid parsing") {
  const auto g = bbq::cli::parse_alpha_grid("1:3:0.1");
  REQUIRE(g.size() == 21);
  CHECK(g.front() == 1.0);
  CHECK(g.back() == 3.0);
  CHECK(g[7] == 1.7);
  CHECK(bbq::cli::parse_alpha_grid("2:2:1").size() == 1);
  for (const char* bad : {"1:3", "1:3:0", "3:1:0.1", "a:b:c", "1:3:0.1:4", "1::0.1"}) {
    const std::string text = bad;
    CAPTURE(text);
    CHECK_THROWS_AS(bbq::cli::parse_alpha_grid(bad), bbq::cli::UsageError);
  }
}

TEST_CASE("number formatting is locale independent and round-trips") {
  CHECK(bbq::cli::format_double(0.1) == "0.1");
  CHECK(bbq::cli::format_double(-2.5) == "-2.5");
  CHECK(bbq::cli::format_double(0.0) == "0");
  CHECK(bbq::cli::format_double(1e-20) == "1e-20");
  const double v = 0.1 + 0.2;
  CHECK(std::stod(bbq::cli::format_double(v)) == v);
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");  // may not exist; harmless either way
  CHECK(bbq::cli::format_double(1.5) == "1.5");
  std::setlocale(LC_NUMERIC, "C");
}

TEST_CASE("output stem") {
  CHECK(bbq::cli::output_stem("run.csv") == "run");
  CHECK(bbq::cli::output_stem("dir/run.json") == "dir/run");
  CHECK(bbq::cli::output_stem("run") == "run");
  CHECK(bbq::cli::output_stem(".csv") == ".csv");
}

TEST_CASE("gamma: grid gives one row per alpha") {
  const auto r = invoke({"gamma", "--alphas", "1:3:0.1", "--transform", "rot2", "--samples", "20000"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 22);
  CHECK(l[0] == "alpha,gamma1,gamma1_se,gamma12,gamma12_se");
  CHECK(l[1].rfind("1,", 0) == 0);
  CHECK(l[21].rfind("3,", 0) == 0);
}

TEST_CASE("gamma: single alpha, fine-regime values") {
  const auto r = invoke({"gamma", "--alpha", "4", "--transform", "dct:8"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 2);
  std::vector<double> v;
  std::stringstream row(l[1]);
  for (std::string cell; std::getline(row, cell, ',');) v.push_back(std::stod(cell));
  REQUIRE(v.size() == 5);
  CHECK(v[0] == 4.0);
  CHECK(std::fabs(v[1] - 1.0) <= 3.0 * v[2]);
  CHECK(std::fabs(v[3]) <= 3.0 * v[4]);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(invoke({"gamma", "--alpha", "4", "--samples", "0"}).code == 1);
  CHECK(invoke({"gamma", "--alpha", "0.5"}).code == 1);
  CHECK(invoke({"gamma", "--alphas", "3:1:0.1"}).code == 1);
  CHECK(invoke({"gamma", "--alpha", "2", "--transform", "dct:0"}).code == 1);
  CHECK(invoke({"gamma", "--bogus"}).code == 1);
  CHECK(invoke({"snrloss", "--scenario", "three_baseband"}).code == 1);
  CHECK(invoke({"simulate", "--case", "z"}).code == 1);
  CHECK(invoke({"simulate", "--case", "custom", "--rho", "0.5"}).code == 1);
  CHECK(invoke({"simulate", "--case", "a", "--rho", "0.5"}).code == 1);
  CHECK(invoke({"simulate", "--case", "custom", "--rho", "1.5", "--sigma", "1", "--block-len", "4"}).code == 1);
  CHECK(invoke({"verify", "--suite", "nonsense"}).code == 1);
  CHECK(invoke({"verify"}).code == 1);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"--help"}).code == 0);
  const auto r = invoke({"gamma", "--alpha", "4", "--samples", "0"});
  CHECK(r.err.find("samples") != std::string::npos);
}

TEST_CASE("unwritable output path is an error") {
  const auto r = invoke({"snrloss", "--alpha", "4", "--out", "/nonexistent_dir_bbq/x.csv"});
  CHECK(r.code != 0);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("snrloss rows") {
  const auto two = invoke({"snrloss", "--alpha", "8", "--alpha", "2"});
  REQUIRE(two.code == 0);
  const auto l = lines(two.out);
  REQUIRE(l.size() == 3);
  CHECK(l[0] == "alpha,snr_loss_db");
  CHECK(std::stod(l[1].substr(2)) == doctest::Approx(0.134).epsilon(0.005));
  CHECK(std::stod(l[2].substr(2)) == doctest::Approx(1.7609).epsilon(0.001));

  const auto one = invoke({"snrloss", "--scenario", "one_baseband", "--alpha", "1"});
  REQUIRE(one.code == 0);
  CHECK(std::stod(lines(one.out)[1].substr(2)) == doctest::Approx(3.0103).epsilon(1e-4));

  const auto max = invoke({"snrloss", "--alpha", "1", "--transform", "rot2"});
  REQUIRE(max.code == 0);
  CHECK(std::stod(lines(max.out)[1].substr(2)) == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("output files carry a manifest and are reproducible") {
  const auto dir = scratch_dir("manifest");
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  REQUIRE(invoke({"gamma", "--alphas", "1:1.5:0.25", "--samples", "5000", "--seed", "3", "--out", a}).code == 0);
  REQUIRE(invoke({"gamma", "--alphas", "1:1.5:0.25", "--samples", "5000", "--seed", "3", "--out", b}).code == 0);
  CHECK(slurp(a) == slurp(b));
  const auto m = nlohmann::json::parse(slurp(dir / "a.manifest.json"));
  CHECK(m["command"] == "gamma");
  CHECK(m["seeds"][0] == 3);
  CHECK(m["parameters"]["samples"] == 5000);
  CHECK(m.contains("tool_version"));
  CHECK(m.contains("timestamp"));

  const std::string j = (dir / "c.json").string();
  REQUIRE(invoke({"snrloss", "--alpha", "3", "--format", "json", "--out", j}).code == 0);
  const auto doc = nlohmann::json::parse(slurp(j));
  CHECK(doc["manifest"]["command"] == "snrloss");
  CHECK(doc["rows"][0]["alpha"] == 3.0);
  fs::remove_all(dir);
}

TEST_CASE("simulate: small custom run warns and writes one file per mode") {
  const auto dir = scratch_dir("simulate");
  const std::string stem = (dir / "run.csv").string();
  const auto r = invoke({"simulate", "--case", "custom", "--rho", "0.5", "--sigma", "1", "--block-len", "4",
                         "--blocks", "10", "--samples", "2000", "--out", stem});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  const auto coarse = lines(slurp(dir / "run.coarse.csv"));
  const auto neg = lines(slurp(dir / "run.negligible.csv"));
  const auto gaps = lines(slurp(dir / "run.gaps.csv"));
  REQUIRE(coarse.size() == 5);
  REQUIRE(neg.size() == 5);
  REQUIRE(gaps.size() == 5);
  CHECK(coarse[0] == "bits_per_sample,mse,snr_db,q2");
  CHECK(gaps[0] == "q2,alpha,gap_db,predicted_gap_db");
  CHECK(fs::exists(dir / "run.manifest.json"));
  fs::remove_all(dir);
}

TEST_CASE("simulate: case a reproduces the expected gaps") {
  const auto r = invoke({"simulate", "--case", "a", "--samples", "20000"});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  const auto l = lines(r.out);
  REQUIRE(l.size() == 5);
  const double expected[4] = {0.134, 0.512, 1.761, 3.0};
  const double tol[4] = {0.10, 0.10, 0.15, 0.3};
  for (int i = 0; i < 4; ++i) {
    std::vector<double> v;
    std::stringstream row(l[static_cast<std::size_t>(i) + 1]);
    for (std::string cell; std::getline(row, cell, ',');) v.push_back(std::stod(cell));
    CHECK(std::fabs(v[2] - expected[i]) <= tol[i]);
  }
  const auto again = invoke({"simulate", "--case", "a", "--samples", "20000"});
  CHECK(again.out == r.out);
}

TEST_CASE("simulate: single mode and json") {
  const auto r = invoke({"simulate", "--case", "a", "--blocks", "2000", "--mode", "coarse", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["coarse"].size() == 4);
  CHECK_FALSE(doc.contains("gaps"));
  CHECK(doc["manifest"]["parameters"]["block_len"] == 16);
}

TEST_CASE("verify: report layout and exit code") {
  const auto r = invoke({"verify", "--suite", "hypercube"});
  CHECK(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  REQUIRE(doc.contains("manifest"));
  REQUIRE(doc["checks"].is_array());
  CHECK(doc["checks"].size() > 20);
  for (const auto& c : doc["checks"]) {
    CHECK(c.contains("name"));
    CHECK(c.contains("value"));
    CHECK(c.contains("reference"));
    CHECK(c.contains("tolerance"));
    CHECK(c["pass"] == true);
  }
  // alternative names
  CHECK(invoke({"verify", "--suite", "lemma2"}).code == 0);
}

TEST_CASE("verify: fast suites pass") {
  for (const std::string suite : {"prediction", "lemma1", "centroid"}) {
    CAPTURE(suite);
    CHECK(invoke({"verify", "--suite", suite}).code == 0);
  }
  CHECK(bbq::cli::suite_names().size() == 5);
}
