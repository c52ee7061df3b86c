#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "test_util.hpp"

namespace fs = std::filesystem;
using cstag::testing::data_path;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cstag_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CSTAG_BINARY + "\" " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("cstag_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpListsEveryFlag) {
  const auto top = cstag_cli("--help");
  EXPECT_EQ(top.code, 0);
  for (const char* flag : {"--seed", "--json", "--quiet", "--lang-map", "--lenient", "--neutral-breaks",
                           "--allow-overlap", "--version"})
    EXPECT_NE(top.out.find(flag), std::string::npos) << flag;
  const std::map<std::string, std::vector<std::string>> per_command = {
      {"stats", {"--task", "--fractions", "--table", "--out"}},
      {"synth", {"--sentences", "--p-en2x", "--p-x2en", "--p-neutral", "--min-len", "--max-len", "--start",
                 "--words-per-cell", "--suffix-rate", "--vocab-seed", "--zipf", "--out"}},
      {"corrupt", {"--in", "--direction", "--p", "--scope", "--out"}},
      {"split", {"--in", "--train", "--dev", "--test", "--out-dir"}},
      {"strip", {"--in", "--out"}},
      {"train", {"--train", "--mode", "--epochs", "--templates", "--out"}},
      {"predict", {"--model", "--in", "--out"}},
      {"eval", {"--gold", "--pred", "--table", "--per-label", "--out"}},
      {"selftrain", {"--labeled", "--dev", "--unlabeled", "--bias", "--fix-direction", "--batch", "--max-iters",
                     "--patience", "--min-biased-seed", "--annotator-epochs", "--end-epochs", "--latest-only",
                     "--out-dir"}},
      {"curve", {"--train", "--dev", "--mode", "--epochs", "--fractions", "--out"}},
      {"bench", {"--labeled", "--dev", "--test", "--unlabeled", "--synthetic", "--seeds", "--out-dir"}},
  };
  for (const auto& [cmd, flags] : per_command) {
    const auto r = cstag_cli(cmd + " --help");
    EXPECT_EQ(r.code, 0) << cmd;
    for (const auto& f : flags) EXPECT_NE(r.out.find(f), std::string::npos) << cmd << " " << f;
  }
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cstag_cli("").code, 1);
  EXPECT_EQ(cstag_cli("stats --bogus x").code, 1);
  EXPECT_EQ(cstag_cli("eval --pred " + data_path("pos_pred.tsv").string()).code, 1);
  EXPECT_EQ(cstag_cli("stats --task klingon " + data_path("pos_gold.tsv").string()).code, 1);
  EXPECT_EQ(cstag_cli("stats --fractions 0.5,0.2 " + data_path("pos_gold.tsv").string()).code, 1);
}

TEST_F(Cli, DataErrorsExitTwo) {
  std::ofstream(path("bad.tsv")) << "a\tNOUN\ten\nb\tVERB\n";
  const auto r = cstag_cli("stats " + path("bad.tsv"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("bad.tsv:2"), std::string::npos) << r.out;
  std::ofstream(path("klingon.tsv")) << "a\tNOUN\ttlh\n";
  EXPECT_EQ(cstag_cli("stats " + path("klingon.tsv")).code, 2);
  EXPECT_EQ(cstag_cli("--lenient stats " + path("klingon.tsv")).code, 0);
}

TEST_F(Cli, CorruptModelIsADataError) {
  std::ofstream(path("model.bin")) << "not a model";
  EXPECT_EQ(cstag_cli("predict --model " + path("model.bin") + " --in " + data_path("pos_gold.tsv").string() +
                      " --out " + path("p.tsv"))
                .code,
            2);
}

TEST_F(Cli, UnwritableOutputExitsThree) {
  EXPECT_EQ(cstag_cli("strip --in " + data_path("pos_gold.tsv").string() + " --out " + path("missing/dir/x.tsv")).code,
            3);
}

TEST_F(Cli, StatsJson) {
  const auto r = cstag_cli("stats --fractions 0.5,1 " + data_path("pos_gold.tsv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["n_sentences"], 3);
  EXPECT_EQ(j["a"], 3);
  EXPECT_EQ(j["b"], 1);
  EXPECT_DOUBLE_EQ(j["s"].get<double>(), 3.0);
  EXPECT_EQ(j["direction_histogram"].size(), 2u);
}

TEST_F(Cli, EvalJsonMatchesFixture) {
  const auto r = cstag_cli("--json eval --gold " + data_path("pos_gold.tsv").string() + " --pred " +
                           data_path("pos_pred.tsv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["overall"]["acc"].get<double>(), 10.0 / 13.0, 1e-12);
  EXPECT_NEAR(j["gap"].get<double>(), 1.0 / 3.0, 1e-12);
}

TEST_F(Cli, PipelineWithManifests) {
  ASSERT_EQ(cstag_cli("--quiet --seed 5 synth --sentences 300 --out " + path("all.tsv")).code, 0);
  EXPECT_TRUE(fs::exists(path("all.tsv.manifest.json")));
  ASSERT_EQ(cstag_cli("--seed 5 split --in " + path("all.tsv") + " --out-dir " + path("parts")).code, 0);
  EXPECT_TRUE(fs::exists(path("parts/manifest.json")));
  ASSERT_EQ(cstag_cli("--quiet train --epochs 3 --train " + path("parts/train.tsv") + " --out " + path("m.bin")).code, 0);
  ASSERT_EQ(cstag_cli("predict --model " + path("m.bin") + " --in " + path("parts/test.tsv") + " --out " +
                      path("pred.tsv"))
                .code,
            0);
  const auto ev = cstag_cli("eval --gold " + path("parts/test.tsv") + " --pred " + path("pred.tsv"));
  ASSERT_EQ(ev.code, 0) << ev.out;
  EXPECT_NE(ev.out.find("Gap"), std::string::npos);

  const auto m = nlohmann::json::parse(slurp(path("m.bin.manifest.json")));
  EXPECT_EQ(m["command"], "train");
  EXPECT_EQ(m["inputs"].size(), 1u);
  EXPECT_EQ(m["inputs"][0]["sha256"].get<std::string>().size(), 64u);
  EXPECT_EQ(m["seeds"][0], 13);
}

TEST_F(Cli, SelftrainWritesArtifacts) {
  ASSERT_EQ(cstag_cli("--quiet synth --sentences 400 --out " + path("all.tsv")).code, 0);
  ASSERT_EQ(cstag_cli("split --in " + path("all.tsv") + " --train 0.5 --dev 0.25 --test 0.25 --out-dir " +
                      path("p"))
                .code,
            0);
  ASSERT_EQ(cstag_cli("strip --in " + path("p/test.tsv") + " --out " + path("pool.tsv")).code, 0);
  const auto r = cstag_cli("--quiet selftrain --labeled " + path("p/train.tsv") + " --dev " + path("p/dev.tsv") +
                           " --unlabeled " + path("pool.tsv") +
                           " --batch 20 --max-iters 2 --annotator-epochs 2 --end-epochs 2 --out-dir " + path("st"));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"iterations.jsonl", "result.json", "report.txt", "augmented.tsv", "model.bin", "manifest.json"})
    EXPECT_TRUE(fs::exists(path(std::string("st/") + f))) << f;
  const auto result = nlohmann::json::parse(slurp(path("st/result.json")));
  EXPECT_TRUE(result.contains("best_iteration"));
}

TEST_F(Cli, OverlapBetweenPoolAndDevIsADataError) {
  ASSERT_EQ(cstag_cli("--quiet synth --sentences 100 --out " + path("all.tsv")).code, 0);
  ASSERT_EQ(cstag_cli("strip --in " + path("all.tsv") + " --out " + path("pool.tsv")).code, 0);
  const std::string args = "selftrain --labeled " + path("all.tsv") + " --dev " + path("all.tsv") + " --unlabeled " +
                           path("pool.tsv") + " --batch 10 --max-iters 1 --end-epochs 1 --annotator-epochs 1 --out-dir " +
                           path("st");
  EXPECT_EQ(cstag_cli("--quiet " + args).code, 2);
  EXPECT_EQ(cstag_cli("--quiet --allow-overlap " + args).code, 0);
}
