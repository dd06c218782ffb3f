// Runs the dascl executable end to end and checks files and exit codes.

#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include "dascl/io.h"

namespace {

namespace fs = std::filesystem;
using dascl::io::Json;
using dascl::io::ReadTextFile;
using dascl::io::WriteTextFile;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dascl_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(const std::string& args) {
    const std::string cmd = std::string(DASCL_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  void MakeSynthetic() {
    ASSERT_EQ(Run("make-synthetic --out-dir " + Path("data") + " --seed 5 --train 80 --val 40 --test 40"), 0);
  }

  void WriteConfig(const std::string& name, const std::string& out_dir, const std::string& mode = "CE_DASCL") {
    Json cfg = {{"train", "data/train.jsonl"},
                {"val", "data/val.jsonl"},
                {"test", "data/test.jsonl"},
                {"dictionaries",
                 Json::array({Json{{"path", "data/positive.txt"}, {"token", "<positive>"}},
                              Json{{"path", "data/negative.txt"}, {"token", "<negative>"}}})},
                {"mode", mode},
                {"epochs", 4},
                {"batch_size", 8},
                {"learning_rate", 0.01},
                {"seed", 3},
                {"dims", Json{{"embedding", 12}, {"hidden", 12}, {"projection", 6}}},
                {"output_dir", out_dir}};
    WriteTextFile(dir_ / name, dascl::io::Dump(cfg));
  }

  fs::path dir_;
};

TEST_F(CliTest, SimplifyRewritesTextOnly) {
  WriteTextFile(dir_ / "pos.txt", "warm\nwonderfully\nvividly\nbeautiful\n");
  WriteTextFile(dir_ / "in.jsonl",
                "{\"id\":\"r1\",\"text\":\"A wonderfully warm human drama that remains vividly in memory long "
                "after viewing\",\"label\":1,\"source\":\"x\"}\n");
  ASSERT_EQ(Run("simplify --dict '" + Path("pos.txt") + ":<positive>' --in " + Path("in.jsonl") + " --out " +
                Path("out.jsonl")),
            0);
  EXPECT_EQ(ReadTextFile(dir_ / "out.jsonl"),
            "{\"id\":\"r1\",\"text\":\"a <positive> <positive> human drama that remains <positive> in memory "
            "long after viewing\",\"label\":1,\"source\":\"x\"}\n");
}

TEST_F(CliTest, SimplifyRejectsBadToken) {
  WriteTextFile(dir_ / "pos.txt", "warm\n");
  WriteTextFile(dir_ / "in.jsonl", "{\"id\":\"r1\",\"text\":\"warm\",\"label\":1}\n");
  EXPECT_EQ(Run("simplify --dict '" + Path("pos.txt") + ":<Positive>' --in " + Path("in.jsonl") + " --out " +
                Path("out.jsonl")),
            1);
  EXPECT_EQ(Run("simplify --dict '" + Path("nope.txt") + ":<positive>' --in " + Path("in.jsonl") + " --out " +
                Path("out.jsonl")),
            1);
  EXPECT_FALSE(fs::exists(dir_ / "out.jsonl"));
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(Run(""), 1);
  EXPECT_EQ(Run("train"), 1);
  EXPECT_EQ(Run("frobnicate"), 1);
}

TEST_F(CliTest, GradCheckPasses) {
  EXPECT_EQ(Run("gradcheck --trials 10 --seed 4"), 0);
  const std::string out = ReadTextFile(dir_ / "stdout.txt");
  EXPECT_NE(out.find("CE_DASCL_DA"), std::string::npos);
  EXPECT_EQ(out.find("FAIL"), std::string::npos);
  EXPECT_EQ(Run("gradcheck --mode BOGUS"), 1);
}

TEST_F(CliTest, TrainEvalExportAreDeterministic) {
  MakeSynthetic();
  WriteConfig("a.json", "run_a");
  WriteConfig("b.json", "run_b");
  ASSERT_EQ(Run("train --config " + Path("a.json")), 0) << ReadTextFile(dir_ / "stderr.txt");
  ASSERT_EQ(Run("train --config " + Path("b.json")), 0);
  EXPECT_EQ(ReadTextFile(dir_ / "run_a/history.json"), ReadTextFile(dir_ / "run_b/history.json"));
  EXPECT_EQ(ReadTextFile(dir_ / "run_a/checkpoint.json"), ReadTextFile(dir_ / "run_b/checkpoint.json"));
  EXPECT_TRUE(fs::exists(dir_ / "run_a/test_report.json"));

  Json history = Json::parse(ReadTextFile(dir_ / "run_a/history.json"));
  EXPECT_EQ(history["epochs"].size(), 4u);
  EXPECT_GE(history["selected_epoch"].get<int>(), 1);
  EXPECT_EQ(history["config"]["mode"], "CE_DASCL");

  ASSERT_EQ(Run("eval --checkpoint " + Path("run_a/checkpoint.json") + " --in " + Path("data/test.jsonl") +
                " --out " + Path("report.json")),
            0);
  EXPECT_EQ(ReadTextFile(dir_ / "report.json"), ReadTextFile(dir_ / "run_a/test_report.json"));

  ASSERT_EQ(Run("export-embeddings --checkpoint " + Path("run_a/checkpoint.json") + " --in " +
                Path("data/val.jsonl") + " --out " + Path("emb.tsv")),
            0);
  EXPECT_EQ(dascl::ReadEmbeddings(dir_ / "emb.tsv").ids.size(), 40u);
}

TEST_F(CliTest, InvalidConfigCreatesNoOutputs) {
  MakeSynthetic();
  WriteConfig("bad.json", "run_bad", "NOPE");
  EXPECT_EQ(Run("train --config " + Path("bad.json")), 1);
  EXPECT_NE(ReadTextFile(dir_ / "stderr.txt").find("$.mode"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "run_bad"));
}

TEST_F(CliTest, EvalMissingCheckpoint) {
  MakeSynthetic();
  EXPECT_EQ(Run("eval --checkpoint " + Path("none.json") + " --in " + Path("data/test.jsonl")), 1);
}

}  // namespace
