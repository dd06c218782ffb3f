#include "dascl/io.h"

#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include "dascl/error.h"
#include "dascl/synthetic.h"

namespace dascl::io {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dascl_io_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    WriteTextFile(dir_ / "train.jsonl", "{\"id\":\"a\",\"text\":\"good\",\"label\":1}\n");
    WriteTextFile(dir_ / "val.jsonl", "{\"id\":\"b\",\"text\":\"bad\",\"label\":0}\n");
    WriteTextFile(dir_ / "pos.txt", "good\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string ErrorOf(const Json& doc) {
    try {
      ParseExperimentConfig(doc, dir_);
    } catch (const ValidationError& e) {
      return e.what();
    }
    return "";
  }

  Json MinimalConfig() {
    return Json{{"train", "train.jsonl"}, {"val", "val.jsonl"}, {"mode", "CE_DASCL"}, {"output_dir", "out"}};
  }

  fs::path dir_;
};

Corpus ParseString(const std::string& text) {
  std::istringstream in(text);
  return ParseCorpusJsonl(in, "mem");
}

TEST(CorpusJsonlTest, ParsesAndSkipsBlankLines) {
  Corpus c = ParseString("{\"id\":\"1\",\"text\":\"hi there\",\"label\":0}\n\n{\"id\":\"2\",\"text\":\"x\",\"label\":1}\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[1].id, "2");
  EXPECT_EQ(c[0].text, "hi there");
  EXPECT_EQ(ParseString(CorpusToJsonl(c)).size(), 2u);
}

TEST(CorpusJsonlTest, ErrorsNameTheLine) {
  auto message = [](const std::string& text) {
    try {
      ParseString(text);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("{\"id\":\"1\",\"text\":\"a\",\"label\":0}\nnot json\n").find("mem:2"), std::string::npos);
  EXPECT_NE(message("{\"id\":\"1\",\"label\":0}\n").find("text"), std::string::npos);
  EXPECT_NE(message("{\"id\":\"1\",\"text\":\"a\",\"label\":-1}\n").find("label"), std::string::npos);
  EXPECT_NE(message("{\"id\":\"1\",\"text\":\"a\",\"label\":\"pos\"}\n").find("label"), std::string::npos);
  EXPECT_NE(message("{\"id\":\"1\",\"text\":\"a\",\"label\":0}\n{\"id\":\"1\",\"text\":\"b\",\"label\":1}\n")
                .find("mem:2"),
            std::string::npos);
}

TEST(DictionarySpecTest, SplitsAtLastColon) {
  DictionarySpec s = ParseDictionarySpec("C:/dicts/pos.txt:<positive>");
  EXPECT_EQ(s.path, fs::path("C:/dicts/pos.txt"));
  EXPECT_EQ(s.token, "<positive>");
  EXPECT_THROW(ParseDictionarySpec("pos.txt"), ValidationError);
  EXPECT_THROW(ParseDictionarySpec("pos.txt:positive"), ValidationError);
}

TEST_F(IoTest, MinimalConfigUsesDefaults) {
  ExperimentConfig cfg = ParseExperimentConfig(MinimalConfig(), dir_);
  EXPECT_EQ(cfg.train_path, dir_ / "train.jsonl");
  EXPECT_EQ(cfg.output_dir, dir_ / "out");
  EXPECT_EQ(cfg.train.loss.mode, LossMode::kCEDASCL);
  EXPECT_EQ(cfg.train.loss.lambda, 0.9);
  EXPECT_EQ(cfg.train.tau_init, 0.3);
  EXPECT_EQ(cfg.train.batch_size, 16);
  EXPECT_EQ(cfg.train.epochs, 50);
  EXPECT_FALSE(cfg.test_path.has_value());
}

TEST_F(IoTest, FullConfig) {
  Json doc = MinimalConfig();
  doc["dictionaries"] = Json::array({Json{{"path", "pos.txt"}, {"token", "<positive>"}}});
  doc["lambda"] = 0.5;
  doc["dims"] = Json{{"embedding", 8}, {"hidden", 6}, {"projection", 4}, {"classes", 3}};
  doc["selection_metric"] = "f1_positive";
  doc["few_shot_n"] = 1;
  doc["grad_clip"] = 5.0;
  doc["optimizer"] = "adam";
  ExperimentConfig cfg = ParseExperimentConfig(doc, dir_);
  ASSERT_EQ(cfg.dictionaries.size(), 1u);
  EXPECT_EQ(cfg.train.dims.classes, 3);
  EXPECT_EQ(cfg.train.selection, SelectionMetric::kF1Positive);
  EXPECT_EQ(*cfg.train.few_shot_n, 1);
  EXPECT_EQ(*cfg.train.grad_clip, 5.0);
}

TEST_F(IoTest, SchemaErrorsListEveryFieldPath) {
  Json doc = MinimalConfig();
  doc.erase("mode");
  doc["lambda"] = 2.0;
  doc["dims"] = Json{{"hidden", 0}};
  doc["extra"] = true;
  doc["train"] = "missing.jsonl";
  const std::string msg = ErrorOf(doc);
  for (const char* path : {"$.mode", "$.lambda", "$.dims.hidden", "$.extra", "$.train"}) {
    EXPECT_NE(msg.find(path), std::string::npos) << path << " in: " << msg;
  }
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(IoTest, RejectsZeroLambdaForContrastiveModes) {
  Json doc = MinimalConfig();
  doc["lambda"] = 0.0;
  EXPECT_NE(ErrorOf(doc).find("$.lambda"), std::string::npos);
  doc["mode"] = "CE";
  EXPECT_EQ(ErrorOf(doc), "");
}

TEST_F(IoTest, RejectsBadEnumsAndTypes) {
  Json doc = MinimalConfig();
  doc["mode"] = "DASCL";
  doc["selection_metric"] = "auc";
  doc["optimizer"] = "sgd";
  doc["batch_size"] = 2.5;
  doc["tau_init"] = -1;
  const std::string msg = ErrorOf(doc);
  for (const char* path : {"$.mode", "$.selection_metric", "$.optimizer", "$.batch_size", "$.tau_init"}) {
    EXPECT_NE(msg.find(path), std::string::npos) << path;
  }
}

TEST_F(IoTest, CheckpointRoundTrip) {
  SyntheticWorld world = MakeSyntheticWorld(SyntheticOptions{.dictionary_size = 6, .seed = 1});
  Corpus train = SampleSyntheticDocs(world, 20, 2, DictionarySlice::kAll);
  TrainConfig c;
  c.epochs = 2;
  c.dims = EncoderDims{1, 6, 5, 4, 2};
  TrainResult r = Train(c, train, train, world.Lexicons());
  SaveCheckpoint(r.model, dir_ / "ck.json");
  TrainedModel back = LoadCheckpoint(dir_ / "ck.json");
  EXPECT_EQ(back.vocab.tokens(), r.model.vocab.tokens());
  EXPECT_EQ(back.params.embedding, r.model.params.embedding);
  EXPECT_EQ(back.params.cls_b, r.model.params.cls_b);
  EXPECT_EQ(back.params.rho, r.model.params.rho);
  EXPECT_EQ(EvaluateModel(back, train).accuracy, EvaluateModel(r.model, train).accuracy);

  Json doc = CheckpointToJson(r.model);
  doc["params"]["hidden_w"]["rows"] = 99;
  EXPECT_THROW(CheckpointFromJson(doc), ValidationError);
  doc = CheckpointToJson(r.model);
  doc["format"] = "other";
  EXPECT_THROW(CheckpointFromJson(doc), ValidationError);
}

TEST(ReportJsonTest, MissingAveragePrecisionIsNull) {
  EvalReport r;
  r.count = 2;
  Json j = ReportToJson(r);
  EXPECT_TRUE(j["average_precision"].is_null());
  r.average_precision = 0.5;
  EXPECT_EQ(ReportToJson(r)["average_precision"].get<double>(), 0.5);
}

}  // namespace
}  // namespace dascl::io
