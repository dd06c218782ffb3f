#include "dascl/trainer.h"

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include <unistd.h>

#include <gtest/gtest.h>

#include "dascl/error.h"
#include "dascl/synthetic.h"

namespace dascl {
namespace {

namespace fs = std::filesystem;

Corpus Numbered(int n) {
  Corpus c;
  for (int i = 0; i < n; ++i) c.push_back({"d" + std::to_string(i), "w" + std::to_string(i), i % 2});
  return c;
}

TEST(FewShotSampleTest, FullSizeIsPermutation) {
  Corpus c = Numbered(10);
  Corpus s = FewShotSample(c, 10, 4);
  std::set<std::string> ids;
  for (const Example& ex : s) ids.insert(ex.id);
  EXPECT_EQ(ids.size(), 10u);
}

TEST(FewShotSampleTest, DeterministicAndSeedDependent) {
  Corpus c = Numbered(100);
  auto ids = [](const Corpus& s) {
    std::vector<std::string> out;
    for (const Example& ex : s) out.push_back(ex.id);
    return out;
  };
  EXPECT_EQ(ids(FewShotSample(c, 20, 7)), ids(FewShotSample(c, 20, 7)));
  EXPECT_NE(ids(FewShotSample(c, 20, 7)), ids(FewShotSample(c, 20, 8)));
}

TEST(FewShotSampleTest, NotStratified) {
  Corpus c = Numbered(200);
  std::set<int> positives_seen;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    int pos = 0;
    for (const Example& ex : FewShotSample(c, 10, seed)) pos += ex.label;
    positives_seen.insert(pos);
  }
  EXPECT_GT(positives_seen.size(), 1u);
}

TEST(FewShotSampleTest, OutOfRange) {
  Corpus c = Numbered(5);
  EXPECT_THROW(FewShotSample(c, 0, 1), ValidationError);
  EXPECT_THROW(FewShotSample(c, 6, 1), ValidationError);
}

EncodedCorpus Encoded(int n) {
  EncodedCorpus e;
  for (int i = 0; i < n; ++i) {
    e.originals.push_back({i + 1});
    e.simplified.push_back({i + 100});
    e.labels.push_back(i % 2);
  }
  return e;
}

TEST(MakeBatchesTest, KeepsShortFinalBatchAndPairs) {
  auto batches = MakeBatches(Encoded(10), 4, 3);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches[0].labels.size(), 4u);
  EXPECT_EQ(batches[1].labels.size(), 4u);
  EXPECT_EQ(batches[2].labels.size(), 2u);
  for (const PairedBatch& b : batches) {
    for (std::size_t k = 0; k < b.indices.size(); ++k) {
      EXPECT_EQ(b.originals[k][0] + 99, b.simplified[k][0]);
      EXPECT_EQ(b.labels[k], static_cast<int>(b.indices[k] % 2));
    }
  }
  EXPECT_EQ(MakeBatches(Encoded(3), 16, 3).size(), 1u);
}

TEST(MakeBatchesTest, EpochsReshuffleSameMultiset) {
  const EncodedCorpus e = Encoded(30);
  auto flat = [&](int epoch) {
    std::vector<std::size_t> order;
    for (const PairedBatch& b : MakeBatches(e, 8, EpochSeed(5, epoch))) {
      order.insert(order.end(), b.indices.begin(), b.indices.end());
    }
    return order;
  };
  auto a = flat(1), b = flat(2);
  EXPECT_NE(a, b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  EXPECT_EQ(flat(1), flat(1));
}

TEST(MakeBatchesTest, Misaligned) {
  EncodedCorpus e = Encoded(4);
  e.simplified.pop_back();
  EXPECT_THROW(MakeBatches(e, 2, 1), ValidationError);
}

TEST(AdamTest, ZeroGradientsLeaveParamsUnchanged) {
  std::vector<double> p = {1.0, -2.0, 3.0}, g(3, 0.0), m(3, 0.0), v(3, 0.0);
  for (long t = 1; t <= 5; ++t) AdamUpdate(p, g, m, v, t, {});
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0, 3.0}));
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  std::vector<double> p = {0.0}, g = {1.0}, m = {0.0}, v = {0.0};
  AdamOptions o;
  o.learning_rate = 0.1;
  AdamUpdate(p, g, m, v, 1, o);
  EXPECT_NEAR(p[0], -0.1, 1e-8);
  EXPECT_THROW(AdamUpdate(p, g, m, v, 0, o), ValidationError);
}

TEST(AdamTest, NonFiniteGradientThrowsWithoutUpdating) {
  EncoderDims dims{5, 3, 3, 2, 2};
  EncoderParams p = InitParams(dims, 1, 0.3);
  const EncoderParams before = p;
  EncoderGrads g = EncoderParams::Zeros(dims);
  g.cls_b(0) = std::nan("");
  AdamState s = AdamState::For(dims);
  EXPECT_THROW(AdamStep(p, g, s, {}), RuntimeError);
  EXPECT_EQ(p.embedding, before.embedding);
  EXPECT_EQ(p.rho, before.rho);
}

struct SmallWorld {
  SyntheticWorld world = MakeSyntheticWorld(SyntheticOptions{.dictionary_size = 10, .seed = 3});
  Corpus train = SampleSyntheticDocs(world, 60, 4, DictionarySlice::kAll, "tr");
  Corpus val = SampleSyntheticDocs(world, 40, 5, DictionarySlice::kAll, "va");
};

TrainConfig SmallConfig(LossMode mode, double lambda) {
  TrainConfig c;
  c.loss = {mode, lambda};
  c.learning_rate = 1e-2;
  c.batch_size = 8;
  c.epochs = 6;
  c.seed = 9;
  c.dims = EncoderDims{1, 16, 16, 8, 2};
  return c;
}

TEST(TrainTest, SeparableCorpusIsLearned) {
  Corpus train, val;
  for (int i = 0; i < 40; ++i) {
    const int y = i % 2;
    const std::string word = y ? "great" : "awful";
    train.push_back({"t" + std::to_string(i), word + " film " + std::to_string(i % 5), y});
    val.push_back({"v" + std::to_string(i), "the " + word + " one", y});
  }
  TrainConfig c = SmallConfig(LossMode::kCE, 0.9);
  c.learning_rate = 5e-2;
  c.epochs = 20;
  TrainResult r = Train(c, train, val, LexiconSet(std::vector<Lexicon>{}));
  EXPECT_EQ(r.history.selected_metric, 1.0);
  EXPECT_EQ(EvaluateModel(r.model, val).accuracy, 1.0);
}

TEST(TrainTest, TemperatureStaysPositiveAndHistoryIsComplete) {
  SmallWorld w;
  for (LossMode mode : {LossMode::kCE, LossMode::kCEDA, LossMode::kCESCL, LossMode::kCEDASCL,
                        LossMode::kCEDASCLDA}) {
    TrainResult r = Train(SmallConfig(mode, 0.9), w.train, w.val, w.world.Lexicons());
    ASSERT_EQ(r.history.epochs.size(), 6u);
    for (const EpochRecord& e : r.history.epochs) {
      EXPECT_GT(e.tau, 0.0);
      EXPECT_TRUE(std::isfinite(e.tau));
      EXPECT_EQ(e.contrastive_loss.has_value(), HasContrastiveTerm(mode));
    }
  }
}

TEST(TrainTest, FullContrastiveWeightLeavesClassifierHeadAtInit) {
  SmallWorld w;
  TrainConfig c = SmallConfig(LossMode::kCEDASCL, 1.0);
  TrainResult r = Train(c, w.train, w.val, w.world.Lexicons());
  EncoderDims dims = c.dims;
  dims.vocab = r.model.vocab.size();
  const EncoderParams init = InitParams(dims, c.seed, c.tau_init);
  EXPECT_EQ(r.model.params.cls_w, init.cls_w);
  EXPECT_EQ(r.model.params.cls_b, init.cls_b);
  EXPECT_NE(r.model.params.proj_w, init.proj_w);
}

TEST(TrainTest, DeterministicHistory) {
  SmallWorld w;
  TrainConfig c = SmallConfig(LossMode::kCEDASCL, 0.9);
  c.few_shot_n = 20;
  TrainResult a = Train(c, w.train, w.val, w.world.Lexicons());
  TrainResult b = Train(c, w.train, w.val, w.world.Lexicons());
  ASSERT_EQ(a.history.epochs.size(), b.history.epochs.size());
  for (std::size_t i = 0; i < a.history.epochs.size(); ++i) {
    EXPECT_EQ(a.history.epochs[i].total_loss, b.history.epochs[i].total_loss);
    EXPECT_EQ(a.history.epochs[i].tau, b.history.epochs[i].tau);
  }
  EXPECT_EQ(a.model.params.embedding, b.model.params.embedding);
}

TEST(TrainTest, ZeroContrastiveWeightFollowsCrossEntropyTrajectory) {
  SmallWorld w;
  // Same vocabulary in both runs: DA-free modes still build the vocabulary
  // from originals and simplified twins.
  TrainResult ce = Train(SmallConfig(LossMode::kCE, 0.9), w.train, w.val, w.world.Lexicons());
  for (LossMode mode : {LossMode::kCESCL, LossMode::kCEDASCL}) {
    TrainResult zero = Train(SmallConfig(mode, 0.0), w.train, w.val, w.world.Lexicons());
    ASSERT_EQ(zero.history.epochs.size(), ce.history.epochs.size());
    for (std::size_t i = 0; i < ce.history.epochs.size(); ++i) {
      EXPECT_NEAR(zero.history.epochs[i].ce_loss, ce.history.epochs[i].ce_loss, 1e-12);
      EXPECT_NEAR(zero.history.epochs[i].total_loss, ce.history.epochs[i].total_loss, 1e-12);
    }
    EXPECT_NEAR((zero.model.params.cls_w - ce.model.params.cls_w).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  }
}

TEST(TrainTest, SelectedEpochIsEarliestBest) {
  SmallWorld w;
  for (SelectionMetric metric : {SelectionMetric::kAccuracy, SelectionMetric::kF1Positive}) {
    TrainConfig c = SmallConfig(LossMode::kCEDASCL, 0.9);
    c.selection = metric;
    TrainResult r = Train(c, w.train, w.val, w.world.Lexicons());
    double best = -1.0;
    int best_epoch = 0;
    for (const EpochRecord& e : r.history.epochs) {
      const double v = metric == SelectionMetric::kAccuracy ? e.validation.accuracy : e.validation.f1_positive;
      if (v > best) {
        best = v;
        best_epoch = e.epoch;
      }
    }
    EXPECT_EQ(r.history.selected_epoch, best_epoch);
    EXPECT_EQ(r.history.selected_metric, best);
    const EvalReport again = EvaluateModel(r.model, w.val);
    EXPECT_EQ(metric == SelectionMetric::kAccuracy ? again.accuracy : again.f1_positive, best);
  }
}

TEST(TrainTest, RejectsBadInputs) {
  SmallWorld w;
  TrainConfig c = SmallConfig(LossMode::kCE, 0.9);
  EXPECT_THROW(Train(c, {}, w.val, w.world.Lexicons()), ValidationError);
  EXPECT_THROW(Train(c, w.train, {}, w.world.Lexicons()), ValidationError);
  Corpus bad = w.train;
  bad[0].label = 2;
  EXPECT_THROW(Train(c, bad, w.val, w.world.Lexicons()), ValidationError);
  c.few_shot_n = 1000;
  EXPECT_THROW(Train(c, w.train, w.val, w.world.Lexicons()), ValidationError);
  c = SmallConfig(LossMode::kCE, 0.9);
  c.tau_init = 0.0;
  EXPECT_THROW(Train(c, w.train, w.val, w.world.Lexicons()), ValidationError);
}

class ExportTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dascl_export_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(ExportTest, RowsHaveUnitProjectionAndRoundTrip) {
  SmallWorld w;
  TrainResult r = Train(SmallConfig(LossMode::kCEDASCL, 0.9), w.train, w.val, w.world.Lexicons());
  Corpus three(w.val.begin(), w.val.begin() + 3);
  ExportEmbeddings(r.model, three, dir_ / "e.tsv");
  EmbeddingTable t = ReadEmbeddings(dir_ / "e.tsv");
  ASSERT_EQ(t.ids.size(), 3u);
  EXPECT_EQ(t.hidden.cols(), 16);
  EXPECT_EQ(t.psi.cols(), 8);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(t.ids[i], three[i].id);
    EXPECT_EQ(t.labels[i], three[i].label);
    EXPECT_NEAR(t.psi.row(i).norm(), 1.0, 1e-6);
    const ForwardTrace tr = Encode(r.model.params, r.model.vocab.Encode(Tokenize(three[i].text)));
    EXPECT_LE((t.psi.row(i).transpose() - tr.psi).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((t.hidden.row(i).transpose() - tr.hidden).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST_F(ExportTest, EmptyCorpusWritesHeaderOnly) {
  SmallWorld w;
  TrainResult r = Train(SmallConfig(LossMode::kCE, 0.9), w.train, w.val, w.world.Lexicons());
  ExportEmbeddings(r.model, {}, dir_ / "empty.tsv");
  EmbeddingTable t = ReadEmbeddings(dir_ / "empty.tsv");
  EXPECT_TRUE(t.ids.empty());
  Corpus bad = {{"a\tb", "x", 0}};
  EXPECT_THROW(ExportEmbeddings(r.model, bad, dir_ / "bad.tsv"), ValidationError);
}

}  // namespace
}  // namespace dascl
