#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "blockgnn/data/corpus.h"
#include "blockgnn/data/synthetic.h"
#include "blockgnn/error.h"
#include "blockgnn/eval/evaluate.h"
#include "blockgnn/random.h"
#include "blockgnn/train/loss.h"
#include "blockgnn/train/split.h"
#include "blockgnn/train/trainer.h"
#include "test_util.h"

namespace blockgnn::train {
namespace {

constexpr LossKind kAllLosses[] = {LossKind::kMape, LossKind::kMse, LossKind::kRelativeMse,
                                   LossKind::kHuber, LossKind::kRelativeHuber};

TEST(Loss, Examples) {
  EXPECT_DOUBLE_EQ(LossValue(LossKind::kMape, 2.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(LossValue(LossKind::kHuber, 1.0, 0.5), 0.125);
  EXPECT_DOUBLE_EQ(LossValue(LossKind::kHuber, 3.0, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(LossValue(LossKind::kHuber, 1.0, 3.0), 1.5);
  EXPECT_DOUBLE_EQ(LossValue(LossKind::kMse, 3.0, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(LossValue(LossKind::kRelativeMse, 4.0, 2.0), 0.25);
  EXPECT_DOUBLE_EQ(LossValue(LossKind::kRelativeHuber, 4.0, 2.0), 0.125);
  EXPECT_DOUBLE_EQ(LossValue(LossKind::kRelativeHuber, 1.0, 3.0), 1.5);
}

TEST(Loss, Properties) {
  Rng rng(1);
  for (LossKind k : kAllLosses) {
    for (int i = 0; i < 500; ++i) {
      const double a = rng.Uniform(0.01, 1000.0);
      const double p = rng.Uniform(-1000.0, 2000.0);
      EXPECT_GE(LossValue(k, a, p), 0.0);
      EXPECT_EQ(LossValue(k, a, a), 0.0);
      EXPECT_GT(LossValue(k, a, a + 1e-3 * a), 0.0);
    }
  }
  for (LossKind k : {LossKind::kMape, LossKind::kRelativeMse}) {
    for (int i = 0; i < 500; ++i) {
      const double a = rng.Uniform(0.01, 1000.0), p = rng.Uniform(-1000.0, 2000.0);
      const double c = rng.Uniform(0.001, 1000.0);
      const double base = LossValue(k, a, p);
      EXPECT_NEAR(LossValue(k, c * a, c * p), base, 1e-12 * std::max(1.0, base));
    }
  }
  EXPECT_THROW(LossValue(LossKind::kMape, 0.0, 1.0), Error);
  EXPECT_THROW(LossValue(LossKind::kMse, -1.0, 1.0), Error);
}

TEST(Loss, NamesRoundTrip) {
  for (LossKind k : kAllLosses) EXPECT_EQ(LossKindFromName(LossKindName(k)), k);
  EXPECT_THROW(LossKindFromName("l1"), Error);
}

TEST(Loss, BatchLossIsMeanOfSampleLosses) {
  Rng rng(2);
  for (LossKind k : kAllLosses) {
    std::vector<double> actual(7), pred(7);
    for (size_t i = 0; i < 7; ++i) {
      actual[i] = rng.Uniform(0.5, 5.0);
      pred[i] = rng.Uniform(-2.0, 7.0);
    }
    tensor::Tape tape;
    auto p = tape.Leaf(tensor::Tensor({7, 1}, pred));
    const double got = BatchLoss(k, p, actual).value().item();
    double expected = 0.0;
    for (size_t i = 0; i < 7; ++i) expected += LossValue(k, actual[i], pred[i]);
    EXPECT_NEAR(got, expected / 7.0, 1e-12) << LossKindName(k);
  }
}

std::vector<std::string> Ids(size_t n, uint64_t salt = 0) {
  std::vector<std::string> ids;
  for (size_t i = 0; i < n; ++i) ids.push_back("blk" + std::to_string(i * 7919 + salt));
  return ids;
}

TEST(Split, ProportionsDisjointExhaustive) {
  for (size_t n : {10, 57, 100, 1000, 4321}) {
    const auto ids = Ids(n);
    const Split s = SplitByHash(ids, 5);
    const size_t test = static_cast<size_t>(std::llround(0.17 * static_cast<double>(n)));
    EXPECT_EQ(s.test.size(), test);
    const size_t m = n - test;
    const size_t val = std::max<size_t>(1, static_cast<size_t>(std::llround(0.02 * static_cast<double>(m))));
    EXPECT_EQ(s.validation.size(), val);
    std::set<size_t> all;
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
      EXPECT_TRUE(std::is_sorted(part->begin(), part->end()));
      for (size_t i : *part) EXPECT_TRUE(all.insert(i).second) << "index " << i << " repeated";
    }
    EXPECT_EQ(all.size(), n);
  }
  const Split hundred = SplitByHash(Ids(100), 0);
  EXPECT_NEAR(static_cast<double>(hundred.test.size()), 17.0, 1.0);
}

TEST(Split, DeterministicAndOrderIndependent) {
  const auto ids = Ids(300);
  const Split a = SplitByHash(ids, 9), b = SplitByHash(ids, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
  // Membership depends on the id, not its position.
  auto reversed = ids;
  std::reverse(reversed.begin(), reversed.end());
  const Split r = SplitByHash(reversed, 9);
  std::set<std::string> ta, tr;
  for (size_t i : a.test) ta.insert(ids[i]);
  for (size_t i : r.test) tr.insert(reversed[i]);
  EXPECT_EQ(ta, tr);
  EXPECT_NE(SplitByHash(ids, 10).test, a.test);
}

TEST(Split, Errors) {
  try {
    SplitByHash(Ids(9), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewSamples);
  }
  auto dup = Ids(20);
  dup[3] = dup[4];
  EXPECT_THROW(SplitByHash(dup, 0), Error);
}

TEST(TrainConfig, DefaultsAndJson) {
  const TrainConfig d;
  EXPECT_EQ(d.loss, LossKind::kMape);
  EXPECT_EQ(d.batch_size_blocks, 100u);
  EXPECT_EQ(d.learning_rate, 1e-3);
  EXPECT_FALSE(d.clip_gradient_norm.has_value());
  TrainConfig c;
  c.loss = LossKind::kRelativeHuber;
  c.max_steps = 77;
  c.tasks = {"skylake"};
  c.clip_gradient_norm = 2.5;
  EXPECT_EQ(TrainConfigFromJson(TrainConfigToJson(c)), c);
  EXPECT_THROW(TrainConfigFromJson({{"lr", 0.1}}), Error);
  EXPECT_THROW(TrainConfigFromJson({{"batch_size_blocks", 0}}), Error);
  EXPECT_THROW(TrainConfigFromJson({{"loss", "hinge"}}), Error);
}

struct Fixture {
  std::vector<Sample> train, validation;
  graph::Vocabulary vocab;
};

Fixture MakeFixture(size_t n, uint64_t seed) {
  data::SyntheticOptions opts;
  opts.num_blocks = n;
  opts.seed = seed;
  const auto records = data::GenerateSynthetic(opts);
  Fixture f;
  f.vocab = graph::BuildVocabulary(data::Blocks(records));
  auto samples = data::MaterializeSamples(records, f.vocab, {}, {}).samples;
  for (size_t i = 0; i < samples.size(); ++i) {
    (i % 5 == 0 ? f.validation : f.train).push_back(std::move(samples[i]));
  }
  return f;
}

model::ModelConfig SmallModel() {
  model::ModelConfig m = testing::TinyConfig(8, 2);
  m.task_names = {"ivybridge", "haswell", "skylake"};
  return m;
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Train, DeterministicAndReproducible) {
  const Fixture f = MakeFixture(60, 3);
  TrainConfig cfg;
  cfg.batch_size_blocks = 16;
  cfg.max_steps = 30;
  cfg.eval_every = 10;
  cfg.seed = 4;
  const std::string dir1 = ::testing::TempDir() + "/train_a", dir2 = ::testing::TempDir() + "/train_b";
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
  TrainInputs in{f.train, f.validation, f.vocab, {}, {{"seed", 4}}};
  cfg.checkpoint_dir = dir1;
  std::vector<double> losses1, losses2;
  const TrainResult r1 = Train(in, cfg, SmallModel(), {.on_step = [&](size_t, double l) {
                                 losses1.push_back(l);
                                 return true;
                               }});
  cfg.checkpoint_dir = dir2;
  const TrainResult r2 = Train(in, cfg, SmallModel(), {.on_step = [&](size_t, double l) {
                                 losses2.push_back(l);
                                 return true;
                               }});
  EXPECT_EQ(losses1, losses2);
  EXPECT_EQ(losses1.size(), 30u);
  EXPECT_EQ(r1.log.size(), 3u);
  EXPECT_EQ(Slurp(dir1 + "/best.ckpt"), Slurp(dir2 + "/best.ckpt"));
  EXPECT_EQ(Slurp(dir1 + "/metrics.jsonl"), Slurp(dir2 + "/metrics.jsonl"));
  EXPECT_EQ(r1.last.params, r2.last.params);

  // The saved best checkpoint reproduces its recorded validation MAPE.
  const model::ModelBundle best = model::LoadBundle(dir1 + "/best.ckpt");
  std::vector<const Sample*> val;
  for (const auto& s : f.validation) val.push_back(&s);
  const eval::Evaluation ev = eval::Evaluate(val, best.model);
  for (const auto& [task, m] : best.info["validation_mape"].items()) {
    EXPECT_EQ(ev.tasks.at(task).metrics.mape, m.get<double>()) << task;
  }
  // Best is the minimum of the log.
  double best_logged = 1e300;
  for (const auto& rec : r1.log) best_logged = std::min(best_logged, rec.val_mape_mean);
  EXPECT_EQ(best.info["validation_mape_mean"].get<double>(), best_logged);

  // Each metrics line is a JSON object with the logged fields.
  std::istringstream lines(Slurp(dir1 + "/metrics.jsonl"));
  size_t count = 0;
  for (std::string line; std::getline(lines, line); ++count) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("step") && j.contains("train_loss") && j.contains("val_mape_per_task"));
  }
  EXPECT_EQ(count, 3u);
}

TEST(Train, SingleTaskLeavesOtherDecodersUntouched) {
  const Fixture f = MakeFixture(30, 5);
  TrainConfig cfg;
  cfg.batch_size_blocks = 8;
  cfg.max_steps = 5;
  cfg.eval_every = 5;
  cfg.tasks = {"haswell"};
  TrainInputs in{f.train, f.validation, f.vocab, {}, {}};
  const TrainResult r = Train(in, cfg, SmallModel());
  const model::ModelParams init = model::InitModel(SmallModel(), f.vocab.size(), cfg.seed);
  for (size_t i = 0; i < init.params.size(); ++i) {
    const std::string& name = init.params.entry(i).name;
    if (name.rfind("decoder/haswell", 0) == 0) {
      EXPECT_NE(r.last.params.value(i), init.params.value(i)) << name;
    } else if (name.rfind("decoder/", 0) == 0) {
      EXPECT_EQ(r.last.params.value(i), init.params.value(i)) << name;
    }
  }
}

TEST(Train, SelectsOnTrainingSetWithoutValidation) {
  const Fixture f = MakeFixture(20, 6);
  TrainConfig cfg;
  cfg.batch_size_blocks = 7;
  cfg.max_steps = 4;
  cfg.eval_every = 2;
  TrainInputs in{f.train, {}, f.vocab, {}, {}};
  const TrainResult r = Train(in, cfg, SmallModel());
  ASSERT_EQ(r.log.size(), 2u);
  EXPECT_EQ(r.log[0].selection_set, "train");
}

TEST(Train, Errors) {
  Fixture f = MakeFixture(20, 7);
  TrainConfig cfg;
  cfg.max_steps = 2;
  cfg.batch_size_blocks = 4;
  f.train[2].labels.erase("skylake");
  TrainInputs in{f.train, f.validation, f.vocab, {}, {}};
  try {
    Train(in, cfg, SmallModel());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingTaskLabel);
  }
  cfg.tasks = {"zen4"};
  try {
    Train(in, cfg, SmallModel());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownTask);
  }

  Fixture big = MakeFixture(20, 8);
  for (auto& s : big.train) s.labels["haswell"] = 1e200;
  TrainConfig mse;
  mse.loss = LossKind::kMse;
  mse.tasks = {"haswell"};
  mse.batch_size_blocks = 4;
  mse.max_steps = 1;
  TrainInputs in2{big.train, big.validation, big.vocab, {}, {}};
  try {
    Train(in2, mse, SmallModel());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteLoss);
    // The diagnostic names the offending batch.
    size_t named = 0;
    for (const auto& s : big.train) named += std::string(e.what()).find(s.block_id) != std::string::npos;
    EXPECT_EQ(named, 4u) << e.what();
  }
}

TEST(Train, HookCanStopEarly) {
  const Fixture f = MakeFixture(20, 9);
  TrainConfig cfg;
  cfg.batch_size_blocks = 4;
  cfg.max_steps = 100;
  cfg.eval_every = 50;
  TrainInputs in{f.train, f.validation, f.vocab, {}, {}};
  const TrainResult r = Train(in, cfg, SmallModel(), {.on_step = [](size_t step, double) {
                                return step < 3;
                              }});
  EXPECT_EQ(r.steps, 3u);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].step, 3u);
}

}  // namespace
}  // namespace blockgnn::train
