#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "coba/classifier.hpp"
#include "coba/tokenize.hpp"
#include "helpers.hpp"

namespace coba {
namespace {

Dataset tiny_sentiment() {
  return {TaskKind::SentimentBinary,
          {{"a", "good good movie", std::nullopt, Label::Positive},
           {"b", "great film", std::nullopt, Label::Positive},
           {"c", "bad movie", std::nullopt, Label::Negative},
           {"d", "awful bad film", std::nullopt, Label::Negative}}};
}

/// Independent multinomial NB over L2-normalised TF-IDF features.
std::vector<double> nb_oracle(const Dataset& ds, const std::string& text) {
  std::vector<std::vector<std::string>> docs;
  std::set<std::string> vocab;
  for (const auto& ex : ds.examples) {
    docs.push_back(tokenize(ex.text1));
    vocab.insert(docs.back().begin(), docs.back().end());
  }
  const double n = static_cast<double>(docs.size());
  std::map<std::string, double> idf;
  for (const auto& w : vocab) {
    double df = 0;
    for (const auto& d : docs) df += std::count(d.begin(), d.end(), w) > 0;
    idf[w] = std::log((1 + n) / (1 + df)) + 1;
  }
  auto features = [&](const std::vector<std::string>& toks) {
    std::map<std::string, double> f;
    for (const auto& t : toks) {
      if (vocab.count(t)) f[t] += idf[t];
    }
    double norm = 0;
    for (auto& [w, v] : f) norm += v * v;
    for (auto& [w, v] : f) v /= std::sqrt(norm);
    return f;
  };
  std::vector<double> logp;
  for (Label l : {Label::Positive, Label::Negative}) {
    std::map<std::string, double> sum;
    double docs_in_class = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (ds.examples[i].label != l) continue;
      ++docs_in_class;
      for (auto [w, v] : features(docs[i])) sum[w] += v;
    }
    double total = 0;
    for (auto& [w, v] : sum) total += v;
    double lp = std::log(docs_in_class / n);
    for (auto [w, x] : features(tokenize(text))) {
      lp += x * std::log((sum[w] + 1.0) / (total + static_cast<double>(vocab.size())));
    }
    logp.push_back(lp);
  }
  const double mx = std::max(logp[0], logp[1]);
  const double z = std::exp(logp[0] - mx) + std::exp(logp[1] - mx);
  return {std::exp(logp[0] - mx) / z, std::exp(logp[1] - mx) / z};
}

TEST(LocalClassifier, NaiveBayesMatchesOracle) {
  const auto ds = tiny_sentiment();
  TrainOptions opts;
  opts.kind = ClassifierKind::LocalNaiveBayes;
  const auto model = train_local(ds, "nb", opts);
  for (const std::string text : {"good movie", "bad bad film", "unknown words only", "great awful"}) {
    const auto got = model->predict_one(text).probs;
    const auto want = nb_oracle(ds, text);
    ASSERT_EQ(got.size(), 2u);
    EXPECT_NEAR(got[0], want[0], 1e-12) << text;
    EXPECT_NEAR(got[1], want[1], 1e-12) << text;
  }
}

TEST(LocalClassifier, LogRegFitsSeparableData) {
  const auto ds = tiny_sentiment();
  TrainOptions opts;
  opts.kind = ClassifierKind::LocalLogReg;
  opts.seed = 3;
  const auto model = train_local(ds, "lr", opts);
  for (const auto& ex : ds.examples) {
    const auto p = model->predict_one(ex.text1).probs;
    const std::size_t want = ex.label == Label::Positive ? 0 : 1;
    EXPECT_GT(p[want], 0.5) << ex.text1;
  }
}

TEST(LocalClassifier, TrainingIsDeterministicPerSeed) {
  const auto ds = tiny_sentiment();
  TrainOptions opts;
  opts.seed = 5;
  const auto a = train_local(ds, "m", opts);
  const auto b = train_local(ds, "m", opts);
  opts.seed = 6;
  const auto c = train_local(ds, "m", opts);
  EXPECT_EQ(a->to_json(), b->to_json());
  EXPECT_NE(a->to_json(), c->to_json());
}

TEST(LocalClassifier, RowsAreDistributions) {
  const auto model = train_local(tiny_sentiment(), "m", {});
  const std::vector<std::string> texts = {"", "good", "bad film", "zzz"};
  for (const auto& row : model->predict_proba(texts)) {
    double sum = 0;
    for (double p : row.probs) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(LocalClassifier, SaveLoadRoundTrip) {
  testing::TempDir dir;
  TrainOptions opts;
  opts.kind = ClassifierKind::LocalNaiveBayes;
  const auto model = train_local(tiny_sentiment(), "saved", opts);
  model->save(dir / "m.json");
  const auto back = LocalClassifier::load(dir / "m.json");
  EXPECT_EQ(back->name(), "saved");
  EXPECT_EQ(back->kind(), ClassifierKind::LocalNaiveBayes);
  EXPECT_EQ(back->predict_one("good film").probs, model->predict_one("good film").probs);
}

TEST(LocalClassifier, NliInputsUseBothTexts) {
  Dataset ds{TaskKind::Nli3Way,
             {{"1", "a dog runs", "an animal moves", Label::Entailment},
              {"2", "a dog runs", "a cat sleeps", Label::Contradiction},
              {"3", "a dog runs", "it is sunny", Label::Neutral}}};
  const auto model = train_local(ds, "nli", {});
  EXPECT_EQ(model->predict_one("a dog runs [SEP] an animal moves").probs.size(), 3u);
}

TEST(LocalClassifier, TrainingErrors) {
  auto ds = tiny_sentiment();
  ds.examples.resize(2);  // positives only
  EXPECT_CODE(train_local(ds, "m", {}), ErrorCode::DegenerateData);
  EXPECT_CODE(train_local(Dataset{}, "m", {}), ErrorCode::EmptyDataset);
  TrainOptions bad;
  bad.sample_fraction = 0.0;
  EXPECT_CODE(train_local(tiny_sentiment(), "m", bad), ErrorCode::InvalidArgument);
  bad.sample_fraction = 1.0;
  bad.kind = ClassifierKind::Remote;
  EXPECT_CODE(train_local(tiny_sentiment(), "m", bad), ErrorCode::InvalidArgument);
}

TEST(LocalClassifier, SampleFractionChangesTheModel) {
  Dataset ds{TaskKind::SentimentBinary, {}};
  for (int i = 0; i < 40; ++i) {
    ds.examples.push_back({std::to_string(i), "word" + std::to_string(i) + (i % 2 ? " good" : " bad"),
                           std::nullopt, i % 2 ? Label::Positive : Label::Negative});
  }
  TrainOptions a;
  a.sample_fraction = 0.5;
  a.seed = 1;
  TrainOptions b = a;
  b.seed = 2;
  EXPECT_NE(train_local(ds, "m", a)->to_json(), train_local(ds, "m", b)->to_json());
}

TEST(CallbackClassifier, ForwardsEachText) {
  CallbackClassifier cb("cb", TaskKind::SentimentBinary, [](const std::string& t) {
    return std::vector<double>{t.size() % 2 ? 1.0 : 0.0, t.size() % 2 ? 0.0 : 1.0};
  });
  const std::vector<std::string> texts = {"a", "ab"};
  const auto rows = cb.predict_proba(texts);
  EXPECT_EQ(rows[0].probs[0], 1.0);
  EXPECT_EQ(rows[1].probs[1], 1.0);
  EXPECT_CODE(cb.predict_proba({}), ErrorCode::InvalidArgument);
}

TEST(ClassifierKind, Names) {
  for (auto k : {ClassifierKind::LocalNaiveBayes, ClassifierKind::LocalLogReg, ClassifierKind::Remote}) {
    EXPECT_EQ(parse_classifier_kind(to_string(k)), k);
  }
  EXPECT_CODE(parse_classifier_kind("svm"), ErrorCode::InvalidArgument);
}

}  // namespace
}  // namespace coba
