#include <cmath>
#include <fstream>
#include <map>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "coba/augment.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace coba {
namespace {

CategorizedTriple ct(std::string s, std::string p, std::string o, int group, int ordinal,
                     TripleCategory c = TripleCategory::Normal) {
  return {{std::move(s), std::move(p), std::move(o), group, ordinal}, c};
}

TripleSet mixed_set() {
  TripleSet ts;
  ts.entries = {ct("I", "love", "the movie", 1, 0, TripleCategory::Principal),
                ct("The theater", "was", "in Ohio", 1, 1, TripleCategory::Spurious),
                ct("The seats", "were", "red", 1, 2),
                ct("The popcorn", "was", "salty", 1, 3),
                ct("The screen", "was", "wide", 1, 4),
                ct("The film", "ran", "long", 1, 5)};
  return ts;
}

/// Three models that all rank "love" first.
std::vector<ClassifierHandle> love_ensemble() {
  std::vector<ClassifierHandle> out;
  for (int i = 0; i < 3; ++i) {
    oracle::WordGame g;
    g.weights = {{"love", 2.0 + i}, {"hate", -2.0}, {"good", 1.0}, {"bad", -1.0}};
    out.push_back(g.classifier("game-" + std::to_string(i)));
  }
  return out;
}

struct Fixture {
  MockBackend mock{default_mock_lexicons()};
  AugmentDeps deps;
  AugmentationConfig cfg;

  explicit Fixture(TaskKind task = TaskKind::SentimentBinary) {
    deps.ensemble = love_ensemble();
    deps.importance.method = ImportanceMethod::Occlusion;
    deps.backend = &mock;
    deps.prompts = default_prompts(task);
    deps.gender = GenderLexicon::builtin();
    deps.extra_spurious = {"ohio"};
    cfg.k = 1;
    cfg.p_delete = 0.0;
    cfg.seed = 3;
  }
};

TEST(Config, Validation) {
  AugmentationConfig c;
  EXPECT_NO_THROW(c.validate());
  c.k = 0;
  EXPECT_CODE(c.validate(), ErrorCode::InvalidK);
  c = {};
  c.p_delete = 1.5;
  EXPECT_CODE(c.validate(), ErrorCode::InvalidArgument);
  c = {};
  c.n_variants = 0;
  EXPECT_CODE(c.validate(), ErrorCode::InvalidArgument);
  c = {};
  c.tau = 0;
  EXPECT_CODE(c.validate(), ErrorCode::InvalidArgument);
}

TEST(FlipLabel, SentimentAndNli) {
  Rng rng(1);
  EXPECT_EQ(flip_label(Label::Positive, TaskKind::SentimentBinary, rng), Label::Negative);
  EXPECT_EQ(flip_label(Label::Negative, TaskKind::SentimentBinary, rng), Label::Positive);
  std::map<Label, int> counts;
  for (int i = 0; i < 4000; ++i) ++counts[flip_label(Label::Neutral, TaskKind::Nli3Way, rng)];
  EXPECT_EQ(counts.count(Label::Neutral), 0u);
  // Binomial(4000, 0.5): 5 sigma is about 158.
  EXPECT_NEAR(counts[Label::Entailment], 2000, 158);
  EXPECT_CODE(flip_label(Label::Neutral, TaskKind::SentimentBinary, rng), ErrorCode::UnknownLabel);
}

TEST(Gender, SwapsPreservingCaseAndPossessive) {
  const auto lex = GenderLexicon::builtin();
  int n = 0;
  EXPECT_EQ(lex.swap("The actor's wife said HE was Brave.", &n),
            "The actress's husband said SHE was Brave.");
  EXPECT_EQ(n, 3);
  EXPECT_EQ(lex.swap("Her son\xE2\x80\x99s dog"), "His daughter\xE2\x80\x99s dog");
  EXPECT_EQ(lex.swap("manager and human", &n), "manager and human");
  EXPECT_EQ(n, 0);
  EXPECT_EQ(lex.pairs().count("him"), 0u);
}

TEST(Gender, SwapIsAnInvolution) {
  const auto lex = GenderLexicon::builtin();
  const std::string text = "My Father met the KING's niece, and she thanked the waiter.";
  EXPECT_EQ(lex.swap(lex.swap(text)), text);
}

TEST(Gender, RejectsAsymmetricInput) {
  EXPECT_CODE(GenderLexicon(std::map<std::string, std::string>{{"a", "b"}}),
              ErrorCode::AsymmetricLexicon);
  EXPECT_CODE(GenderLexicon::from_pairs({{"he", "she"}, {"he", "her"}}),
              ErrorCode::AsymmetricLexicon);
  EXPECT_CODE(GenderLexicon::parse("he she\nit\n"), ErrorCode::InvalidArgument);
  const auto lex = GenderLexicon::parse("# comment\nLord  Lady\n");
  EXPECT_EQ(lex.pairs().at("lady"), "lord");
  EXPECT_CODE(GenderLexicon::load("/nonexistent"), ErrorCode::Io);
}

TEST(Gender, SwapsEveryTripleSlot) {
  TripleSet ts;
  ts.entries = {ct("The man", "thanked", "his mother", 1, 0)};
  int n = 0;
  const auto out = gender_swap(ts, GenderLexicon::builtin(), &n);
  EXPECT_EQ(out.entries[0].triple.subject, "The woman");
  EXPECT_EQ(out.entries[0].triple.object, "her father");
  EXPECT_EQ(n, 3);
}

TEST(Permute, MovesOnlyNormals) {
  const auto ts = mixed_set();
  Rng rng(5);
  bool moved = false;
  for (int i = 0; i < 50; ++i) {
    const auto out = permute_normals(ts, rng);
    EXPECT_EQ(out.entries[0], ts.entries[0]);
    EXPECT_EQ(out.entries[1], ts.entries[1]);
    std::multiset<std::string> a, b;
    for (std::size_t j = 2; j < 6; ++j) {
      a.insert(ts.entries[j].triple.subject);
      b.insert(out.entries[j].triple.subject);
    }
    EXPECT_EQ(a, b);
    moved |= !(out == ts);
  }
  EXPECT_TRUE(moved);
}

TEST(Delete, RateAndGroupGuard) {
  const auto ts = mixed_set();
  Rng rng(9);
  int deleted = 0;
  const int trials = 5000;
  for (int i = 0; i < trials; ++i) {
    const auto out = delete_normals(ts, 0.3, rng);
    EXPECT_EQ(out.count(TripleCategory::Principal), 1u);
    EXPECT_EQ(out.count(TripleCategory::Spurious), 1u);
    deleted += static_cast<int>(ts.size() - out.size());
  }
  const double n = 4.0 * trials;
  EXPECT_NEAR(deleted / n, 0.3, 4 * std::sqrt(0.3 * 0.7 / n));

  TripleSet only_normals;
  only_normals.task = TaskKind::Nli3Way;
  only_normals.entries = {ct("a", "b", "c", 1, 0), ct("d", "e", "f", 1, 1), ct("g", "h", "i", 2, 0)};
  for (int i = 0; i < 200; ++i) {
    const auto out = delete_normals(only_normals, 1.0, rng);
    EXPECT_EQ(out.count_group(1), 1u);
    EXPECT_EQ(out.count_group(2), 1u);
  }
  EXPECT_EQ(delete_normals(only_normals, 0.0, rng), only_normals);
}

TEST(Pipeline, ModifiesPrincipalKeepsSpurious) {
  Fixture f;
  const Example ex{"ex1", "I love the movie. The theater was in Ohio.", std::nullopt,
                   Label::Positive};
  ExampleTrace trace;
  const auto recs = generate_counterbias(ex, TaskKind::SentimentBinary, f.deps, f.cfg, &trace);
  ASSERT_EQ(recs.size(), 1u);
  const auto& r = recs[0];
  EXPECT_EQ(r.text1, "I hate the movie. The theater was in Ohio.");
  EXPECT_EQ(r.target_label, Label::Negative);
  EXPECT_EQ(r.word_sets.principal, std::set<std::string>{"love"});
  EXPECT_TRUE(r.word_sets.spurious.count("ohio"));
  EXPECT_TRUE(r.word_sets.spurious.count("she"));
  EXPECT_EQ(r.triples_before.entries[0].category, TripleCategory::Principal);
  EXPECT_EQ(r.triples_before.entries[1].category, TripleCategory::Spurious);
  EXPECT_EQ(r.triples_after.entries[1], r.triples_before.entries[1]);
  EXPECT_EQ(r.applied_ops, std::vector<AugmentOp>{AugmentOp::Modify});
  EXPECT_FALSE(r.verified);
  EXPECT_EQ(trace.top_k.size(), 3u);
  EXPECT_FALSE(trace.no_principal_triples);
}

TEST(Pipeline, VariantsGenderSwapAndVerify) {
  Fixture f;
  f.cfg.n_variants = 3;
  f.cfg.p_delete = 0.5;
  f.cfg.verify = true;
  const Example ex{"ex2",
                   "He loved the film. The seats were red. The popcorn was salty. The screen "
                   "was wide. The crowd was quiet.",
                   std::nullopt, Label::Positive};
  const auto recs = generate_counterbias(ex, TaskKind::SentimentBinary, f.deps, f.cfg);
  ASSERT_EQ(recs.size(), 3u);
  for (int v = 0; v < 3; ++v) {
    const auto& r = recs[static_cast<std::size_t>(v)];
    EXPECT_EQ(r.variant_index, v);
    EXPECT_EQ(r.text1.rfind("She hated the film.", 0), 0u) << r.text1;
    EXPECT_EQ(r.applied_ops[0], AugmentOp::Modify);
    EXPECT_EQ(r.applied_ops[1], AugmentOp::GenderSwap);
    EXPECT_EQ(r.applied_ops[2], AugmentOp::Permute);
    const bool deleted = r.triples_after.size() < r.triples_before.size();
    EXPECT_EQ(std::count(r.applied_ops.begin(), r.applied_ops.end(), AugmentOp::Delete),
              deleted ? 1 : 0);
    // "hated" is not in the models' vocabulary, so the ensemble still says positive.
    ASSERT_TRUE(r.verified);
    EXPECT_FALSE(*r.verified);
  }
  // Variants draw from separate streams.
  EXPECT_FALSE(recs[0].triples_after == recs[1].triples_after &&
               recs[1].triples_after == recs[2].triples_after);
}

TEST(Pipeline, VerifiesAgreementWithTarget) {
  Fixture f;
  f.cfg.verify = true;
  const Example ex{"ex3", "The plot was good.", std::nullopt, Label::Positive};
  const auto recs = generate_counterbias(ex, TaskKind::SentimentBinary, f.deps, f.cfg);
  EXPECT_EQ(recs[0].text1, "The plot was bad.");
  EXPECT_TRUE(*recs[0].verified);
}

TEST(Pipeline, SpuriousTakesPrecedence) {
  Fixture f;
  const Example ex{"ex4", "The actor was good.", std::nullopt, Label::Positive};
  ExampleTrace trace;
  const auto recs = generate_counterbias(ex, TaskKind::SentimentBinary, f.deps, f.cfg, &trace);
  EXPECT_EQ(recs[0].word_sets.principal, std::set<std::string>{"good"});
  EXPECT_EQ(recs[0].triples_before.entries[0].category, TripleCategory::Spurious);
  EXPECT_EQ(recs[0].text1, "The actress was good.");
  EXPECT_EQ(recs[0].applied_ops, std::vector<AugmentOp>{AugmentOp::GenderSwap});
  EXPECT_TRUE(trace.no_principal_triples);
}

TEST(Pipeline, NliRecordsCarryBothSentences) {
  Fixture f(TaskKind::Nli3Way);
  std::vector<ClassifierHandle> nli;
  for (int i = 0; i < 3; ++i) {
    nli.push_back(std::make_shared<CallbackClassifier>(
        "nli-" + std::to_string(i), TaskKind::Nli3Way, [](const std::string& t) {
          const bool horse = t.find("horse") != std::string::npos;
          return horse ? std::vector<double>{0.8, 0.1, 0.1} : std::vector<double>{0.2, 0.5, 0.3};
        }));
  }
  f.deps.ensemble = nli;
  const Example ex{"n1", "A dog is on a horse.", std::string("A person rides an animal."),
                   Label::Entailment};
  const auto recs = generate_counterbias(ex, TaskKind::Nli3Way, f.deps, f.cfg);
  ASSERT_EQ(recs.size(), 1u);
  const auto& r = recs[0];
  EXPECT_NE(r.target_label, Label::Entailment);
  ASSERT_TRUE(r.text2);
  EXPECT_EQ(r.text1, "A dog is not on a horse.");
  EXPECT_EQ(*r.text2, "A person rides an animal.");
  EXPECT_EQ(r.triples_after.count_group(2), 1u);
}

TEST(Dataset, SkipsFailuresAndKeepsOrder) {
  Fixture f;
  Dataset ds{TaskKind::SentimentBinary,
             {{"a", "I love the movie.", std::nullopt, Label::Positive},
              {"b", "Loved it.", std::nullopt, Label::Positive},
              {"c", "The plot was good.", std::nullopt, Label::Positive},
              {"d", "I hate the ending.", std::nullopt, Label::Negative}}};
  const auto one = augment_dataset(ds, f.deps, f.cfg, 1);
  const auto four = augment_dataset(ds, f.deps, f.cfg, 4);
  EXPECT_EQ(one.summary.succeeded, 3u);
  EXPECT_EQ(one.summary.skipped, 1u);
  EXPECT_EQ(one.summary.failures.at("b").rfind("MockCannotDecompose", 0), 0u);
  ASSERT_EQ(one.records.size(), 3u);
  EXPECT_EQ(one.records[0].source_id, "a");
  EXPECT_EQ(one.records[2].source_id, "d");
  EXPECT_EQ(one.records[2].text1, "I love the ending.");
  EXPECT_EQ(records_to_jsonl(one.records, ds.task), records_to_jsonl(four.records, ds.task));
  EXPECT_DOUBLE_EQ(one.summary.spurious_word_retention, 1.0);

  Dataset bad{TaskKind::SentimentBinary, {{"b", "Loved it.", std::nullopt, Label::Positive}}};
  EXPECT_CODE(augment_dataset(bad, f.deps, f.cfg), ErrorCode::AllExamplesFailed);
  EXPECT_CODE(augment_dataset(ds, f.deps, f.cfg, 0), ErrorCode::InvalidArgument);
}

TEST(Output, JsonlSchemaAndMerge) {
  Fixture f;
  Dataset ds{TaskKind::SentimentBinary,
             {{"a", "I love the movie. The theater was in Ohio.", std::nullopt, Label::Positive},
              {"a-cb0", "The plot was good.", std::nullopt, Label::Positive}}};
  const auto res = augment_dataset(ds, f.deps, f.cfg);
  const auto jsonl = records_to_jsonl(res.records, ds.task);
  const auto first = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
  EXPECT_EQ(first.at("source_id"), "a");
  EXPECT_EQ(first.at("label"), "negative");
  EXPECT_EQ(first.at("text"), "I hate the movie. The theater was in Ohio.");
  EXPECT_FALSE(first.contains("text2"));
  const auto& prov = first.at("provenance");
  EXPECT_EQ(prov.at("original_label"), "positive");
  EXPECT_EQ(prov.at("applied_ops"), nlohmann::json::array({"modify"}));
  EXPECT_EQ(prov.at("word_sets").at("principal"), nlohmann::json::array({"love"}));
  EXPECT_EQ(prov.at("triples_before").at(1).at("category"), "spurious");
  EXPECT_EQ(prov.at("triples_after").at(0).at("predicate"), "hate");

  const auto merged = merge_dataset(ds, res.records);
  ASSERT_EQ(merged.examples.size(), 4u);
  EXPECT_EQ(merged.examples[2].id, "a-cb0-2");
  EXPECT_EQ(merged.examples[3].id, "a-cb0-cb0");
  EXPECT_EQ(merged.examples[2].label, Label::Negative);
}

TEST(Lexicons, LoadsFromConfig) {
  testing::TempDir dir;
  {
    std::ofstream(dir / "g.txt") << "lord lady\n";
    std::ofstream(dir / "s.txt") << "Ohio\n";
  }
  AugmentationConfig cfg;
  AugmentDeps deps;
  load_lexicons(cfg, deps);
  EXPECT_FALSE(deps.gender.empty());
  EXPECT_TRUE(deps.extra_spurious.empty());
  cfg.gender_lexicon_path = dir / "g.txt";
  cfg.extra_spurious_path = dir / "s.txt";
  load_lexicons(cfg, deps);
  EXPECT_EQ(deps.gender.words(), (std::set<std::string>{"lady", "lord"}));
  EXPECT_EQ(deps.extra_spurious, std::set<std::string>{"ohio"});
}

}  // namespace
}  // namespace coba
