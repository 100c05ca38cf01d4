#include <atomic>
#include <fstream>

#include <gtest/gtest.h>

#include "coba/llm.hpp"
#include "helpers.hpp"

namespace coba {
namespace {

/// Replies with a fixed text and counts calls.
class StubBackend final : public LlmBackend {
 public:
  explicit StubBackend(std::string reply, std::int64_t out_tokens = 5)
      : reply_(std::move(reply)), out_tokens_(out_tokens) {}
  const std::string& id() const noexcept override { return id_; }
  LlmResponse complete(const LlmRequest& r) const override {
    ++calls;
    last_user = r.user;
    return {reply_, {10, out_tokens_}, false};
  }
  mutable std::atomic<int> calls{0};
  mutable std::string last_user;

 private:
  std::string id_ = "stub";
  std::string reply_;
  std::int64_t out_tokens_;
};

const Triple kLove{"I", "love", "the movie", 1, 0};

TEST(Prompts, DefaultsValidateAndRender) {
  for (auto task : {TaskKind::SentimentBinary, TaskKind::Nli3Way}) {
    const auto set = default_prompts(task);
    for (const auto* t : {&set.ext, &set.mod, &set.rec}) {
      EXPECT_NO_THROW(t->validate());
      EXPECT_EQ(t->task, task);
    }
    EXPECT_EQ(set.ext.stage, PromptStage::Ext);
    const auto user = set.mod.render("a | b | c", Label::Negative);
    EXPECT_NE(user.find("a | b | c"), std::string::npos);
    EXPECT_EQ(user.find("{content}"), std::string::npos);
  }
  const auto mod = default_template(TaskKind::SentimentBinary, PromptStage::Mod);
  EXPECT_NE(mod.render("x", Label::Negative).find("negative"), std::string::npos);
}

TEST(Prompts, MissingPlaceholdersRejected) {
  PromptTemplate t{TaskKind::SentimentBinary, PromptStage::Ext, "sys", "no slot"};
  EXPECT_CODE(t.validate(), ErrorCode::InvalidArgument);
  t.stage = PromptStage::Mod;
  t.user = "{content}";
  EXPECT_CODE(t.validate(), ErrorCode::InvalidArgument);
  t.user = "{content} -> {target_label}";
  EXPECT_NO_THROW(t.validate());
}

TEST(Prompts, FingerprintTracksText) {
  auto a = default_template(TaskKind::SentimentBinary, PromptStage::Rec);
  auto b = a;
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint().size(), 64u);
  b.system += " ";
  EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(Params, StageDefaults) {
  EXPECT_DOUBLE_EQ(default_params(PromptStage::Ext).temperature, 0.0);
  EXPECT_DOUBLE_EQ(default_params(PromptStage::Mod).temperature, 0.0);
  EXPECT_DOUBLE_EQ(default_params(PromptStage::Rec).temperature, 0.7);
}

TEST(CacheKey, ChangesWithEveryInput) {
  const auto tmpl = default_template(TaskKind::SentimentBinary, PromptStage::Rec);
  const auto base = make_request("b", tmpl, "content", std::nullopt, default_params(PromptStage::Rec));
  EXPECT_EQ(base.cache_key(), make_request("b", tmpl, "content", std::nullopt,
                                           default_params(PromptStage::Rec)).cache_key());
  auto r = base;
  r.backend_id = "c";
  EXPECT_NE(r.cache_key(), base.cache_key());
  r = base;
  r.user += "!";
  EXPECT_NE(r.cache_key(), base.cache_key());
  r = base;
  r.params.temperature = 0.70000000001;
  EXPECT_NE(r.cache_key(), base.cache_key());
  r = base;
  r.params.seed = 1;
  EXPECT_NE(r.cache_key(), base.cache_key());
  r = base;
  r.params.max_tokens = 7;
  EXPECT_NE(r.cache_key(), base.cache_key());
  // Length prefixes keep part boundaries distinct.
  auto x = base, y = base;
  x.system = "ab";
  x.user = "c";
  y.system = "a";
  y.user = "bc";
  EXPECT_NE(x.cache_key(), y.cache_key());
}

TEST(ApproxTokens, RoundsUp) {
  EXPECT_EQ(approx_tokens(0), 0);
  EXPECT_EQ(approx_tokens(1), 1);
  EXPECT_EQ(approx_tokens(4), 1);
  EXPECT_EQ(approx_tokens(5), 2);
}

TEST(Mock, DecomposesSentences) {
  MockBackend mock(default_mock_lexicons());
  EXPECT_EQ(mock.decompose_text("I love the movie. The theater was in Ohio.",
                                TaskKind::SentimentBinary),
            "1. I | love | the movie\n2. The theater | was | in Ohio");
  EXPECT_CODE(mock.decompose_text("Loved it.", TaskKind::SentimentBinary),
              ErrorCode::MockCannotDecompose);
  EXPECT_CODE(mock.decompose_text("Nothing here.", TaskKind::SentimentBinary),
              ErrorCode::MockCannotDecompose);
  const auto nli = mock.decompose_text(
      "sent1: A man is on a horse.\nsent2: A person rides an animal.\nlabel: entailment",
      TaskKind::Nli3Way);
  EXPECT_EQ(nli,
            "sent1:\n1-1. A man | is | on a horse\n\nsent2:\n2-1. A person | rides | an animal");
}

TEST(Mock, ModifiesWithAntonymsOrNegation) {
  MockBackend mock(default_mock_lexicons());
  EXPECT_EQ(mock.modify(kLove).predicate, "hate");
  EXPECT_EQ(mock.modify({"It", "was", "Good,", 1, 0}).object, "Bad,");
  EXPECT_EQ(mock.modify({"It", "was", "GREAT", 1, 0}).object, "TERRIBLE");
  EXPECT_EQ(mock.modify({"The cast", "was", "in town", 1, 0}).object, "not in town");
  EXPECT_EQ(mock.modify({"The cast", "was", "not in town", 1, 0}).object, "in town");
  const auto t = mock.modify(kLove);
  EXPECT_EQ(mock.modify(t), kLove);
}

TEST(Mock, ReconstructsInOrder) {
  MockBackend mock(default_mock_lexicons());
  EXPECT_EQ(mock.reconstruct_text("2. The theater | was | in Ohio\n1. I | hate | the movie",
                                  TaskKind::SentimentBinary),
            "The theater was in Ohio. I hate the movie.");
  const auto nli = mock.reconstruct_text(
      "sent1:\n1-1. A man | is | on a horse\nsent2:\n2-1. A person | is | asleep\n\nlabel: "
      "contradiction",
      TaskKind::Nli3Way);
  EXPECT_EQ(split_nli_reconstruction(nli),
            std::make_pair(std::string("A man is on a horse."), std::string("A person is asleep.")));
}

TEST(Mock, IdDependsOnLexicons) {
  auto lex = default_mock_lexicons();
  MockBackend a(lex);
  lex.negations.insert("nope");
  MockBackend b(lex);
  EXPECT_NE(a.id(), b.id());
  EXPECT_EQ(a.id().rfind("mock-", 0), 0u);
  lex.antonyms["up"] = "down";
  EXPECT_CODE(MockBackend{lex}, ErrorCode::InvalidArgument);
  EXPECT_CODE(MockBackend{MockLexicons{}}, ErrorCode::InvalidArgument);
}

TEST(Mock, LoadsLexiconFiles) {
  testing::TempDir dir;
  std::ofstream(dir / "verbs.txt") << "is\nloves\n";
  std::ofstream(dir / "negations.txt") << "not\n";
  std::ofstream(dir / "antonyms.txt") << "# pairs\nUp down\n";
  const auto lex = load_mock_lexicons(dir.path());
  EXPECT_EQ(lex.antonyms.at("down"), "up");
  EXPECT_EQ(lex.verbs.size(), 2u);
  std::ofstream(dir / "antonyms.txt") << "a b c\n";
  EXPECT_CODE(load_mock_lexicons(dir.path()), ErrorCode::InvalidArgument);
  EXPECT_CODE(load_mock_lexicons(dir / "missing"), ErrorCode::Io);
}

TEST(Cache, PersistsAndIgnoresTruncatedTail) {
  testing::TempDir dir;
  const auto file = dir / "cache" / "responses.bin";
  {
    ResponseCache cache(file);
    cache.store({"k1", "one", {3, 4}, 100});
    cache.store({"k2", "two\nlines", {5, 6}, 101});
    cache.store({"k1", "ignored", {0, 0}, 102});
    EXPECT_EQ(cache.size(), 2u);
  }
  {
    std::ofstream(file, std::ios::binary | std::ios::app) << std::string("\x40\x00\x00\x00{\"key\"", 11);
  }
  ResponseCache reloaded(file);
  EXPECT_EQ(reloaded.size(), 2u);
  EXPECT_EQ(reloaded.find("k1")->response_text, "one");
  EXPECT_EQ(reloaded.find("k2")->usage, (TokenUsage{5, 6}));
  EXPECT_FALSE(reloaded.find("k3"));
  ResponseCache memory;
  memory.store({"a", "b", {}, 0});
  EXPECT_FALSE(memory.file());
}

TEST(CachedBackendTest, CountsHitsAndBilledUsage) {
  auto stub = std::make_shared<StubBackend>("1. I | hate | the movie");
  CachedBackend cached(stub, std::make_shared<ResponseCache>());
  const auto tmpl = default_template(TaskKind::SentimentBinary, PromptStage::Mod);
  const auto params = default_params(PromptStage::Mod);
  const auto a = modify_triple(cached, kLove, Label::Negative, tmpl, params);
  const auto b = modify_triple(cached, kLove, Label::Negative, tmpl, params);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.predicate, "hate");
  EXPECT_EQ(stub->calls, 1);
  const auto s = cached.stats();
  EXPECT_EQ(s.requests, 2);
  EXPECT_EQ(s.cache_hits, 1);
  EXPECT_EQ(s.backend_calls, 1);
  EXPECT_EQ(s.billed, (TokenUsage{10, 5}));
  EXPECT_EQ(cached.id(), "stub");
}

TEST(Pipeline, ModifyInheritsPositionAndTargetLabel) {
  StubBackend stub("Sure! Here it is:\n3. She | hates | it");
  const auto tmpl = default_template(TaskKind::SentimentBinary, PromptStage::Mod);
  Triple t{"He", "loves", "it", 1, 4};
  const auto out = modify_triple(stub, t, Label::Negative, tmpl, default_params(PromptStage::Mod));
  EXPECT_EQ(out, (Triple{"She", "hates", "it", 1, 4}));
  EXPECT_NE(stub.last_user.find("negative"), std::string::npos);
  StubBackend refuse("I can't do that.");
  EXPECT_CODE(modify_triple(refuse, t, Label::Negative, tmpl, default_params(PromptStage::Mod)),
              ErrorCode::UnparsableModification);
}

TEST(Pipeline, DecomposeGuards) {
  StubBackend stub("1. a | b | c", 100);
  const auto tmpl = default_template(TaskKind::SentimentBinary, PromptStage::Ext);
  auto params = default_params(PromptStage::Ext);
  EXPECT_CODE(decompose(stub, {"e", "   ", std::nullopt, Label::Positive}, tmpl, params),
              ErrorCode::EmptyText);
  params.max_tokens = 50;
  EXPECT_CODE(decompose(stub, {"e", "a b c", std::nullopt, Label::Positive}, tmpl, params),
              ErrorCode::ResponseTooLong);
  params.max_tokens = 100;
  EXPECT_EQ(decompose(stub, {"e", "a b c", std::nullopt, Label::Positive}, tmpl, params),
            "1. a | b | c");
  const auto rec = default_template(TaskKind::SentimentBinary, PromptStage::Rec);
  EXPECT_CODE(decompose(stub, {"e", "a b c", std::nullopt, Label::Positive}, rec, params),
              ErrorCode::InvalidArgument);
}

TEST(Pipeline, DecompositionContentForNli) {
  const Example ex{"e", "A dog runs.", std::string("An animal moves."), Label::Entailment};
  EXPECT_EQ(decomposition_content(ex, TaskKind::Nli3Way),
            "sent1: A dog runs.\nsent2: An animal moves.\nlabel: entailment");
  EXPECT_EQ(decomposition_content(ex, TaskKind::SentimentBinary), "A dog runs.");
}

TEST(Pipeline, ReconstructTrimsAndRejectsEmpty) {
  const auto tmpl = default_template(TaskKind::SentimentBinary, PromptStage::Rec);
  StubBackend ok("  I hate the movie.\n");
  EXPECT_EQ(reconstruct(ok, "1. I | hate | the movie", tmpl, default_params(PromptStage::Rec)),
            "I hate the movie.");
  StubBackend empty(" \n ");
  EXPECT_CODE(reconstruct(empty, "x", tmpl, default_params(PromptStage::Rec)),
              ErrorCode::EmptyReconstruction);
}

TEST(SplitNli, HeadersAreCaseInsensitive) {
  const auto [a, b] = split_nli_reconstruction("Reconstructed Sent1: One.\nRECONSTRUCTED SENT2: Two.");
  EXPECT_EQ(a, "One.");
  EXPECT_EQ(b, "Two.");
  EXPECT_CODE(split_nli_reconstruction("reconstructed sent1: only"), ErrorCode::EmptyReconstruction);
  EXPECT_CODE(split_nli_reconstruction("reconstructed sent1:\nreconstructed sent2: x"),
              ErrorCode::EmptyReconstruction);
}

}  // namespace
}  // namespace coba
