#include <numeric>

#include <gtest/gtest.h>

#include "coba/ensemble.hpp"
#include "coba/rng.hpp"
#include "coba/triple.hpp"
#include "helpers.hpp"

namespace coba {
namespace {

Triple T(std::string s, std::string p, std::string o, int group = 1, int ordinal = 0) {
  return {std::move(s), std::move(p), std::move(o), group, ordinal};
}

TEST(ParseTriples, SentimentList) {
  const auto r = parse_triples("1. I | love | the movie\n2. The theater | was in | Ohio",
                               TaskKind::SentimentBinary);
  ASSERT_EQ(r.triples.size(), 2u);
  EXPECT_EQ(r.triples.entries[0].triple, T("I", "love", "the movie", 1, 0));
  EXPECT_EQ(r.triples.entries[1].triple, T("The theater", "was in", "Ohio", 1, 1));
  EXPECT_EQ(r.skipped_lines, 0u);
}

TEST(ParseTriples, NliHeadersAndGroupNumbers) {
  const auto r = parse_triples(
      "sent1:\n1-1. A woman | talks on | a cellphone\n\nsent2:\n2-1. A man | is | sitting\n"
      "label: neutral\n",
      TaskKind::Nli3Way);
  ASSERT_EQ(r.triples.size(), 2u);
  EXPECT_EQ(r.triples.entries[0].triple.group, 1);
  EXPECT_EQ(r.triples.entries[1].triple.group, 2);
  EXPECT_EQ(r.skipped_lines, 1u);
}

TEST(ParseTriples, HeaderAssignsGroupWithoutPrefix) {
  const auto r = parse_triples("Sent2:\n1. b | c | d\nsent1:\n1. a | b | c", TaskKind::Nli3Way);
  EXPECT_EQ(r.triples.entries[0].triple.group, 2);
  EXPECT_EQ(r.triples.entries[1].triple.group, 1);
}

TEST(ParseTriples, SkipsProseAndBadLines) {
  const auto r = parse_triples(
      "Here are the triples:\n1. a | b | c\n2. only | two\n3. x | y | z | w\n4. | p | o\nb | c | d\n5. s | p | o",
      TaskKind::SentimentBinary);
  EXPECT_EQ(r.triples.size(), 2u);
  EXPECT_EQ(r.skipped_lines, 5u);
}

TEST(ParseTriples, OrdinalsFollowNumbersWhenTheyArePermutation) {
  const auto r = parse_triples("2. a | b | c\n1. d | e | f", TaskKind::SentimentBinary);
  EXPECT_EQ(r.triples.entries[0].triple.ordinal, 1);
  EXPECT_EQ(r.triples.entries[1].triple.ordinal, 0);
  const auto gaps = parse_triples("3. a | b | c\n7. d | e | f", TaskKind::SentimentBinary);
  EXPECT_EQ(gaps.triples.entries[0].triple.ordinal, 0);
  EXPECT_EQ(gaps.triples.entries[1].triple.ordinal, 1);
}

TEST(ParseTriples, Errors) {
  EXPECT_CODE(parse_triples("no triples here", TaskKind::SentimentBinary),
              ErrorCode::EmptyDecomposition);
  EXPECT_CODE(parse_triples("", TaskKind::SentimentBinary), ErrorCode::EmptyDecomposition);
  EXPECT_CODE(parse_triples("sent1:\n1-1. a | b | c", TaskKind::Nli3Way), ErrorCode::MissingGroup);
}

TEST(ParseTripleLine, OptionalNumber) {
  Triple t;
  EXPECT_TRUE(parse_triple_line("I | hate | the movie", t));
  EXPECT_EQ(t.predicate, "hate");
  EXPECT_TRUE(parse_triple_line("  1. I | hate | it ", t));
  EXPECT_EQ(t.object, "it");
  EXPECT_FALSE(parse_triple_line("I hate it", t));
}

TEST(SerializeTriples, SentimentFormat) {
  TripleSet ts{TaskKind::SentimentBinary,
               {{T("b", "c", "d", 1, 1), TripleCategory::Normal},
                {T("a", "b", "c", 1, 0), TripleCategory::Principal}}};
  EXPECT_EQ(serialize_triples(ts), "2. b | c | d\n1. a | b | c");
  EXPECT_EQ(serialize_triples(ts, Numbering::Sequential), "1. b | c | d\n2. a | b | c");
}

TEST(SerializeTriples, NliFormat) {
  TripleSet ts{TaskKind::Nli3Way,
               {{T("a", "b", "c", 1, 0), TripleCategory::Normal},
                {T("d", "e", "f", 2, 0), TripleCategory::Normal}}};
  EXPECT_EQ(serialize_triples(ts), "sent1:\n1-1. a | b | c\n\nsent2:\n2-1. d | e | f");
}

TEST(SerializeTriples, DelimiterCollision) {
  TripleSet ts{TaskKind::SentimentBinary, {{T("a|b", "c", "d"), TripleCategory::Normal}}};
  EXPECT_CODE(serialize_triples(ts), ErrorCode::DelimiterCollision);
  EXPECT_CODE(format_triple(T("a", "b\nc", "d")), ErrorCode::DelimiterCollision);
}

TEST(Categorize, SpuriousTakesPrecedence) {
  TripleSet ts{TaskKind::SentimentBinary,
               {{T("I", "love", "the movie"), TripleCategory::Normal},
                {T("The theater", "was in", "Ohio", 1, 1), TripleCategory::Normal},
                {T("Ohio", "is", "lovely", 1, 2), TripleCategory::Normal},
                {T("It", "rained", "today", 1, 3), TripleCategory::Normal}}};
  WordSets ws{{"love", "lovely"}, {"ohio"}};
  const auto c = categorize(ts, ws);
  EXPECT_EQ(c.entries[0].category, TripleCategory::Principal);
  EXPECT_EQ(c.entries[1].category, TripleCategory::Spurious);
  EXPECT_EQ(c.entries[2].category, TripleCategory::Spurious);
  EXPECT_EQ(c.entries[3].category, TripleCategory::Normal);
  EXPECT_EQ(c.count(TripleCategory::Spurious), 2u);
}

TEST(Categorize, MatchesWholeTokensOnly) {
  TripleSet ts{TaskKind::SentimentBinary, {{T("Lovers", "meet", "downtown"), TripleCategory::Normal}}};
  EXPECT_EQ(categorize(ts, WordSets{{"love"}, {"town"}}).entries[0].category, TripleCategory::Normal);
}

TEST(ValidateTripleSet, RejectsBadSets) {
  EXPECT_CODE(validate(TripleSet{}), ErrorCode::InvalidArgument);
  TripleSet dup{TaskKind::SentimentBinary,
                {{T("a", "b", "c"), TripleCategory::Normal}, {T("d", "e", "f"), TripleCategory::Normal}}};
  EXPECT_CODE(validate(dup), ErrorCode::InvalidArgument);
  TripleSet one_group{TaskKind::Nli3Way, {{T("a", "b", "c"), TripleCategory::Normal}}};
  EXPECT_CODE(validate(one_group), ErrorCode::MissingGroup);
}

std::string random_slot(Rng& rng) {
  static const std::vector<std::string> words = {
      "a", "dog", "The", "runs", "in", "Ohio", "caf\xC3\xA9", "1.", "x-y", "don't", "sent1:", "(b)", "9-2"};
  std::string s;
  const auto n = 1 + rng.below(4);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (i) s += rng.bernoulli(0.2) ? "  " : " ";
    s += words[rng.below(words.size())];
  }
  return s;
}

TEST(SerializeTriples, RandomRoundTrip) {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const bool nli = trial % 2;
    TripleSet ts{nli ? TaskKind::Nli3Way : TaskKind::SentimentBinary, {}};
    for (int g = 1; g <= (nli ? 2 : 1); ++g) {
      const int m = 1 + static_cast<int>(rng.below(6));
      std::vector<int> ordinals(static_cast<std::size_t>(m));
      std::iota(ordinals.begin(), ordinals.end(), 0);
      rng.shuffle(std::span<int>(ordinals));
      for (int o : ordinals) {
        ts.entries.push_back({T(random_slot(rng), random_slot(rng), random_slot(rng), g, o),
                              TripleCategory::Normal});
      }
    }
    const auto back = parse_triples(serialize_triples(ts), ts.task);
    ASSERT_EQ(back.triples, ts) << serialize_triples(ts);
    ASSERT_EQ(back.skipped_lines, 0u);
  }
}

}  // namespace
}  // namespace coba
