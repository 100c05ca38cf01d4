#include <fstream>

#include <gtest/gtest.h>

#include "coba/corpus.hpp"
#include "helpers.hpp"

namespace coba {
namespace {

TEST(Corpus, JsonlFieldMapping) {
  const auto ds = parse_dataset(R"({"text":"great movie","label":"positive"})",
                                DataFormat::Jsonl, TaskKind::SentimentBinary);
  ASSERT_EQ(ds.examples.size(), 1u);
  EXPECT_EQ(ds.examples[0].text1, "great movie");
  EXPECT_EQ(ds.examples[0].label, Label::Positive);
  EXPECT_FALSE(ds.examples[0].text2);
  EXPECT_EQ(ds.examples[0].id, "row-1");
}

TEST(Corpus, TsvNliFieldMapping) {
  const auto ds = parse_dataset("premise\thypothesis\tneutral\n", DataFormat::Tsv,
                                TaskKind::Nli3Way);
  ASSERT_EQ(ds.examples.size(), 1u);
  EXPECT_EQ(ds.examples[0].text1, "premise");
  EXPECT_EQ(ds.examples[0].text2, "hypothesis");
  EXPECT_EQ(ds.examples[0].label, Label::Neutral);
}

TEST(Corpus, LabelOutsideSpaceIsMalformed) {
  EXPECT_CODE(parse_dataset(R"({"text":"x","label":"happy"})", DataFormat::Jsonl,
                            TaskKind::SentimentBinary),
              ErrorCode::MalformedRecord);
  EXPECT_CODE(parse_dataset("a\tb\tpositive", DataFormat::Tsv, TaskKind::Nli3Way),
              ErrorCode::MalformedRecord);
}

TEST(Corpus, ErrorsCarryLineNumbers) {
  const std::string content =
      "{\"text\":\"a\",\"label\":\"positive\"}\n\n{\"label\":\"negative\"}\n";
  try {
    parse_dataset(content, DataFormat::Jsonl, TaskKind::SentimentBinary);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Corpus, MalformedInputs) {
  const auto task = TaskKind::SentimentBinary;
  EXPECT_CODE(parse_dataset("not json", DataFormat::Jsonl, task), ErrorCode::MalformedRecord);
  EXPECT_CODE(parse_dataset(R"({"text":"a"})", DataFormat::Jsonl, task), ErrorCode::MalformedRecord);
  EXPECT_CODE(parse_dataset(R"({"text":"","label":"positive"})", DataFormat::Jsonl, task),
              ErrorCode::MalformedRecord);
  EXPECT_CODE(parse_dataset(R"({"text":"a","text2":"b","label":"positive"})", DataFormat::Jsonl, task),
              ErrorCode::MalformedRecord);
  EXPECT_CODE(parse_dataset(R"({"text":"a","label":"entailment"})", DataFormat::Jsonl,
                            TaskKind::Nli3Way),
              ErrorCode::MalformedRecord);
  EXPECT_CODE(parse_dataset("a\tb\tpositive", DataFormat::Tsv, task), ErrorCode::MalformedRecord);
  EXPECT_CODE(parse_dataset(
                  "{\"id\":\"x\",\"text\":\"a\",\"label\":\"positive\"}\n"
                  "{\"id\":\"x\",\"text\":\"b\",\"label\":\"positive\"}",
                  DataFormat::Jsonl, task),
              ErrorCode::MalformedRecord);
}

TEST(Corpus, EmptyDataset) {
  EXPECT_CODE(parse_dataset("\n\n", DataFormat::Jsonl, TaskKind::SentimentBinary),
              ErrorCode::EmptyDataset);
  EXPECT_CODE(parse_dataset("text\tlabel\n", DataFormat::Tsv, TaskKind::SentimentBinary, {true}),
              ErrorCode::EmptyDataset);
}

TEST(Corpus, JsonlRoundTripIsFixedPoint) {
  const std::string content =
      "{\"id\":\"a\",\"text\":\"Caf\xC3\xA9 \\\"quoted\\\"\",\"label\":\"positive\"}\n"
      "{\"id\":\"b\",\"text\":\"line\\nbreak\",\"label\":\"negative\"}\n";
  const auto ds = parse_dataset(content, DataFormat::Jsonl, TaskKind::SentimentBinary);
  EXPECT_EQ(serialize_dataset(ds, DataFormat::Jsonl), content);
}

TEST(Corpus, NliRoundTrips) {
  const std::string jsonl =
      "{\"id\":\"p1\",\"text\":\"A man sleeps.\",\"text2\":\"A person rests.\",\"label\":\"entailment\"}\n";
  const auto ds = parse_dataset(jsonl, DataFormat::Jsonl, TaskKind::Nli3Way);
  EXPECT_EQ(serialize_dataset(ds, DataFormat::Jsonl), jsonl);
  const std::string tsv = "A man sleeps.\tA person rests.\tentailment\nx\ty\tcontradiction\n";
  const auto t = parse_dataset(tsv, DataFormat::Tsv, TaskKind::Nli3Way);
  EXPECT_EQ(serialize_dataset(t, DataFormat::Tsv), tsv);
}

TEST(Corpus, TsvRefusesTabsInText) {
  Dataset ds{TaskKind::SentimentBinary, {{"a", "x\ty", std::nullopt, Label::Positive}}};
  EXPECT_CODE(serialize_dataset(ds, DataFormat::Tsv), ErrorCode::InvalidArgument);
}

TEST(Corpus, LoadFromDisk) {
  testing::TempDir dir;
  const auto path = dir / "d.tsv";
  {
    std::ofstream out(path);
    out << "text\tlabel\r\ngood\tpositive\r\nbad\tnegative\r\n";
  }
  const auto ds = load_dataset(path, format_from_path(path), TaskKind::SentimentBinary, {true});
  ASSERT_EQ(ds.examples.size(), 2u);
  EXPECT_EQ(ds.examples[1].id, "row-2");
  EXPECT_EQ(ds.examples[1].label, Label::Negative);
  EXPECT_CODE(load_dataset(dir / "missing.jsonl", DataFormat::Jsonl, TaskKind::SentimentBinary),
              ErrorCode::Io);
}

TEST(Corpus, LabelSpaces) {
  EXPECT_EQ(labels(TaskKind::SentimentBinary).size(), 2u);
  EXPECT_EQ(labels(TaskKind::Nli3Way).size(), 3u);
  EXPECT_EQ(label_index(TaskKind::Nli3Way, Label::Contradiction), 2u);
  EXPECT_CODE(label_index(TaskKind::SentimentBinary, Label::Neutral), ErrorCode::UnknownLabel);
  EXPECT_EQ(parse_task("nli"), TaskKind::Nli3Way);
  EXPECT_EQ(parse_task("sentiment-binary"), TaskKind::SentimentBinary);
  EXPECT_FALSE(parse_label("happy"));
}

TEST(Corpus, SplitIsDeterministicAndOrderPreserving) {
  Dataset ds{TaskKind::SentimentBinary, {}};
  for (int i = 0; i < 20; ++i) {
    ds.examples.push_back({"e" + std::to_string(i), "t", std::nullopt,
                           i % 2 ? Label::Positive : Label::Negative});
  }
  const auto [a, b] = split_dataset(ds, 0.25, 9);
  const auto [c, d] = split_dataset(ds, 0.25, 9);
  EXPECT_EQ(a.examples.size(), 5u);
  EXPECT_EQ(b.examples.size(), 15u);
  std::vector<std::string> ids_a, ids_c;
  for (const auto& e : a.examples) ids_a.push_back(e.id);
  for (const auto& e : c.examples) ids_c.push_back(e.id);
  EXPECT_EQ(ids_a, ids_c);
  EXPECT_TRUE(std::is_sorted(ids_a.begin(), ids_a.end(), [](const auto& x, const auto& y) {
    return std::stoi(x.substr(1)) < std::stoi(y.substr(1));
  }));
}

}  // namespace
}  // namespace coba
