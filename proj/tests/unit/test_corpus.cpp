#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "claa/corpus.hpp"
#include "claa/error.hpp"
#include "claa/util.hpp"

namespace claa {
namespace {

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_benchmark(in);
}

BinaryDataset synthetic_task(std::size_t positives, std::size_t negatives, std::uint64_t seed = 0) {
  BinaryDataset d;
  d.aspect = Aspect::Portability;
  Rng rng(seed);
  for (std::size_t i = 0; i < positives + negatives; ++i) {
    BinaryItem it;
    it.sentence.id = "s" + std::to_string(i);
    it.sentence.text = "sentence " + std::to_string(i);
    it.label = i < positives ? 1 : 0;
    d.items.push_back(it);
  }
  shuffle_in_place(d.items, rng);
  return d;
}

TEST(LoadBenchmark, SingleRow) {
  const auto c = parse(R"({"id":"1","text":"Uses AES.","aspects":["Security"]})"
                       "\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.summary().count(Aspect::Security), 1u);
}

TEST(LoadBenchmark, UnknownLabelNamesRow) {
  try {
    parse(R"({"id":"1","text":"ok","aspects":[]})"
          "\n"
          R"({"id":"2","text":"fast","aspects":["Perf"]})"
          "\n");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('2'), std::string::npos);
    EXPECT_NE(msg.find("Perf"), std::string::npos);
  }
}

TEST(LoadBenchmark, EmptyTextRejected) {
  EXPECT_THROW(parse(R"({"id":"1","text":"  ","aspects":[]})"
                     "\n"),
               ValidationError);
}

TEST(LoadBenchmark, MissingFile) { EXPECT_THROW(load_benchmark("/nonexistent/claa.jsonl"), IoError); }

TEST(LoadBenchmark, JsonlRoundTrip) {
  const auto c = parse(R"({"id":"a","text":"One.","aspects":["Usability","Security"]})"
                       "\n"
                       R"({"id":"b","text":"Two.","aspects":[]})"
                       "\n");
  std::ostringstream out;
  write_corpus(c, out);
  EXPECT_EQ(parse(out.str()).sentences(), c.sentences());
}

TEST(ConvertCsv, TwoColumns) {
  std::istringstream in("text,aspects\n\"Fast, and safe\",Performance|Security\nPlain,\n");
  const auto c = convert_csv(in);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].text, "Fast, and safe");
  EXPECT_EQ(c[0].aspects, (std::vector<Aspect>{Aspect::Performance, Aspect::Security}));
  EXPECT_TRUE(c[1].aspects.empty());
}

TEST(DeriveBinaryTask, MultiLabelPositiveInBoth) {
  const auto c = parse(R"({"id":"1","text":"a","aspects":["Usability","Security"]})"
                       "\n"
                       R"({"id":"2","text":"b","aspects":["Others"]})"
                       "\n");
  EXPECT_EQ(derive_binary_task(c, Aspect::Usability).positives(), 1u);
  EXPECT_EQ(derive_binary_task(c, Aspect::Security).positives(), 1u);
  const auto none = derive_binary_task(c, Aspect::Legal);
  EXPECT_EQ(none.positives(), 0u);
  EXPECT_EQ(none.negatives(), 2u);
}

TEST(AugmentMinority, DoublesBelowThreshold) {
  const auto d = augment_minority(synthetic_task(70, 4452));
  EXPECT_EQ(d.positives(), 140u);
  EXPECT_EQ(d.negatives(), 4452u);
  EXPECT_TRUE(d.augmented);
}

TEST(AugmentMinority, BoundaryUnchanged) {
  EXPECT_EQ(augment_minority(synthetic_task(100, 50)).positives(), 100u);
  EXPECT_EQ(augment_minority(synthetic_task(1437, 50)).positives(), 1437u);
}

TEST(AugmentMinority, DoubleAugmentationRejected) {
  EXPECT_THROW(augment_minority(augment_minority(synthetic_task(5, 5))), ValidationError);
}

TEST(Folds, SizesAndDeterminism) {
  const auto d = synthetic_task(1437, 4522 - 1437);
  const auto plan = make_folds(d, 10, 3);
  auto sizes = plan.fold_sizes();
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(std::count(sizes.begin(), sizes.end(), 452u), 8);
  EXPECT_EQ(std::count(sizes.begin(), sizes.end(), 453u), 2);
  EXPECT_EQ(make_folds(d, 10, 3).assignments, plan.assignments);

  const auto small = make_folds(synthetic_task(5, 5), 10, 0);
  for (auto s : small.fold_sizes()) EXPECT_EQ(s, 1u);
}

TEST(Folds, DuplicatesColocated) {
  const auto d = augment_minority(synthetic_task(20, 80));
  const auto plan = make_folds(d, 10, 4);
  for (std::size_t f = 0; f < 10; ++f) {
    const auto split = split_fold(d, plan, f);
    std::set<std::string> test_ids;
    for (const auto& it : split.test.items) test_ids.insert(it.sentence.id);
    for (const auto& it : split.train.items) EXPECT_EQ(test_ids.count(it.sentence.id), 0u);
  }
}

TEST(Batches, ExhaustiveSmallCase) {
  const auto d = synthetic_task(2, 62);
  const auto batches = make_batches(d, 32, 1);
  ASSERT_EQ(batches.size(), 2u);
  for (const auto& b : batches) {
    std::size_t pos = 0;
    for (auto i : b.indices) pos += d.items[i].label;
    EXPECT_EQ(pos, 1u);
  }
}

TEST(Batches, AllPositiveAndAllNegative) {
  EXPECT_EQ(make_batches(synthetic_task(32, 0), 32, 1).size(), 1u);
  EXPECT_THROW(make_batches(synthetic_task(0, 10), 32, 1), ValidationError);
}

TEST(Batches, ShortfallPolicies) {
  const auto d = synthetic_task(2, 126);
  EXPECT_THROW(make_batches(d, 32, 1, ShortfallPolicy::Strict), ValidationError);
  const auto batches = make_batches(d, 32, 1);
  ASSERT_EQ(batches.size(), 4u);
  std::size_t total = 0;
  for (const auto& b : batches) {
    std::size_t pos = 0;
    for (auto i : b.indices) pos += d.items[i].label;
    EXPECT_GE(pos, 1u);
    EXPECT_LE(b.size(), 33u);
    total += b.size();
  }
  EXPECT_EQ(total, d.size() + 2);
}

TEST(Batches, PositivePerBatchOverRandomDatasets) {
  Rng rng(77);
  for (int t = 0; t < 200; ++t) {
    const std::size_t pos = 1 + uniform_index(rng, 60);
    const std::size_t neg = uniform_index(rng, 400);
    const auto d = augment_minority(synthetic_task(pos, neg, t));
    std::vector<int> seen(d.size(), 0);
    for (const auto& b : make_batches(d, 32, t)) {
      std::size_t p = 0;
      for (auto i : b.indices) {
        p += d.items[i].label;
        ++seen[i];
      }
      EXPECT_GE(p, 1u);
    }
    for (int s : seen) EXPECT_GE(s, 1);
  }
}

}  // namespace
}  // namespace claa
