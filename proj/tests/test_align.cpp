#include <doctest.h>

#include "oracles.hpp"
#include "syscomb/align.hpp"
#include "testutil.hpp"

using namespace syscomb;

namespace {

const std::vector<Sentence> kFig4{{"the", "black", "cab"},
                                  {"an", "red", "train"},
                                  {"a", "orange", "car"},
                                  {"a", "green", "car"}};

std::vector<Slot> slots_from(const Sentence& skeleton, int num_systems,
                             int skeleton_id) {
  std::vector<Slot> slots;
  for (const auto& w : skeleton) {
    Slot s;
    s.words.assign(num_systems, kEpsilon);
    s.words[skeleton_id] = w;
    slots.push_back(s);
  }
  return slots;
}

}  // namespace

TEST_CASE("select_primary tie-break and means") {
  CHECK(select_primary({{"a", "b"}, {"a", "b"}, {"a", "b"}}) == 0);
  CHECK(select_primary({{"x"}, {"y"}}) == 0);
  CHECK(select_primary(kFig4) == 2);

  // Cross-check against the exhaustive TER oracle: the chosen index must
  // minimize the mean of all pairwise TER rates.
  double best_mean = 1e18;
  int best = -1;
  for (int i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      sum += static_cast<double>(
                 testoracle::exhaustive_ter_edits(kFig4[j], kFig4[i])) /
             static_cast<double>(kFig4[i].size());
    }
    double mean = sum / 3.0;
    if (mean < best_mean) {
      best_mean = mean;
      best = i;
    }
  }
  CHECK(best == 2);
  CHECK(best_mean == doctest::Approx(7.0 / 9.0));
}

TEST_CASE("select_primary keeps the chosen sentence under permutation") {
  // The index tie-break is only string-stable within equal hypotheses, so
  // instances where distinct strings tie exactly on the mean are skipped.
  testoracle::Rng rng(55);
  int tested = 0;
  for (int round = 0; round < 60; ++round) {
    std::vector<Sentence> hyps;
    int num = 3 + rng.below(3);
    for (int i = 0; i < num; ++i)
      hyps.push_back(testoracle::random_sentence(rng, 6, 8));
    std::vector<double> means(num, 0.0);
    for (int i = 0; i < num; ++i)
      for (int j = 0; j < num; ++j)
        if (i != j) means[i] += ter(hyps[j], hyps[i]).rate / (num - 1);
    double best = *std::min_element(means.begin(), means.end());
    std::set<Sentence> winners;
    for (int i = 0; i < num; ++i)
      if (means[i] < best + 1e-12) winners.insert(hyps[i]);
    if (winners.size() > 1) continue;
    ++tested;
    Sentence chosen = hyps[select_primary(hyps)];
    std::vector<Sentence> rotated(hyps.begin() + 1, hyps.end());
    rotated.push_back(hyps.front());
    Sentence chosen2 = rotated[select_primary(rotated)];
    CHECK(chosen == chosen2);
  }
  CHECK(tested > 20);
}

TEST_CASE("align_pair examples") {
  auto skeleton = slots_from({"a", "car"}, 2, 0);
  auto ops = align_pair(skeleton, {"a", "red", "car"});
  CHECK(ops == std::vector<EditOp>{EditOp::Match, EditOp::Insert,
                                   EditOp::Match});

  auto same = align_pair(skeleton, {"a", "car"});
  CHECK(same == std::vector<EditOp>{EditOp::Match, EditOp::Match});

  auto fig4 = slots_from({"the", "black", "cab"}, 2, 0);
  auto subs = align_pair(fig4, {"an", "red", "train"});
  CHECK(subs == std::vector<EditOp>{EditOp::Substitute, EditOp::Substitute,
                                    EditOp::Substitute});
}

TEST_CASE("build_network reproduces the four-system example") {
  ConfusionNetwork cn = build_network(kFig4, 0);
  CHECK(cn.primary_id == 2);
  REQUIRE(cn.slots.size() == 3);
  CHECK(cn.slots[0].words ==
        std::vector<std::string>{"the", "an", "a", "a"});
  CHECK(cn.slots[1].words ==
        std::vector<std::string>{"black", "red", "orange", "green"});
  CHECK(cn.slots[2].words ==
        std::vector<std::string>{"cab", "train", "car", "car"});
}

TEST_CASE("build_network on identical hypotheses") {
  std::vector<Sentence> hyps(3, Sentence{"one", "two"});
  ConfusionNetwork cn = build_network(hyps, 0);
  REQUIRE(cn.slots.size() == 2);
  for (const auto& slot : cn.slots)
    for (const auto& w : slot.words) CHECK(w == slot.words[0]);
}

TEST_CASE("build_network with one-sided insertions") {
  ConfusionNetwork cn = build_network({{"a", "b", "c"}, {"b", "c", "d"}}, 0);
  CHECK(cn.primary_id == 0);
  REQUIRE(cn.slots.size() == 4);
  CHECK(cn.slots[0].words == std::vector<std::string>{"a", kEpsilon});
  CHECK(cn.slots[1].words == std::vector<std::string>{"b", "b"});
  CHECK(cn.slots[2].words == std::vector<std::string>{"c", "c"});
  CHECK(cn.slots[3].words == std::vector<std::string>{kEpsilon, "d"});
}

TEST_CASE("empty hypothesis becomes an all-epsilon row") {
  ConfusionNetwork cn = build_network({{"a", "b"}, {}}, 7);
  CHECK(cn.sentence_index == 7);
  CHECK(cn.system_path(0) == Sentence{"a", "b"});
  CHECK(cn.system_path(1).empty());
  for (const auto& slot : cn.slots) CHECK(slot.words[1] == kEpsilon);
}

TEST_CASE("path reconstruction and slot bounds on random networks") {
  testoracle::Rng rng(1002);
  for (int round = 0; round < 120; ++round) {
    int num = 2 + rng.below(4);
    std::vector<Sentence> hyps;
    std::size_t max_len = 0, sum_len = 0;
    for (int i = 0; i < num; ++i) {
      hyps.push_back(testoracle::random_sentence(rng, 8, 10,
                                                 rng.below(10) == 0 ? 0 : 1));
      max_len = std::max(max_len, hyps.back().size());
      sum_len += hyps.back().size();
    }
    ConfusionNetwork cn = build_network(hyps, round);
    for (int i = 0; i < num; ++i) CHECK(cn.system_path(i) == hyps[i]);
    CHECK(cn.slots.size() >= max_len);
    CHECK(cn.slots.size() <= std::max<std::size_t>(sum_len, 1));
    for (const auto& slot : cn.slots) {
      REQUIRE(slot.words.size() == static_cast<std::size_t>(num));
      // at least one real word per slot
      bool any = false;
      for (const auto& w : slot.words) any = any || !is_epsilon(w);
      if (!cn.slots.empty() && sum_len > 0) CHECK(any);
      // supports partition the systems
      auto arcs = merge_slot(slot);
      std::vector<int> all;
      for (const auto& a : arcs)
        all.insert(all.end(), a.support.begin(), a.support.end());
      std::sort(all.begin(), all.end());
      std::vector<int> expect(num);
      for (int i = 0; i < num; ++i) expect[i] = i;
      CHECK(all == expect);
    }
  }
}

TEST_CASE("merge_slot groups by first occurrence") {
  Slot slot1{{"a", "a", "a", "a"}};
  auto m1 = merge_slot(slot1);
  REQUIRE(m1.size() == 1);
  CHECK(m1[0].word == "a");
  CHECK(m1[0].support == std::vector<int>{0, 1, 2, 3});

  Slot slot2{{"the", "an", "a", "a"}};
  auto m2 = merge_slot(slot2);
  REQUIRE(m2.size() == 3);
  CHECK(m2[0].word == "the");
  CHECK(m2[1].word == "an");
  CHECK(m2[2].word == "a");
  CHECK(m2[2].support == std::vector<int>{2, 3});

  Slot slot3{{"cab", kEpsilon, "car", "car"}};
  auto m3 = merge_slot(slot3);
  REQUIRE(m3.size() == 3);
  CHECK(m3[1].word == kEpsilon);
  CHECK(m3[1].support == std::vector<int>{1});
  CHECK(m3[2].support == std::vector<int>{2, 3});
}

TEST_CASE("network json round trip is byte exact") {
  ConfusionNetwork cn = build_network(kFig4, 3);
  std::string line = network_to_json(cn);
  ConfusionNetwork back = network_from_json(line);
  CHECK(back == cn);
  CHECK(network_to_json(back) == line);

  testutil::TempDir dir("align_json");
  write_networks({cn, cn}, dir.file("cn.jsonl"));
  auto loaded = read_networks(dir.file("cn.jsonl"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0] == cn);
  CHECK_THROWS_AS(network_from_json("{not json"), format_error);
}
