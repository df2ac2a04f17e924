#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "syscomb/decode.hpp"
#include "testutil.hpp"

using namespace syscomb;

namespace {

TrigramLM toy_lm() {
  Sentence ab{"a", "b"};
  std::vector<std::vector<Sentence>> systems{{ab}, {ab}};
  return TrigramLM::train(systems);
}

// Independent path scorer: walks one enumerated path and accumulates the
// linear score directly from the definitions.
double path_score(const ConfusionNetwork& cn,
                  const testoracle::EnumeratedPath& path,
                  const Weights& weights, const TrigramLM& lm) {
  const int num = cn.num_systems;
  double score = 0.0;
  std::string h1 = kSentStart, h2 = kSentStart;
  for (std::size_t t = 0; t < cn.slots.size(); ++t) {
    auto arcs = merge_slot(cn.slots[t]);
    const MergedArc& arc = arcs[path.arc_choice[t]];
    for (int s : arc.support) {
      score += weights.values[s];
      if (s == cn.primary_id) score += weights.values[num];
    }
    if (!is_epsilon(arc.word)) {
      score += weights.values[num + 1] * lm.log_prob(h1, h2, arc.word);
      score += weights.values[num + 2];
      h1 = h2;
      h2 = arc.word;
    }
  }
  score += weights.values[num + 1] * lm.log_prob(h1, h2, kSentEnd);
  return score;
}

}  // namespace

TEST_CASE("witten-bell trigram frozen values") {
  Sentence ab{"a", "b"};
  std::vector<std::vector<Sentence>> systems{{ab}};
  TrigramLM lm = TrigramLM::train(systems);
  // events a, b, </s>; three root types; p0 = 1/4
  CHECK(lm.prob("x", "x", "a") == doctest::Approx(7.0 / 24.0).epsilon(1e-12));
  CHECK(lm.prob(kSentStart, "a", "b") ==
        doctest::Approx(79.0 / 96.0).epsilon(1e-12));
  CHECK(lm.prob(kSentStart, kSentStart, "a") >
        lm.prob(kSentStart, kSentStart, "b"));
}

TEST_CASE("count dominance in repeated corpus") {
  TrigramLM lm = toy_lm();
  CHECK(lm.prob(kSentStart, "a", "b") > lm.prob(kSentStart, "a", "a"));
}

TEST_CASE("conditional distributions sum to one") {
  testoracle::Rng rng(640);
  std::vector<Sentence> sentences;
  for (int i = 0; i < 12; ++i)
    sentences.push_back(testoracle::random_sentence(rng, 7, 9));
  TrigramLM lm = TrigramLM::train({sentences});
  const auto& events = lm.event_vocab();
  for (int round = 0; round < 100; ++round) {
    std::string h1 =
        round % 3 == 0 ? "nope" : "w" + std::to_string(rng.below(9));
    std::string h2 =
        round % 5 == 0 ? kSentStart : "w" + std::to_string(rng.below(12));
    double sum = 0.0;
    for (const auto& w : events) sum += lm.prob(h1, h2, w);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("arc feature vectors") {
  MergedArc a{"a", {2, 3}};
  auto f = arc_features(a, 2, 4);
  CHECK(f == std::vector<double>{0, 0, 1, 1, 1, 1});

  MergedArc eps{kEpsilon, {1}};
  auto f2 = arc_features(eps, 2, 4);
  CHECK(f2 == std::vector<double>{0, 1, 0, 0, 0, 0});

  MergedArc all{"x", {0, 1, 2, 3}};
  auto f3 = arc_features(all, 2, 4);
  CHECK(f3 == std::vector<double>{1, 1, 1, 1, 1, 1});
}

TEST_CASE("majority vote wins with uniform voting weights") {
  ConfusionNetwork cn;
  cn.num_systems = 4;
  cn.primary_id = 0;
  cn.sentence_index = 0;
  cn.slots = {Slot{{"x", "x", "x", "y"}}};
  Weights w = make_weights(4, false, 0.0);
  for (int i = 0; i < 4; ++i) w.values[i] = 1.0;
  TrigramLM lm = toy_lm();
  NBestList list = decode_nbest(cn, w, lm, nullptr, 4);
  REQUIRE(!list.entries.empty());
  CHECK(list.entries.front().words == Sentence{"x"});
}

TEST_CASE("zero weights tie-break lexicographically") {
  ConfusionNetwork cn;
  cn.num_systems = 2;
  cn.primary_id = 0;
  cn.slots = {Slot{{"b", "a"}}};
  Weights w = make_weights(2, false, 0.0);
  TrigramLM lm = toy_lm();
  NBestList list = decode_nbest(cn, w, lm, nullptr, 5);
  REQUIRE(list.entries.size() == 2);
  CHECK(list.entries[0].words == Sentence{"a"});
  CHECK(list.entries[1].words == Sentence{"b"});
}

TEST_CASE("exact n-best equals brute-force enumeration") {
  testoracle::Rng rng(512);
  for (int round = 0; round < 40; ++round) {
    ConfusionNetwork cn = testoracle::random_network(rng, 6, 3, 6, 3);
    cn.primary_id = rng.below(3);
    std::vector<Sentence> lm_data;
    for (int i = 0; i < 3; ++i) lm_data.push_back(cn.system_path(i));
    if (lm_data[0].empty()) lm_data[0] = {"pad"};
    TrigramLM lm = TrigramLM::train({lm_data});
    Weights w = make_weights(3, false, 0.0);
    for (int d = 0; d < w.dim(); ++d)
      w.values[d] = testoracle::Rng(round * 31 + d).unit() * 2.0 - 1.0;

    NBestList mine = decode_nbest(cn, w, lm, nullptr, kAllPaths);

    std::map<Sentence, double> best_by_surface;
    for (const auto& path : testoracle::enumerate_paths(cn)) {
      double s = path_score(cn, path, w, lm);
      auto [it, fresh] = best_by_surface.emplace(path.words, s);
      if (!fresh) it->second = std::max(it->second, s);
    }
    REQUIRE(mine.entries.size() == best_by_surface.size());
    for (const auto& e : mine.entries) {
      auto it = best_by_surface.find(e.words);
      REQUIRE(it != best_by_surface.end());
      CHECK(e.score == doctest::Approx(it->second).epsilon(1e-9));
      // stored features reproduce the stored score under the weights
      double dot = 0.0;
      for (int d = 0; d < w.dim(); ++d) dot += w.values[d] * e.features[d];
      CHECK(dot == doctest::Approx(e.score).epsilon(1e-9));
    }
    // descending scores
    for (std::size_t i = 1; i < mine.entries.size(); ++i)
      CHECK(mine.entries[i - 1].score >= mine.entries[i].score - 1e-12);
  }
}

TEST_CASE("per-slot majority property under pure voting") {
  testoracle::Rng rng(99);
  for (int round = 0; round < 25; ++round) {
    ConfusionNetwork cn = testoracle::random_network(rng, 5, 3, 5, 4);
    Weights w = make_weights(4, false, 0.0);
    for (int i = 0; i < 4; ++i) w.values[i] = 1.0;
    std::vector<Sentence> lm_data;
    for (int i = 0; i < 4; ++i) lm_data.push_back(cn.system_path(i));
    if (lm_data[0].empty()) lm_data[0] = {"pad"};
    TrigramLM lm = TrigramLM::train({lm_data});
    NBestList list = decode_nbest(cn, w, lm, nullptr, 1);
    // reconstruct the chosen arcs: score equals sum of support sizes, so the
    // 1-best must pick a maximal-support arc in every slot
    double expect = 0.0;
    for (const auto& slot : cn.slots) {
      std::size_t best = 0;
      for (const auto& arc : merge_slot(slot))
        best = std::max(best, arc.support.size());
      expect += static_cast<double>(best);
    }
    CHECK(list.entries.front().score == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("localVote with zero weight changes nothing") {
  ConfusionNetwork cn;
  cn.num_systems = 2;
  cn.primary_id = 0;
  cn.slots = {Slot{{"a", "b"}}, Slot{{"c", "c"}}};
  TrigramLM lm = toy_lm();

  NNConfig cfg;
  cfg.hidden_size = 4;
  cfg.projection_dim = 3;
  cfg.epochs = 2;
  std::vector<WordExample> ex{{{"a", "b"}, "a"}, {{"c", "c"}, "c"}};
  LocalVoteScorer scorer{train(ex, cfg, 2), std::nullopt};

  Weights base = make_weights(2, false, 0.7);
  Weights with_lv = make_weights(2, true, 0.7);
  with_lv.values.back() = 0.0;

  NBestList plain = decode_nbest(cn, base, lm, nullptr, kAllPaths);
  NBestList lv = decode_nbest(cn, with_lv, lm, &scorer, kAllPaths);
  REQUIRE(plain.entries.size() == lv.entries.size());
  for (std::size_t i = 0; i < plain.entries.size(); ++i) {
    CHECK(plain.entries[i].words == lv.entries[i].words);
    CHECK(plain.entries[i].score ==
          doctest::Approx(lv.entries[i].score).epsilon(1e-12));
  }
}

TEST_CASE("decode_corpus is deterministic and respects identity") {
  std::vector<Sentence> sent{{"the", "same", "line"}};
  std::vector<ConfusionNetwork> networks{
      build_network({sent[0], sent[0], sent[0]}, 0)};
  TrigramLM lm = TrigramLM::train({{sent[0]}, {sent[0]}, {sent[0]}});
  Weights w = make_weights(3, false);
  DecodeResult a = decode_corpus(networks, w, lm, nullptr, 5);
  CHECK(a.onebest[0] == sent[0]);

  testutil::TempDir dir("decode_nbest");
  write_nbest(a.nbest, dir.file("a.txt"));
  DecodeResult b = decode_corpus(networks, w, lm, nullptr, 5);
  write_nbest(b.nbest, dir.file("b.txt"));
  CHECK(testutil::read_file(dir.file("a.txt")) ==
        testutil::read_file(dir.file("b.txt")));

  auto lists = read_nbest(dir.file("a.txt"));
  REQUIRE(lists.size() == 1);
  REQUIRE(lists[0].entries.size() == a.nbest[0].entries.size());
  CHECK(lists[0].entries[0].words == a.nbest[0].entries[0].words);
  CHECK(lists[0].entries[0].score ==
        doctest::Approx(a.nbest[0].entries[0].score).epsilon(1e-15));
  CHECK(lists[0].entries[0].features == a.nbest[0].entries[0].features);
}

TEST_CASE("weight dimension mismatch") {
  ConfusionNetwork cn;
  cn.num_systems = 2;
  cn.slots = {Slot{{"a", "b"}}};
  Weights w = make_weights(3, false);
  CHECK_THROWS_AS(decode_nbest(cn, w, toy_lm(), nullptr, 1), config_error);
}

TEST_CASE("weights file round trip") {
  testutil::TempDir dir("weights");
  Weights w = make_weights(2, true);
  w.values = {0.25, -1.5, 3.0, 1e-9, 0.125, -7.75};
  write_weights(w, dir.file("w.tsv"));
  Weights back = read_weights(dir.file("w.tsv"));
  CHECK(back.names == w.names);
  CHECK(back.values == w.values);
}
