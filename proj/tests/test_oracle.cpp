#include <doctest.h>

#include "oracles.hpp"
#include "syscomb/align.hpp"
#include "syscomb/metrics.hpp"
#include "syscomb/decode.hpp"
#include "syscomb/oracle.hpp"
#include "testutil.hpp"

using namespace syscomb;

namespace {

const std::vector<Sentence> kFig4{{"the", "black", "cab"},
                                  {"an", "red", "train"},
                                  {"a", "orange", "car"},
                                  {"a", "green", "car"}};
const Sentence kRef{"the", "blue", "car"};

}  // namespace

TEST_CASE("simplify_unk rewrites words absent from the reference") {
  ConfusionNetwork cn = build_network(kFig4, 0);
  ConfusionNetwork simple = simplify_unk(cn, kRef);
  CHECK(simple.slots[1].words ==
        std::vector<std::string>{kUnkWord, kUnkWord, kUnkWord, kUnkWord});
  // per-word rule: cab and train go to UNK even though car survives
  CHECK(simple.slots[2].words ==
        std::vector<std::string>{kUnkWord, kUnkWord, "car", "car"});

  ConfusionNetwork untouched = cn;
  untouched.slots.resize(1);
  ConfusionNetwork s2 =
      simplify_unk(untouched, {"the", "an", "a"});
  CHECK(s2.slots[0].words == untouched.slots[0].words);

  Slot mixed{{"cab", kEpsilon, "car", "car"}};
  ConfusionNetwork cn3;
  cn3.num_systems = 4;
  cn3.slots = {mixed};
  ConfusionNetwork s3 = simplify_unk(cn3, kRef);
  CHECK(s3.slots[0].words ==
        std::vector<std::string>{kUnkWord, kEpsilon, "car", "car"});
}

TEST_CASE("oracle on the four-system example") {
  ConfusionNetwork cn = build_network(kFig4, 0);
  ConfusionNetwork simple = simplify_unk(cn, kRef);
  OracleConfig cfg;
  OraclePath path = extract_oracle(simple, kRef, cfg);
  CHECK(path.words == Sentence{"the", kUnkWord, "car"});
  CHECK(path.sbleu == doctest::Approx(0.5946035575013605).epsilon(1e-12));
  REQUIRE(path.decisions.size() == 3);
  CHECK(path.decisions[0].word == "the");
  CHECK(path.decisions[0].support == std::vector<int>{0});
  CHECK(path.decisions[1].word == kUnkWord);
  CHECK(path.decisions[1].support == std::vector<int>{0, 1, 2, 3});
  CHECK(path.decisions[2].word == "car");
  CHECK(path.decisions[2].support == std::vector<int>{2, 3});

  // same score and same reference-word choices on the raw network
  OraclePath raw = extract_oracle(cn, kRef, cfg);
  CHECK(raw.sbleu == doctest::Approx(path.sbleu).epsilon(1e-12));
  CHECK(raw.decisions[0].word == "the");
  CHECK(raw.decisions[2].word == "car");
}

TEST_CASE("oracle reaches 1.0 when a system equals the reference") {
  std::vector<Sentence> hyps{{"x", "y", "z"}, {"the", "blue", "car"},
                             {"a", "blue", "cab"}};
  ConfusionNetwork cn = build_network(hyps, 0);
  OraclePath path = extract_oracle(simplify_unk(cn, kRef), kRef, {});
  CHECK(path.sbleu == doctest::Approx(1.0));
  CHECK(path.words == kRef);
}

TEST_CASE("oracle equals exhaustive enumeration with unlimited beam") {
  testoracle::Rng rng(33001);
  OracleConfig cfg;
  cfg.k = kUnlimitedBeam;
  for (int round = 0; round < 60; ++round) {
    ConfusionNetwork cn = testoracle::random_network(rng, 8, 4, 10, 4);
    Sentence ref = testoracle::random_sentence(rng, 8, 10);
    OraclePath path = extract_oracle(cn, ref, cfg);
    double best = testoracle::best_path_sbleu(cn, ref);
    CHECK(path.sbleu == doctest::Approx(best).epsilon(1e-12));
    // the reported surface achieves the reported score
    CHECK(sentence_bleu(path.words, ref) ==
          doctest::Approx(path.sbleu).epsilon(1e-12));
  }
}

TEST_CASE("oracle score grows with the beam on aligned networks") {
  // Monotonicity is asserted on networks built by the aligner from noisy
  // copies of the reference, the distribution this module serves. The
  // unlimited-beam score also bounds every finite beam from above.
  testoracle::Rng rng(909);
  for (int round = 0; round < 40; ++round) {
    Sentence ref = testoracle::random_sentence(rng, 8, 8, 3);
    std::vector<Sentence> hyps;
    for (int i = 0; i < 4; ++i) {
      Sentence h = ref;
      for (auto& w : h)
        if (rng.below(5) == 0) w = "w" + std::to_string(rng.below(8));
      if (rng.below(4) == 0 && h.size() > 1) h.pop_back();
      hyps.push_back(std::move(h));
    }
    ConfusionNetwork cn = build_network(hyps, round);
    ConfusionNetwork simple = simplify_unk(cn, ref);
    OracleConfig cfg;
    cfg.k = kUnlimitedBeam;
    double exact = extract_oracle(simple, ref, cfg).sbleu;
    double prev = -1.0;
    for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{4},
                          std::size_t{16}}) {
      cfg.k = k;
      double s = extract_oracle(simple, ref, cfg).sbleu;
      CHECK(s >= prev - 1e-15);
      CHECK(s <= exact + 1e-15);
      prev = s;
    }
    CHECK(exact >= prev - 1e-15);
  }
}

TEST_CASE("oracle dominates every single system") {
  testoracle::Rng rng(7777);
  for (int round = 0; round < 30; ++round) {
    std::vector<Sentence> hyps;
    for (int i = 0; i < 3; ++i)
      hyps.push_back(testoracle::random_sentence(rng, 7, 6));
    Sentence ref = testoracle::random_sentence(rng, 7, 6);
    ConfusionNetwork cn = build_network(hyps, 0);
    OraclePath path = extract_oracle(simplify_unk(cn, ref), ref, {});
    for (const auto& hyp : hyps)
      CHECK(path.sbleu >= sentence_bleu(hyp, ref) - 1e-12);
  }
}

TEST_CASE("UNK simplification preserves the oracle score") {
  testoracle::Rng rng(515);
  for (int round = 0; round < 40; ++round) {
    ConfusionNetwork cn = testoracle::random_network(rng, 7, 4, 9, 4);
    Sentence ref = testoracle::random_sentence(rng, 7, 9);
    OracleConfig cfg;
    cfg.k = kUnlimitedBeam;
    double raw = extract_oracle(cn, ref, cfg).sbleu;
    double simplified = extract_oracle(simplify_unk(cn, ref), ref, cfg).sbleu;
    CHECK(raw == doctest::Approx(simplified).epsilon(1e-12));
  }
}

TEST_CASE("model score breaks ties between matchless words") {
  ConfusionNetwork cn;
  cn.num_systems = 2;
  cn.primary_id = 0;
  cn.slots = {Slot{{"x", "y"}}};
  Sentence ref{"z"};
  OracleConfig cfg;
  // lexicographic tie-break without a model
  CHECK(extract_oracle(cn, ref, cfg).words == Sentence{"x"});

  // a hook that prefers system 1's arcs flips the decision
  cfg.use_model_tiebreak = true;
  OracleModelHook hook = [](int, const MergedArc& arc, const std::string&,
                            const std::string&) {
    return arc.support.front() == 1 ? 1.0 : 0.0;
  };
  CHECK(extract_oracle(cn, ref, cfg, hook).words == Sentence{"y"});

  // the decode-side hook prefers words supported by high-weight systems
  std::vector<std::vector<Sentence>> rows{{{"x"}}, {{"y"}}};
  TrigramLM lm = TrigramLM::train(rows);
  Weights w = make_weights(2, false, 0.0);
  w.values[1] = 5.0;  // sys1
  OracleModelHook decode_hook = make_oracle_model_hook(cn, w, lm);
  CHECK(extract_oracle(cn, ref, cfg, decode_hook).words == Sentence{"y"});

  // flag off: hook ignored
  cfg.use_model_tiebreak = false;
  CHECK(extract_oracle(cn, ref, cfg, decode_hook).words == Sentence{"x"});
}

TEST_CASE("oracle error cases") {
  ConfusionNetwork empty;
  CHECK_THROWS_AS(extract_oracle(empty, kRef, {}), std::domain_error);
  ConfusionNetwork cn = build_network(kFig4, 0);
  CHECK_THROWS_AS(extract_oracle(cn, {}, {}), std::domain_error);
  CHECK_THROWS_AS(simplify_unk(cn, {}), std::domain_error);
}

TEST_CASE("oracle_corpus aggregates and stays deterministic") {
  testoracle::Rng rng(616);
  std::vector<ConfusionNetwork> networks;
  std::vector<Sentence> refs;
  for (int s = 0; s < 10; ++s) {
    refs.push_back(testoracle::random_sentence(rng, 6, 8));
    std::vector<Sentence> hyps{refs.back(),
                               testoracle::random_sentence(rng, 6, 8)};
    networks.push_back(build_network(hyps, s));
  }
  OracleCorpusResult a = oracle_corpus(networks, refs, {});
  CHECK(a.bleu == doctest::Approx(1.0));
  OracleCorpusResult b = oracle_corpus(networks, refs, {});
  CHECK(a.sentences == b.sentences);
  CHECK(a.criterion == b.criterion);
}

TEST_CASE("decision records round trip") {
  ConfusionNetwork cn = build_network(kFig4, 5);
  OraclePath path = extract_oracle(simplify_unk(cn, kRef), kRef, {});
  testutil::TempDir dir("oracle_decisions");
  write_decisions({path}, {5}, dir.file("d.jsonl"));
  auto loaded = read_decisions(dir.file("d.jsonl"));
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].first == 5);
  CHECK(loaded[0].second ==
        std::vector<std::string>{"the", kUnkWord, "car"});
}
