#ifndef SYSCOMB_DECODE_HPP
#define SYSCOMB_DECODE_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "syscomb/align.hpp"
#include "syscomb/nnvote.hpp"
#include "syscomb/types.hpp"

namespace syscomb {

// Interpolated Witten-Bell trigram model over the pooled input hypotheses.
// Events are all seen words plus </s> and <unk>; <s> only appears as context.
class TrigramLM {
 public:
  static TrigramLM train(const CombinationCorpus& corpus);
  static TrigramLM train(const std::vector<std::vector<Sentence>>& systems);

  // Natural log of p(word | h1 h2) where h2 is the immediate predecessor.
  // Unknown words (in history or prediction) map to <unk>.
  double log_prob(const std::string& h1, const std::string& h2,
                  const std::string& word) const;
  double prob(const std::string& h1, const std::string& h2,
              const std::string& word) const;

  const std::vector<std::string>& event_vocab() const { return events_; }

 private:
  int id(const std::string& w) const;

  std::map<std::string, int> ids_;       // all tokens incl. <s>, </s>, <unk>
  std::vector<std::string> events_;      // predictable tokens
  std::map<std::pair<int, int>, long> bigram_ctx_;   // context counts
  std::map<std::vector<int>, long> trigram_;
  std::map<std::pair<int, int>, long> bigram_;
  std::map<int, long> unigram_ctx_;      // per-word context counts
  std::map<int, long> unigram_;
  long total_events_ = 0;
  std::map<std::pair<int, int>, long> bigram_ctx_types_;
  std::map<int, long> unigram_ctx_types_;
  long root_types_ = 0;
  int unk_id_ = -1;
};

// Linear model weights in a fixed feature order: globalVote per system,
// primary, lm, wordPenalty and optionally localVote.
struct Weights {
  std::vector<std::string> names;
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
  int index_of(const std::string& name) const;
};

Weights make_weights(int num_systems, bool localvote, double initial = 1.0);

// Static per-arc features: I globalVote flags, the primary flag, and the
// word-penalty count (0 for epsilon).
std::vector<double> arc_features(const MergedArc& arc, int primary_id,
                                 int num_systems);

struct NBestEntry {
  Sentence words;
  std::vector<double> features;
  double score = 0.0;
};

struct NBestList {
  int sentence_index = 0;
  std::vector<NBestEntry> entries;  // distinct surfaces, score descending
};

inline constexpr std::size_t kAllPaths =
    std::numeric_limits<std::size_t>::max();

// Exact n-best over the network: dynamic programming over (slot, last two
// words), keeping the top-n distinct surfaces per state with the maximal
// score per surface.
NBestList decode_nbest(const ConfusionNetwork& cn, const Weights& weights,
                       const TrigramLM& lm,
                       const LocalVoteScorer* localvote, std::size_t n);

struct DecodeResult {
  std::vector<Sentence> onebest;
  std::vector<NBestList> nbest;
};

DecodeResult decode_corpus(const std::vector<ConfusionNetwork>& networks,
                           const Weights& weights, const TrigramLM& lm,
                           const LocalVoteScorer* localvote, std::size_t n);

// Oracle tie-break hook: per-arc linear baseline score (globalVote, primary,
// LM, word penalty; no localVote) under the given weights.
OracleModelHook make_oracle_model_hook(const ConfusionNetwork& cn,
                                       const Weights& weights,
                                       const TrigramLM& lm);

// "index ||| surface ||| f_1 .. f_m ||| score" lines.
void write_nbest(const std::vector<NBestList>& lists, const std::string& path);
std::vector<NBestList> read_nbest(const std::string& path);

void write_weights(const Weights& weights, const std::string& path);
Weights read_weights(const std::string& path);

}  // namespace syscomb

#endif
