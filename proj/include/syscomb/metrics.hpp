#ifndef SYSCOMB_METRICS_HPP
#define SYSCOMB_METRICS_HPP

#include <cstdint>
#include <vector>

#include "syscomb/types.hpp"

namespace syscomb {

struct MetricConfig {
  int max_order = 4;
  bool lowercase = true;
};

// Raw per-sentence n-gram statistics; poolable for corpus BLEU.
struct NGramStats {
  std::vector<long> matches;  // clipped matches, index 0 = unigrams
  std::vector<long> totals;   // hypothesis n-gram counts per order
  long hyp_len = 0;
  long ref_len = 0;

  explicit NGramStats(int max_order = 4)
      : matches(max_order, 0), totals(max_order, 0) {}
  void add(const NGramStats& other);
};

NGramStats ngram_stats(const Sentence& hyp, const Sentence& ref,
                       const MetricConfig& cfg = {});

// Sentence BLEU with every n-gram count initialized at 1 and a per-sentence
// brevity penalty min(1, e^{1-|ref|/|hyp|}). Empty hypothesis scores 0.
double sentence_bleu(const Sentence& hyp, const Sentence& ref,
                     const MetricConfig& cfg = {});
double sentence_bleu_from_stats(const NGramStats& stats);

// Standard unsmoothed corpus BLEU over pooled clipped counts.
double corpus_bleu(const std::vector<Sentence>& hyps,
                   const std::vector<Sentence>& refs,
                   const MetricConfig& cfg = {});
double corpus_bleu_from_stats(const NGramStats& pooled);

enum class EditOp : std::uint8_t { Match, Substitute, Insert, Delete };

struct TerResult {
  int shifts = 0;
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  long ref_len = 0;
  double rate = 0.0;
  // Hypothesis after the greedy block shifts, and the monotone edit path
  // aligning it to the reference.
  Sentence shifted_hyp;
  std::vector<EditOp> alignment;

  int edits() const { return shifts + substitutions + insertions + deletions; }
};

// TER with greedy block-shift search (shift distance and block length both
// capped at 10), then Levenshtein alignment.
TerResult ter(const Sentence& hyp, const Sentence& ref,
              const MetricConfig& cfg = {});

double corpus_ter(const std::vector<Sentence>& hyps,
                  const std::vector<Sentence>& refs,
                  const MetricConfig& cfg = {});

// (corpus TER - corpus BLEU)/2 in fractional units; lower is better.
double combined_criterion(const std::vector<Sentence>& hyps,
                          const std::vector<Sentence>& refs,
                          const MetricConfig& cfg = {});

// Fraction of seeded with-replacement resamples where corpus BLEU of A is
// strictly greater than corpus BLEU of B.
double bootstrap_significance(const std::vector<Sentence>& hyps_a,
                              const std::vector<Sentence>& hyps_b,
                              const std::vector<Sentence>& refs, int samples,
                              std::uint64_t seed,
                              const MetricConfig& cfg = {});

// Plain Levenshtein distance with unit costs and a deterministic backtrace
// (diagonal, then hypothesis deletion, then insertion on ties).
std::pair<int, std::vector<EditOp>> edit_distance(const Sentence& hyp,
                                                  const Sentence& ref);

}  // namespace syscomb

#endif
