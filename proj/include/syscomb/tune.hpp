#ifndef SYSCOMB_TUNE_HPP
#define SYSCOMB_TUNE_HPP

#include <cstdint>
#include <vector>

#include "syscomb/decode.hpp"
#include "syscomb/metrics.hpp"
#include "syscomb/types.hpp"

namespace syscomb {

struct MERTConfig {
  int restarts = 5;
  int outer_iterations = 5;
  std::size_t nbest_size = 200;
  std::uint64_t seed = 0;
  double epsilon = 1e-6;
};

// Frozen per-candidate metric statistics; the expensive part of MERT.
struct CandidateStats {
  NGramStats bleu{4};
  long ter_edits = 0;
  long ref_len = 0;
};
using PoolStats = std::vector<std::vector<CandidateStats>>;

PoolStats compute_pool_stats(const std::vector<NBestList>& pool,
                             const std::vector<Sentence>& refs,
                             const MetricConfig& cfg = {});

// Corpus (TER-BLEU)/2 of the per-sentence argmax candidates under `weights`.
double pool_criterion(const std::vector<NBestList>& pool,
                      const PoolStats& stats,
                      const std::vector<double>& weights);

struct LineSearchResult {
  double step = 0.0;
  double criterion = 0.0;
};

// Exact Och sweep along weights + t*direction: per-sentence upper envelopes,
// corpus-pooled breakpoints, one criterion evaluation per interval.
LineSearchResult line_search(const std::vector<NBestList>& pool,
                             const PoolStats& stats,
                             const std::vector<double>& weights,
                             const std::vector<double>& direction);
LineSearchResult line_search(const std::vector<NBestList>& pool,
                             const std::vector<Sentence>& refs,
                             const std::vector<double>& weights,
                             const std::vector<double>& direction,
                             const MetricConfig& cfg = {});

struct MertResult {
  Weights weights;
  double criterion = 0.0;
};

// Coordinate plus seeded random directions until no line improves by more
// than epsilon, over `restarts` starting points; never returns weights worse
// than the initialization on the same pool.
MertResult mert(const std::vector<NBestList>& pool,
                const std::vector<Sentence>& refs, const Weights& init,
                const MERTConfig& cfg, const MetricConfig& mcfg = {},
                const PoolStats* precomputed = nullptr);

struct TuneLoopResult {
  Weights weights;
  std::vector<double> criteria;  // pool criterion per outer iteration
  std::vector<NBestList> pool;
  int iterations = 0;
  bool converged = false;
};

// Decode / merge / re-estimate loop with merged, deduplicated n-best pools.
TuneLoopResult tune_loop(const std::vector<ConfusionNetwork>& networks,
                         const std::vector<Sentence>& refs,
                         const TrigramLM& lm, const LocalVoteScorer* localvote,
                         const Weights& init, const MERTConfig& cfg,
                         const MetricConfig& mcfg = {});

// Deduplicating pool merge; first occurrence of a (sentence, surface) pair
// wins.
void merge_pool(std::vector<NBestList>& pool, PoolStats& stats,
                const std::vector<NBestList>& fresh,
                const std::vector<Sentence>& refs, const MetricConfig& cfg);

}  // namespace syscomb

#endif
