#ifndef SYSCOMB_ORACLE_HPP
#define SYSCOMB_ORACLE_HPP

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "syscomb/align.hpp"
#include "syscomb/types.hpp"

namespace syscomb {

inline constexpr std::size_t kUnlimitedBeam =
    std::numeric_limits<std::size_t>::max();

struct OracleConfig {
  std::size_t k = 1200;  // partial hypotheses kept per node
  int max_order = 4;
  bool lowercase = true;
  bool use_model_tiebreak = false;
};

// Optional baseline-model tie-break: linear score contribution of taking
// `arc` at `slot`. `prev1` is the most recently emitted word, `prev2` the
// one before it; both are <s> at the sentence start. Only consulted when
// OracleConfig::use_model_tiebreak is set.
using OracleModelHook = std::function<double(
    int slot, const MergedArc& arc, const std::string& prev1,
    const std::string& prev2)>;

struct OracleDecision {
  std::string word;  // kEpsilon when the path skips the slot
  std::vector<int> support;
};

struct OraclePath {
  std::vector<OracleDecision> decisions;  // one per slot
  double sbleu = 0.0;
  Sentence words;  // concatenated non-epsilon decisions
};

// Replaces every non-epsilon word absent from the reference by "UNK",
// keeping the per-system arc structure.
ConfusionNetwork simplify_unk(const ConfusionNetwork& cn, const Sentence& ref,
                              bool lowercase = true);

// Best-sBLEU path by a topological sweep with per-node beams, sequence
// recombination and deterministic tie-breaking.
OraclePath extract_oracle(const ConfusionNetwork& cn, const Sentence& ref,
                          const OracleConfig& cfg = {},
                          const OracleModelHook& model = nullptr);

struct OracleCorpusResult {
  std::vector<OraclePath> paths;
  std::vector<Sentence> sentences;
  double bleu = 0.0;
  double ter_score = 0.0;
  double criterion = 0.0;  // (TER - BLEU)/2
};

using OracleModelHookFactory =
    std::function<OracleModelHook(const ConfusionNetwork&)>;

// Per-sentence extraction over UNK-simplified copies of the networks plus
// corpus metrics of the oracle sentences.
OracleCorpusResult oracle_corpus(const std::vector<ConfusionNetwork>& networks,
                                 const std::vector<Sentence>& refs,
                                 const OracleConfig& cfg = {},
                                 bool simplify = true,
                                 const OracleModelHookFactory& hooks = nullptr);

// Arc-decision records ({sentence_index, decisions: [...]}) as JSON lines.
void write_decisions(const std::vector<OraclePath>& paths,
                     const std::vector<int>& sentence_indices,
                     const std::string& path);
std::vector<std::pair<int, std::vector<std::string>>> read_decisions(
    const std::string& path);

}  // namespace syscomb

#endif
