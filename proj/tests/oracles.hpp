// Test-only reference implementations, deliberately written on different
// code paths than the library: string-keyed n-gram maps, exhaustive search
// instead of greedy or beam search. Tests compare library output against
// these.
#ifndef SYSCOMB_TESTS_ORACLES_HPP
#define SYSCOMB_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "syscomb/align.hpp"
#include "syscomb/corpus.hpp"
#include "syscomb/types.hpp"

namespace testoracle {

using syscomb::ConfusionNetwork;
using syscomb::MergedArc;
using syscomb::Sentence;

inline std::string join(const Sentence& s, std::size_t from, std::size_t n) {
  std::string out;
  for (std::size_t i = from; i < from + n; ++i) {
    if (i > from) out += '\x1f';
    out += s[i];
  }
  return out;
}

inline std::map<std::string, int> count_ngrams(const Sentence& s, int n) {
  std::map<std::string, int> counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[join(s, i, n)];
  return counts;
}

// Add-one smoothed sentence BLEU, direct transcription of the formula.
inline double naive_sbleu(const Sentence& hyp_in, const Sentence& ref_in,
                          int max_order = 4) {
  Sentence hyp = syscomb::lowercase(hyp_in);
  Sentence ref = syscomb::lowercase(ref_in);
  if (hyp.empty()) return 0.0;
  double product = 1.0;
  for (int n = 1; n <= max_order; ++n) {
    auto h = count_ngrams(hyp, n);
    auto r = count_ngrams(ref, n);
    int matched = 0, total = 0;
    for (const auto& [g, c] : h) {
      total += c;
      auto it = r.find(g);
      if (it != r.end()) matched += std::min(c, it->second);
    }
    product *= (matched + 1.0) / (total + 1.0);
  }
  double bp = std::min(1.0, std::exp(1.0 - static_cast<double>(ref.size()) /
                                               static_cast<double>(hyp.size())));
  return bp * std::pow(product, 1.0 / max_order);
}

// Unsmoothed corpus BLEU via pooled string-keyed counts.
inline double naive_corpus_bleu(const std::vector<Sentence>& hyps,
                                const std::vector<Sentence>& refs,
                                int max_order = 4) {
  long hyp_len = 0, ref_len = 0;
  std::vector<long> matched(max_order, 0), total(max_order, 0);
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    Sentence hyp = syscomb::lowercase(hyps[i]);
    Sentence ref = syscomb::lowercase(refs[i]);
    hyp_len += static_cast<long>(hyp.size());
    ref_len += static_cast<long>(ref.size());
    for (int n = 1; n <= max_order; ++n) {
      auto h = count_ngrams(hyp, n);
      auto r = count_ngrams(ref, n);
      for (const auto& [g, c] : h) {
        total[n - 1] += c;
        auto it = r.find(g);
        if (it != r.end()) matched[n - 1] += std::min(c, it->second);
      }
    }
  }
  if (hyp_len == 0) return 0.0;
  double product = 1.0;
  int active = 0;
  for (int n = 0; n < max_order; ++n) {
    if (total[n] == 0) continue;  // no n-grams of this order anywhere
    if (matched[n] == 0) return 0.0;
    product *= static_cast<double>(matched[n]) / static_cast<double>(total[n]);
    ++active;
  }
  if (active == 0) return 0.0;
  double bp = std::min(1.0, std::exp(1.0 - static_cast<double>(ref_len) /
                                               static_cast<double>(hyp_len)));
  return bp * std::pow(product, 1.0 / active);
}

inline int naive_levenshtein(const Sentence& a, const Sentence& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1),
                         prev[j] + 1, cur[j - 1] + 1});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Exhaustive TER: minimum of (moves + Levenshtein) over all shift sequences
// up to `max_moves`, with the same move set as the library (blocks matching
// a contiguous reference subsequence, block length and distance capped at
// 10).
inline int exhaustive_ter_edits(const Sentence& hyp_in, const Sentence& ref_in,
                                int max_moves = 3) {
  Sentence hyp = syscomb::lowercase(hyp_in);
  Sentence ref = syscomb::lowercase(ref_in);
  std::set<std::string> ref_blocks;
  for (std::size_t i = 0; i < ref.size(); ++i)
    for (std::size_t n = 1; n <= 10 && i + n <= ref.size(); ++n)
      ref_blocks.insert(join(ref, i, n));

  std::map<std::string, int> seen;  // state -> fewest moves used
  int best = naive_levenshtein(hyp, ref);

  std::vector<std::pair<Sentence, int>> frontier{{hyp, 0}};
  seen[join(hyp, 0, hyp.size())] = 0;
  while (!frontier.empty()) {
    auto [cur, moves] = frontier.back();
    frontier.pop_back();
    if (moves >= max_moves) continue;
    const int n = static_cast<int>(cur.size());
    for (int start = 0; start < n; ++start) {
      for (int len = 1; len <= 10 && start + len <= n; ++len) {
        if (!ref_blocks.count(join(cur, start, len))) continue;
        for (int dest = std::max(0, start - 10);
             dest <= std::min(n - len, start + 10); ++dest) {
          if (dest == start) continue;
          Sentence moved;
          for (int i = 0; i < n; ++i)
            if (i < start || i >= start + len) moved.push_back(cur[i]);
          moved.insert(moved.begin() + dest, cur.begin() + start,
                       cur.begin() + start + len);
          std::string key = join(moved, 0, moved.size());
          auto it = seen.find(key);
          if (it != seen.end() && it->second <= moves + 1) continue;
          seen[key] = moves + 1;
          best = std::min(best, moves + 1 + naive_levenshtein(moved, ref));
          frontier.emplace_back(std::move(moved), moves + 1);
        }
      }
    }
  }
  return best;
}

// Every arc-choice path through a confusion network.
struct EnumeratedPath {
  Sentence words;
  std::vector<int> arc_choice;  // merged-arc index per slot
};

inline void enumerate_paths_rec(const std::vector<std::vector<MergedArc>>& arcs,
                                std::size_t slot, EnumeratedPath& partial,
                                std::vector<EnumeratedPath>& out) {
  if (slot == arcs.size()) {
    out.push_back(partial);
    return;
  }
  for (std::size_t a = 0; a < arcs[slot].size(); ++a) {
    partial.arc_choice.push_back(static_cast<int>(a));
    bool emitted = !syscomb::is_epsilon(arcs[slot][a].word);
    if (emitted) partial.words.push_back(arcs[slot][a].word);
    enumerate_paths_rec(arcs, slot + 1, partial, out);
    if (emitted) partial.words.pop_back();
    partial.arc_choice.pop_back();
  }
}

inline std::vector<EnumeratedPath> enumerate_paths(const ConfusionNetwork& cn) {
  std::vector<std::vector<MergedArc>> arcs;
  for (const auto& slot : cn.slots) arcs.push_back(syscomb::merge_slot(slot));
  std::vector<EnumeratedPath> out;
  EnumeratedPath partial;
  enumerate_paths_rec(arcs, 0, partial, out);
  return out;
}

inline double best_path_sbleu(const ConfusionNetwork& cn, const Sentence& ref,
                              int max_order = 4) {
  double best = 0.0;
  for (const auto& path : enumerate_paths(cn))
    best = std::max(best, naive_sbleu(path.words, ref, max_order));
  return best;
}

// Small deterministic generator for test data.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed * 2862933555777941757ull + 3037000493ull) {}
  std::uint64_t next() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
  double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }
};

inline Sentence random_sentence(Rng& rng, int max_len, int vocab,
                                int min_len = 1) {
  int len = min_len + rng.below(std::max(1, max_len - min_len + 1));
  Sentence s;
  for (int i = 0; i < len; ++i)
    s.push_back("w" + std::to_string(rng.below(vocab)));
  return s;
}

inline ConfusionNetwork random_network(Rng& rng, int max_slots,
                                       int max_words_per_slot, int vocab,
                                       int num_systems) {
  ConfusionNetwork cn;
  cn.num_systems = num_systems;
  cn.primary_id = 0;
  int slots = 1 + rng.below(max_slots);
  for (int t = 0; t < slots; ++t) {
    // Distinct word options for the slot, each system picks one; sometimes
    // an epsilon option appears.
    int options = 1 + rng.below(max_words_per_slot);
    std::vector<std::string> words;
    for (int o = 0; o < options; ++o)
      words.push_back("w" + std::to_string(rng.below(vocab)));
    bool allow_eps = rng.below(4) == 0;
    syscomb::Slot slot;
    bool any_word = false;
    for (int i = 0; i < num_systems; ++i) {
      if (allow_eps && rng.below(3) == 0 && (any_word || i + 1 < num_systems)) {
        slot.words.push_back(syscomb::kEpsilon);
      } else {
        slot.words.push_back(words[rng.below(options)]);
        any_word = true;
      }
    }
    if (!any_word) slot.words[0] = words[0];
    cn.slots.push_back(std::move(slot));
  }
  return cn;
}

}  // namespace testoracle

#endif
