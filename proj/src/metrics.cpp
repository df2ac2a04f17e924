#include "syscomb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>

#include "syscomb/corpus.hpp"

namespace syscomb {

namespace {

constexpr int kMaxShiftDistance = 10;
constexpr int kMaxShiftLength = 10;

std::map<Sentence, long> ngram_counts(const Sentence& s, int order) {
  std::map<Sentence, long> counts;
  if (static_cast<int>(s.size()) < order) return counts;
  for (std::size_t i = 0; i + order <= s.size(); ++i)
    ++counts[Sentence(s.begin() + i, s.begin() + i + order)];
  return counts;
}

}  // namespace

void NGramStats::add(const NGramStats& other) {
  if (other.matches.size() != matches.size())
    throw corpus_shape_error("pooling n-gram stats of different orders");
  for (std::size_t n = 0; n < matches.size(); ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
}

NGramStats ngram_stats(const Sentence& hyp, const Sentence& ref,
                       const MetricConfig& cfg) {
  if (cfg.max_order < 1) throw config_error("n-gram order must be at least 1");
  if (ref.empty()) throw std::domain_error("empty reference");
  const Sentence h = cfg.lowercase ? lowercase(hyp) : hyp;
  const Sentence r = cfg.lowercase ? lowercase(ref) : ref;
  NGramStats stats(cfg.max_order);
  stats.hyp_len = static_cast<long>(h.size());
  stats.ref_len = static_cast<long>(r.size());
  for (int n = 1; n <= cfg.max_order; ++n) {
    auto hyp_counts = ngram_counts(h, n);
    auto ref_counts = ngram_counts(r, n);
    long total = std::max<long>(0, stats.hyp_len - n + 1);
    long matched = 0;
    for (const auto& [gram, cnt] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(cnt, it->second);
    }
    stats.totals[n - 1] = total;
    stats.matches[n - 1] = matched;
  }
  return stats;
}

double sentence_bleu_from_stats(const NGramStats& stats) {
  if (stats.hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < stats.matches.size(); ++n)
    log_sum += std::log(static_cast<double>(stats.matches[n] + 1) /
                        static_cast<double>(stats.totals[n] + 1));
  double bp = std::min(
      1.0, std::exp(1.0 - static_cast<double>(stats.ref_len) /
                              static_cast<double>(stats.hyp_len)));
  return bp * std::exp(log_sum / static_cast<double>(stats.matches.size()));
}

double sentence_bleu(const Sentence& hyp, const Sentence& ref,
                     const MetricConfig& cfg) {
  return sentence_bleu_from_stats(ngram_stats(hyp, ref, cfg));
}

double corpus_bleu_from_stats(const NGramStats& pooled) {
  if (pooled.hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  int active_orders = 0;
  for (std::size_t n = 0; n < pooled.matches.size(); ++n) {
    // Orders with no hypothesis n-grams at all carry no evidence; any order
    // with n-grams but zero matches forces the unsmoothed score to 0.
    if (pooled.totals[n] == 0) continue;
    if (pooled.matches[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(pooled.matches[n]) /
                        static_cast<double>(pooled.totals[n]));
    ++active_orders;
  }
  if (active_orders == 0) return 0.0;
  double bp = std::min(
      1.0, std::exp(1.0 - static_cast<double>(pooled.ref_len) /
                              static_cast<double>(pooled.hyp_len)));
  return bp * std::exp(log_sum / static_cast<double>(active_orders));
}

double corpus_bleu(const std::vector<Sentence>& hyps,
                   const std::vector<Sentence>& refs,
                   const MetricConfig& cfg) {
  if (hyps.size() != refs.size())
    throw corpus_shape_error("corpus BLEU: " + std::to_string(hyps.size()) +
                             " hypotheses vs " + std::to_string(refs.size()) +
                             " references");
  NGramStats pooled(cfg.max_order);
  for (std::size_t i = 0; i < hyps.size(); ++i)
    pooled.add(ngram_stats(hyps[i], refs[i], cfg));
  return corpus_bleu_from_stats(pooled);
}

std::pair<int, std::vector<EditOp>> edit_distance(const Sentence& hyp,
                                                  const Sentence& ref) {
  const std::size_t H = hyp.size(), R = ref.size();
  std::vector<std::vector<int>> d(H + 1, std::vector<int>(R + 1, 0));
  for (std::size_t i = 0; i <= H; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= R; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= H; ++i) {
    for (std::size_t j = 1; j <= R; ++j) {
      int diag = d[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      int ins = d[i - 1][j] + 1;  // extra hypothesis word
      int del = d[i][j - 1] + 1;  // missing reference word
      d[i][j] = std::min({diag, ins, del});
    }
  }
  // Backtrace; on ties prefer diagonal, then reference consumption (Delete),
  // then hypothesis consumption (Insert).
  std::vector<EditOp> ops;
  std::size_t i = H, j = R;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1)) {
      ops.push_back(hyp[i - 1] == ref[j - 1] ? EditOp::Match
                                             : EditOp::Substitute);
      --i;
      --j;
    } else if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      ops.push_back(EditOp::Delete);
      --j;
    } else {
      ops.push_back(EditOp::Insert);
      --i;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return {d[H][R], std::move(ops)};
}

namespace {

// Cost-only Levenshtein with a two-row table.
int edit_cost(const std::vector<int>& hyp, const std::vector<int>& ref) {
  std::vector<int> prev(ref.size() + 1), cur(ref.size() + 1);
  for (std::size_t j = 0; j <= ref.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      int diag = prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      cur[j] = std::min({diag, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[ref.size()];
}

std::vector<int> apply_move(const std::vector<int>& seq, int start, int len,
                            int dest) {
  std::vector<int> out;
  out.reserve(seq.size());
  for (int i = 0; i < static_cast<int>(seq.size()); ++i)
    if (i < start || i >= start + len) out.push_back(seq[i]);
  out.insert(out.begin() + dest, seq.begin() + start,
             seq.begin() + start + len);
  return out;
}

}  // namespace

TerResult ter(const Sentence& hyp, const Sentence& ref,
              const MetricConfig& cfg) {
  if (ref.empty()) throw std::domain_error("empty reference");
  const Sentence h = cfg.lowercase ? lowercase(hyp) : hyp;
  const Sentence r = cfg.lowercase ? lowercase(ref) : ref;

  // Intern tokens so shift candidates compare ints.
  std::map<std::string, int> ids;
  auto intern = [&ids](const std::string& w) {
    return ids.emplace(w, static_cast<int>(ids.size())).first->second;
  };
  std::vector<int> rid, start_hyp;
  for (const auto& w : r) rid.push_back(intern(w));
  for (const auto& w : h) start_hyp.push_back(intern(w));

  // Contiguous reference subsequences up to the block-length cap; only
  // blocks found here are candidate shifts.
  std::set<std::vector<int>> ref_blocks;
  for (std::size_t i = 0; i < rid.size(); ++i)
    for (int len = 1; len <= kMaxShiftLength &&
                      i + len <= rid.size();
         ++len)
      ref_blocks.insert(std::vector<int>(rid.begin() + i, rid.begin() + i + len));

  // Track the permutation of original hypothesis positions so the shifted
  // hypothesis can be reported in original case.
  std::vector<int> perm(start_hyp.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);

  struct Move {
    int start, len, dest, edits;
  };
  auto enumerate_moves = [&ref_blocks](const std::vector<int>& seq,
                                       const std::vector<int>& ref_ids) {
    std::vector<Move> moves;
    const int n = static_cast<int>(seq.size());
    for (int start = 0; start < n; ++start) {
      for (int len = 1; len <= kMaxShiftLength && start + len <= n; ++len) {
        std::vector<int> block(seq.begin() + start, seq.begin() + start + len);
        if (!ref_blocks.count(block)) continue;
        for (int dest = std::max(0, start - kMaxShiftDistance);
             dest <= std::min(n - len, start + kMaxShiftDistance); ++dest) {
          if (dest == start) continue;
          moves.push_back(
              {start, len, dest, edit_cost(apply_move(seq, start, len, dest),
                                           ref_ids)});
        }
      }
    }
    return moves;
  };

  // Best-shift-first: take the move that most reduces the edit distance, as
  // long as it reduces it at all; each accepted shift costs one edit. Ties
  // between equally good moves are broken by the best follow-up move.
  std::vector<int> cur = start_hyp;
  int cur_edits = edit_cost(cur, rid);
  int shifts = 0;
  while (true) {
    auto moves = enumerate_moves(cur, rid);
    int best_edits = cur_edits;
    for (const auto& m : moves) best_edits = std::min(best_edits, m.edits);
    if (best_edits >= cur_edits) break;
    auto followup_best = [&](const Move& m) {
      auto applied = apply_move(cur, m.start, m.len, m.dest);
      int next = best_edits;
      for (const auto& f : enumerate_moves(applied, rid))
        next = std::min(next, f.edits);
      return next;
    };
    const Move* chosen = nullptr;
    int chosen_next = -1;
    for (const auto& m : moves) {
      if (m.edits != best_edits) continue;
      if (!chosen) {
        chosen = &m;
        continue;
      }
      if (best_edits == 0) break;
      if (chosen_next < 0) chosen_next = followup_best(*chosen);
      int next = followup_best(m);
      if (next < chosen_next) {
        chosen = &m;
        chosen_next = next;
      }
    }
    if (!chosen) break;
    perm = apply_move(perm, chosen->start, chosen->len, chosen->dest);
    cur = apply_move(cur, chosen->start, chosen->len, chosen->dest);
    cur_edits = best_edits;
    ++shifts;
  }

  // Rebuild token strings from the permutation.
  Sentence shifted_lc(perm.size()), shifted(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shifted[i] = hyp[perm[i]];
    shifted_lc[i] = h[perm[i]];
  }

  auto [edits, ops] = edit_distance(shifted_lc, r);
  TerResult res;
  res.shifts = shifts;
  for (EditOp op : ops) {
    switch (op) {
      case EditOp::Substitute: ++res.substitutions; break;
      case EditOp::Insert: ++res.insertions; break;
      case EditOp::Delete: ++res.deletions; break;
      case EditOp::Match: break;
    }
  }
  res.ref_len = static_cast<long>(r.size());
  res.rate = static_cast<double>(res.edits()) / static_cast<double>(res.ref_len);
  res.shifted_hyp = std::move(shifted);
  res.alignment = std::move(ops);
  return res;
}

double corpus_ter(const std::vector<Sentence>& hyps,
                  const std::vector<Sentence>& refs,
                  const MetricConfig& cfg) {
  if (hyps.size() != refs.size())
    throw corpus_shape_error("corpus TER: " + std::to_string(hyps.size()) +
                             " hypotheses vs " + std::to_string(refs.size()) +
                             " references");
  long edits = 0, ref_len = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    TerResult t = ter(hyps[i], refs[i], cfg);
    edits += t.edits();
    ref_len += t.ref_len;
  }
  if (ref_len == 0) throw std::domain_error("empty reference corpus");
  return static_cast<double>(edits) / static_cast<double>(ref_len);
}

double combined_criterion(const std::vector<Sentence>& hyps,
                          const std::vector<Sentence>& refs,
                          const MetricConfig& cfg) {
  return (corpus_ter(hyps, refs, cfg) - corpus_bleu(hyps, refs, cfg)) / 2.0;
}

double bootstrap_significance(const std::vector<Sentence>& hyps_a,
                              const std::vector<Sentence>& hyps_b,
                              const std::vector<Sentence>& refs, int samples,
                              std::uint64_t seed, const MetricConfig& cfg) {
  if (hyps_a.size() != refs.size() || hyps_b.size() != refs.size())
    throw corpus_shape_error("bootstrap: hypothesis/reference size mismatch");
  if (samples < 100)
    throw config_error("bootstrap needs at least 100 samples");
  const std::size_t S = refs.size();
  if (S == 0) throw corpus_shape_error("bootstrap: empty corpus");
  std::vector<NGramStats> stats_a, stats_b;
  stats_a.reserve(S);
  stats_b.reserve(S);
  for (std::size_t i = 0; i < S; ++i) {
    stats_a.push_back(ngram_stats(hyps_a[i], refs[i], cfg));
    stats_b.push_back(ngram_stats(hyps_b[i], refs[i], cfg));
  }
  std::mt19937_64 rng(seed);
  int wins = 0;
  for (int s = 0; s < samples; ++s) {
    NGramStats pa(cfg.max_order), pb(cfg.max_order);
    for (std::size_t i = 0; i < S; ++i) {
      std::size_t idx = static_cast<std::size_t>(rng() % S);
      pa.add(stats_a[idx]);
      pb.add(stats_b[idx]);
    }
    if (corpus_bleu_from_stats(pa) > corpus_bleu_from_stats(pb)) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(samples);
}

}  // namespace syscomb
