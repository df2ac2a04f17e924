#include "syscomb/tune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

namespace syscomb {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

double criterion_from(const NGramStats& pooled, long edits, long ref_len) {
  double bleu = corpus_bleu_from_stats(pooled);
  double ter = ref_len > 0 ? static_cast<double>(edits) /
                                 static_cast<double>(ref_len)
                           : 0.0;
  return (ter - bleu) / 2.0;
}

}  // namespace

PoolStats compute_pool_stats(const std::vector<NBestList>& pool,
                             const std::vector<Sentence>& refs,
                             const MetricConfig& cfg) {
  if (pool.size() != refs.size())
    throw corpus_shape_error("pool/reference size mismatch");
  PoolStats stats(pool.size());
  for (std::size_t s = 0; s < pool.size(); ++s) {
    stats[s].reserve(pool[s].entries.size());
    for (const auto& e : pool[s].entries) {
      CandidateStats cs;
      cs.bleu = ngram_stats(e.words, refs[s], cfg);
      TerResult t = ter(e.words, refs[s], cfg);
      cs.ter_edits = t.edits();
      cs.ref_len = t.ref_len;
      stats[s].push_back(std::move(cs));
    }
  }
  return stats;
}

double pool_criterion(const std::vector<NBestList>& pool,
                      const PoolStats& stats,
                      const std::vector<double>& weights) {
  NGramStats pooled(stats.empty() || stats[0].empty()
                        ? 4
                        : static_cast<int>(stats[0][0].bleu.matches.size()));
  long edits = 0, ref_len = 0;
  for (std::size_t s = 0; s < pool.size(); ++s) {
    if (pool[s].entries.empty())
      throw corpus_shape_error("empty n-best list at sentence " +
                               std::to_string(s));
    std::size_t best = 0;
    double best_score = dot(weights, pool[s].entries[0].features);
    for (std::size_t c = 1; c < pool[s].entries.size(); ++c) {
      double sc = dot(weights, pool[s].entries[c].features);
      if (sc > best_score) {
        best_score = sc;
        best = c;
      }
    }
    pooled.add(stats[s][best].bleu);
    edits += stats[s][best].ter_edits;
    ref_len += stats[s][best].ref_len;
  }
  return criterion_from(pooled, edits, ref_len);
}

LineSearchResult line_search(const std::vector<NBestList>& pool,
                             const PoolStats& stats,
                             const std::vector<double>& weights,
                             const std::vector<double>& direction) {
  if (pool.size() != stats.size())
    throw corpus_shape_error("pool/stats size mismatch");

  struct Event {
    double t;
    std::size_t sentence;
    std::size_t candidate;  // becomes the argmax for t just above this
  };
  std::vector<Event> events;
  std::vector<std::size_t> current(pool.size());

  for (std::size_t s = 0; s < pool.size(); ++s) {
    const auto& entries = pool[s].entries;
    if (entries.empty())
      throw corpus_shape_error("empty n-best list at sentence " +
                               std::to_string(s));
    if (weights.size() != entries[0].features.size() ||
        direction.size() != entries[0].features.size())
      throw config_error("weight/direction dimension mismatch");
    const std::size_t m = entries.size();
    std::vector<double> a(m), b(m);
    for (std::size_t c = 0; c < m; ++c) {
      a[c] = dot(weights, entries[c].features);
      b[c] = dot(direction, entries[c].features);
    }
    // Slope order; among equal slopes only the highest intercept can win.
    std::vector<std::size_t> order(m);
    for (std::size_t c = 0; c < m; ++c) order[c] = c;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (b[x] != b[y]) return b[x] < b[y];
      if (a[x] != a[y]) return a[x] > a[y];
      return x < y;
    });
    std::vector<std::size_t> slopes;
    for (std::size_t c : order)
      if (slopes.empty() || b[slopes.back()] != b[c]) slopes.push_back(c);

    // Upper envelope left to right; slopes are strictly increasing here.
    struct HullEntry {
      std::size_t cand;
      double from;
    };
    std::vector<HullEntry> hull;
    for (std::size_t c : slopes) {
      double x = -std::numeric_limits<double>::infinity();
      while (!hull.empty()) {
        const auto& top = hull.back();
        x = (a[top.cand] - a[c]) / (b[c] - b[top.cand]);
        if (x <= top.from)
          hull.pop_back();
        else
          break;
      }
      hull.push_back(
          {c, hull.empty() ? -std::numeric_limits<double>::infinity() : x});
    }
    current[s] = hull[0].cand;
    for (std::size_t i = 1; i < hull.size(); ++i)
      events.push_back({hull[i].from, s, hull[i].cand});
  }

  std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
    if (x.t != y.t) return x.t < y.t;
    if (x.sentence != y.sentence) return x.sentence < y.sentence;
    return x.candidate < y.candidate;
  });

  const int order_n = stats.empty() || stats[0].empty()
                          ? 4
                          : static_cast<int>(stats[0][0].bleu.matches.size());
  NGramStats pooled(order_n);
  long edits = 0, ref_len = 0;
  for (std::size_t s = 0; s < pool.size(); ++s) {
    pooled.add(stats[s][current[s]].bleu);
    edits += stats[s][current[s]].ter_edits;
    ref_len += stats[s][current[s]].ref_len;
  }

  auto switch_to = [&](std::size_t s, std::size_t c) {
    const auto& old_cs = stats[s][current[s]];
    for (std::size_t n = 0; n < pooled.matches.size(); ++n) {
      pooled.matches[n] -= old_cs.bleu.matches[n];
      pooled.totals[n] -= old_cs.bleu.totals[n];
    }
    pooled.hyp_len -= old_cs.bleu.hyp_len;
    pooled.ref_len -= old_cs.bleu.ref_len;
    edits -= old_cs.ter_edits;
    ref_len -= old_cs.ref_len;
    current[s] = c;
    pooled.add(stats[s][c].bleu);
    edits += stats[s][c].ter_edits;
    ref_len += stats[s][c].ref_len;
  };

  double best_criterion = criterion_from(pooled, edits, ref_len);
  double best_step =
      events.empty() ? 0.0 : events.front().t - 1.0;  // leftmost interval
  if (events.empty()) return {0.0, best_criterion};

  std::size_t i = 0;
  while (i < events.size()) {
    double t = events[i].t;
    while (i < events.size() && events[i].t == t) {
      switch_to(events[i].sentence, events[i].candidate);
      ++i;
    }
    double rep = (i < events.size()) ? (t + events[i].t) / 2.0 : t + 1.0;
    double crit = criterion_from(pooled, edits, ref_len);
    if (crit < best_criterion) {
      best_criterion = crit;
      best_step = rep;
    }
  }

  return {best_step, best_criterion};
}

LineSearchResult line_search(const std::vector<NBestList>& pool,
                             const std::vector<Sentence>& refs,
                             const std::vector<double>& weights,
                             const std::vector<double>& direction,
                             const MetricConfig& cfg) {
  PoolStats stats = compute_pool_stats(pool, refs, cfg);
  return line_search(pool, stats, weights, direction);
}

namespace {

void normalize_weights(Weights& w) {
  double max_abs = 0.0;
  for (double v : w.values) max_abs = std::max(max_abs, std::fabs(v));
  if (max_abs > 0.0)
    for (double& v : w.values) v /= max_abs;
}

}  // namespace

MertResult mert(const std::vector<NBestList>& pool,
                const std::vector<Sentence>& refs, const Weights& init,
                const MERTConfig& cfg, const MetricConfig& mcfg,
                const PoolStats* precomputed) {
  if (pool.empty()) throw corpus_shape_error("empty n-best pool");
  if (cfg.restarts < 1) throw config_error("need at least 1 restart");
  PoolStats local;
  if (!precomputed) {
    local = compute_pool_stats(pool, refs, mcfg);
    precomputed = &local;
  }
  const PoolStats& stats = *precomputed;
  const int dim = init.dim();

  std::mt19937_64 rng(cfg.seed);
  const double init_criterion = pool_criterion(pool, stats, init.values);

  Weights best = init;
  double best_criterion = init_criterion;

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    std::vector<double> w = init.values;
    if (restart > 0)
      for (double& v : w) v = uniform_unit(rng) * 2.0 - 1.0;
    double crit = pool_criterion(pool, stats, w);

    while (true) {
      // Coordinate directions plus as many random ones.
      std::vector<std::vector<double>> directions;
      for (int d = 0; d < dim; ++d) {
        std::vector<double> dir(dim, 0.0);
        dir[d] = 1.0;
        directions.push_back(std::move(dir));
      }
      for (int d = 0; d < dim; ++d) {
        std::vector<double> dir(dim);
        for (double& v : dir) v = uniform_unit(rng) * 2.0 - 1.0;
        directions.push_back(std::move(dir));
      }
      double sweep_best = crit;
      std::vector<double> sweep_w;
      for (const auto& dir : directions) {
        LineSearchResult r = line_search(pool, stats, w, dir);
        if (r.criterion < sweep_best) {
          sweep_best = r.criterion;
          sweep_w = w;
          for (int d = 0; d < dim; ++d) sweep_w[d] += r.step * dir[d];
        }
      }
      if (sweep_best < crit - cfg.epsilon) {
        w = std::move(sweep_w);
        crit = sweep_best;
      } else {
        break;
      }
    }

    if (crit < best_criterion) {
      best_criterion = crit;
      best.values = w;
    }
  }

  // Evaluate the chosen point exactly; line-search bookkeeping may be off by
  // floating rounding.
  best_criterion = pool_criterion(pool, stats, best.values);
  if (best_criterion > init_criterion) {
    best = init;
    best_criterion = init_criterion;
  }
  normalize_weights(best);
  best_criterion = pool_criterion(pool, stats, best.values);
  return {best, best_criterion};
}

void merge_pool(std::vector<NBestList>& pool, PoolStats& stats,
                const std::vector<NBestList>& fresh,
                const std::vector<Sentence>& refs, const MetricConfig& cfg) {
  if (pool.empty()) {
    pool.resize(fresh.size());
    for (std::size_t s = 0; s < fresh.size(); ++s)
      pool[s].sentence_index = fresh[s].sentence_index;
    stats.resize(fresh.size());
  }
  if (pool.size() != fresh.size() || refs.size() != pool.size())
    throw corpus_shape_error("pool merge size mismatch");
  for (std::size_t s = 0; s < fresh.size(); ++s) {
    std::set<Sentence> seen;
    for (const auto& e : pool[s].entries) seen.insert(e.words);
    for (const auto& e : fresh[s].entries) {
      if (!seen.insert(e.words).second) continue;
      pool[s].entries.push_back(e);
      CandidateStats cs;
      cs.bleu = ngram_stats(e.words, refs[s], cfg);
      TerResult t = ter(e.words, refs[s], cfg);
      cs.ter_edits = t.edits();
      cs.ref_len = t.ref_len;
      stats[s].push_back(std::move(cs));
    }
  }
}

TuneLoopResult tune_loop(const std::vector<ConfusionNetwork>& networks,
                         const std::vector<Sentence>& refs,
                         const TrigramLM& lm, const LocalVoteScorer* localvote,
                         const Weights& init, const MERTConfig& cfg,
                         const MetricConfig& mcfg) {
  if (networks.size() != refs.size())
    throw corpus_shape_error("network/reference size mismatch");
  TuneLoopResult result;
  result.weights = init;
  PoolStats stats;
  std::vector<Sentence> prev_onebest;
  for (int iter = 0; iter < cfg.outer_iterations; ++iter) {
    DecodeResult dec = decode_corpus(networks, result.weights, lm, localvote,
                                     cfg.nbest_size);
    if (iter > 0 && dec.onebest == prev_onebest) {
      result.converged = true;
      break;
    }
    prev_onebest = dec.onebest;
    merge_pool(result.pool, stats, dec.nbest, refs, mcfg);
    MertResult m = mert(result.pool, refs, result.weights, cfg, mcfg, &stats);
    result.weights = m.weights;
    result.criteria.push_back(m.criterion);
    ++result.iterations;
  }
  return result;
}

}  // namespace syscomb
