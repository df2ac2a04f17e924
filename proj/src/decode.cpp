#include "syscomb/decode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "syscomb/corpus.hpp"

namespace syscomb {

TrigramLM TrigramLM::train(const CombinationCorpus& corpus) {
  std::vector<std::vector<Sentence>> systems;
  for (const auto& sys : corpus.systems) systems.push_back(sys.sentences);
  return train(systems);
}

TrigramLM TrigramLM::train(const std::vector<std::vector<Sentence>>& systems) {
  if (systems.empty()) throw corpus_shape_error("no systems for LM training");
  TrigramLM lm;
  auto intern = [&lm](const std::string& w) {
    return lm.ids_.emplace(w, static_cast<int>(lm.ids_.size())).first->second;
  };
  const int start = intern(kSentStart);
  const int end = intern(kSentEnd);
  lm.unk_id_ = intern(kUnkToken);

  std::map<int, long> event_counts;
  for (const auto& sentences : systems) {
    for (const auto& s : sentences) {
      int h1 = start, h2 = start;
      auto emit = [&](int w) {
        ++lm.trigram_[{h1, h2, w}];
        ++lm.bigram_ctx_[{h1, h2}];
        ++lm.bigram_[{h2, w}];
        ++lm.unigram_ctx_[h2];
        ++lm.unigram_[w];
        ++event_counts[w];
        ++lm.total_events_;
        h1 = h2;
        h2 = w;
      };
      for (const auto& w : s) emit(intern(w));
      emit(end);
    }
  }
  // Distinct continuation types per context.
  for (const auto& [key, n] : lm.trigram_)
    ++lm.bigram_ctx_types_[{key[0], key[1]}];
  for (const auto& [key, n] : lm.bigram_) ++lm.unigram_ctx_types_[key.first];
  lm.root_types_ = static_cast<long>(event_counts.size());

  // Predictable events: every seen event type plus <unk>.
  for (const auto& [w, id] : lm.ids_) {
    if (id == start) continue;
    if (event_counts.count(id) || id == lm.unk_id_) lm.events_.push_back(w);
  }
  std::sort(lm.events_.begin(), lm.events_.end());
  return lm;
}

int TrigramLM::id(const std::string& w) const {
  auto it = ids_.find(w);
  return it == ids_.end() ? unk_id_ : it->second;
}

double TrigramLM::prob(const std::string& h1s, const std::string& h2s,
                       const std::string& ws) const {
  const int h1 = id(h1s), h2 = id(h2s), w = id(ws);
  const double p0 = 1.0 / static_cast<double>(events_.size());

  auto count = [](const auto& m, const auto& k) -> long {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
  };

  long cu = count(unigram_, w);
  double p_uni = (static_cast<double>(cu) +
                  static_cast<double>(root_types_) * p0) /
                 (static_cast<double>(total_events_) +
                  static_cast<double>(root_types_));

  long ctx2 = count(unigram_ctx_, h2);
  double p_bi = p_uni;
  if (ctx2 > 0) {
    long t2 = count(unigram_ctx_types_, h2);
    p_bi = (static_cast<double>(count(bigram_, std::make_pair(h2, w))) +
            static_cast<double>(t2) * p_uni) /
           (static_cast<double>(ctx2) + static_cast<double>(t2));
  }

  long ctx3 = count(bigram_ctx_, std::make_pair(h1, h2));
  double p_tri = p_bi;
  if (ctx3 > 0) {
    long t3 = count(bigram_ctx_types_, std::make_pair(h1, h2));
    p_tri = (static_cast<double>(
                 count(trigram_, std::vector<int>{h1, h2, w})) +
             static_cast<double>(t3) * p_bi) /
            (static_cast<double>(ctx3) + static_cast<double>(t3));
  }
  return p_tri;
}

double TrigramLM::log_prob(const std::string& h1, const std::string& h2,
                           const std::string& w) const {
  return std::log(prob(h1, h2, w));
}

int Weights::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

Weights make_weights(int num_systems, bool localvote, double initial) {
  Weights w;
  for (int i = 0; i < num_systems; ++i)
    w.names.push_back("sys" + std::to_string(i));
  w.names.push_back("primary");
  w.names.push_back("lm");
  w.names.push_back("wordPenalty");
  if (localvote) w.names.push_back("localVote");
  w.values.assign(w.names.size(), initial);
  return w;
}

std::vector<double> arc_features(const MergedArc& arc, int primary_id,
                                 int num_systems) {
  std::vector<double> f(num_systems + 2, 0.0);
  for (int s : arc.support) f[s] = 1.0;
  f[num_systems] =
      std::binary_search(arc.support.begin(), arc.support.end(), primary_id)
          ? 1.0
          : 0.0;
  f[num_systems + 1] = is_epsilon(arc.word) ? 0.0 : 1.0;
  return f;
}

namespace {

struct Partial {
  Sentence words;
  std::vector<double> features;
  double score = 0.0;
};

using StateKey = std::pair<std::string, std::string>;  // (h1, h2)

}  // namespace

NBestList decode_nbest(const ConfusionNetwork& cn, const Weights& weights,
                       const TrigramLM& lm, const LocalVoteScorer* localvote,
                       std::size_t n) {
  const int num = cn.num_systems;
  const int dim = num + 3 + (localvote ? 1 : 0);
  if (weights.dim() != dim)
    throw config_error("weight dimension " + std::to_string(weights.dim()) +
                       ", feature dimension " + std::to_string(dim));
  if (n < 1) throw config_error("n-best size must be at least 1");
  const int lm_ix = num + 1;
  const int wp_ix = num + 2;
  const int lv_ix = num + 3;

  // Per-system predecessors per slot, for localVote history.
  std::vector<std::vector<std::string>> preds(cn.slots.size());
  if (localvote && localvote->history() == 2) {
    std::vector<std::string> prev(num, kSentStart);
    for (std::size_t t = 0; t < cn.slots.size(); ++t) {
      preds[t] = prev;
      for (int i = 0; i < num; ++i)
        if (!is_epsilon(cn.slots[t].words[i])) prev[i] = cn.slots[t].words[i];
    }
  }

  std::map<StateKey, std::map<Sentence, Partial>> layer;
  Partial root;
  root.features.assign(dim, 0.0);
  layer[{kSentStart, kSentStart}][{}] = root;

  auto keep_top = [&](std::map<StateKey, std::map<Sentence, Partial>>& next) {
    if (n == kAllPaths) return;
    for (auto& [state, partials] : next) {
      if (partials.size() <= n) continue;
      std::vector<const Partial*> ranked;
      ranked.reserve(partials.size());
      for (const auto& [surface, p] : partials) ranked.push_back(&p);
      std::sort(ranked.begin(), ranked.end(),
                [](const Partial* a, const Partial* b) {
                  if (a->score != b->score) return a->score > b->score;
                  return a->words < b->words;
                });
      std::map<Sentence, Partial> kept;
      for (std::size_t i = 0; i < n; ++i)
        kept.emplace(ranked[i]->words, *ranked[i]);
      partials = std::move(kept);
    }
  };

  for (std::size_t t = 0; t < cn.slots.size(); ++t) {
    auto merged = merge_slot(cn.slots[t]);
    Eigen::VectorXd lv_dist;
    if (localvote)
      lv_dist = localvote->distribution(cn.slots[t].words, preds[t]);
    std::map<StateKey, std::map<Sentence, Partial>> next;
    for (const auto& [state, partials] : layer) {
      for (const auto& [surface, p] : partials) {
        for (const auto& arc : merged) {
          Partial q = p;
          auto stat = arc_features(arc, cn.primary_id, num);
          double delta = 0.0;
          for (int i = 0; i < num + 1; ++i) {
            q.features[i] += stat[i];
            delta += weights.values[i] * stat[i];
          }
          StateKey key = state;
          if (!is_epsilon(arc.word)) {
            q.features[wp_ix] += 1.0;
            delta += weights.values[wp_ix];
            double lp = lm.log_prob(state.first, state.second, arc.word);
            q.features[lm_ix] += lp;
            delta += weights.values[lm_ix] * lp;
            if (localvote) {
              double lv = std::log(lv_dist(localvote->target_id(arc.word)));
              q.features[lv_ix] += lv;
              delta += weights.values[lv_ix] * lv;
            }
            q.words.push_back(arc.word);
            key = {state.second, arc.word};
          }
          q.score += delta;
          auto& bucket = next[key];
          auto [it, fresh] = bucket.emplace(q.words, q);
          if (!fresh && q.score > it->second.score) it->second = std::move(q);
        }
      }
    }
    keep_top(next);
    layer = std::move(next);
  }

  // Sentence-end transition, then global dedup.
  std::map<Sentence, Partial> finals;
  for (auto& [state, partials] : layer) {
    for (auto& [surface, p] : partials) {
      Partial q = p;
      double lp = lm.log_prob(state.first, state.second, kSentEnd);
      q.features[lm_ix] += lp;
      q.score += weights.values[lm_ix] * lp;
      auto [it, fresh] = finals.emplace(q.words, q);
      if (!fresh && q.score > it->second.score) it->second = std::move(q);
    }
  }
  std::vector<Partial> ranked;
  ranked.reserve(finals.size());
  for (auto& [surface, p] : finals) ranked.push_back(std::move(p));
  std::sort(ranked.begin(), ranked.end(), [](const Partial& a, const Partial& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.words < b.words;
  });
  if (n != kAllPaths && ranked.size() > n) ranked.resize(n);

  NBestList list;
  list.sentence_index = cn.sentence_index;
  for (auto& p : ranked)
    list.entries.push_back({std::move(p.words), std::move(p.features), p.score});
  return list;
}

OracleModelHook make_oracle_model_hook(const ConfusionNetwork& cn,
                                       const Weights& weights,
                                       const TrigramLM& lm) {
  const int num = cn.num_systems;
  if (weights.dim() != num + 3)
    throw config_error("oracle tie-break expects the baseline feature set");
  const int primary = cn.primary_id;
  return [num, primary, weights, &lm](int, const MergedArc& arc,
                                      const std::string& prev1,
                                      const std::string& prev2) {
    auto stat = arc_features(arc, primary, num);
    double score = 0.0;
    for (int i = 0; i <= num; ++i) score += weights.values[i] * stat[i];
    // weights order is [...globalVote, primary, lm, wordPenalty]; the static
    // vector carries the penalty right after the primary flag
    score += weights.values[num + 2] * stat[num + 1];
    if (!is_epsilon(arc.word))
      score += weights.values[num + 1] * lm.log_prob(prev2, prev1, arc.word);
    return score;
  };
}

DecodeResult decode_corpus(const std::vector<ConfusionNetwork>& networks,
                           const Weights& weights, const TrigramLM& lm,
                           const LocalVoteScorer* localvote, std::size_t n) {
  DecodeResult result;
  for (const auto& cn : networks) {
    NBestList list = decode_nbest(cn, weights, lm, localvote, n);
    result.onebest.push_back(list.entries.empty() ? Sentence{}
                                                  : list.entries.front().words);
    result.nbest.push_back(std::move(list));
  }
  return result;
}

void write_nbest(const std::vector<NBestList>& lists,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << std::setprecision(17);
  for (const auto& list : lists) {
    for (const auto& e : list.entries) {
      out << list.sentence_index << " ||| ";
      for (std::size_t i = 0; i < e.words.size(); ++i) {
        if (i) out << ' ';
        out << e.words[i];
      }
      out << " |||";
      for (double f : e.features) out << ' ' << f;
      out << " ||| " << e.score << '\n';
    }
  }
}

std::vector<NBestList> read_nbest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::vector<NBestList> lists;
  std::string line;
  const std::string sep = " ||| ";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      auto next = line.find(sep, pos);
      if (next == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, next - pos));
      pos = next + sep.size();
    }
    if (fields.size() != 4) throw format_error("bad n-best line: " + line);
    NBestEntry e;
    int index = std::stoi(fields[0]);
    e.words = split_tokens(fields[1]);
    for (const auto& tok : split_tokens(fields[2]))
      e.features.push_back(std::stod(tok));
    e.score = std::stod(fields[3]);
    if (lists.empty() || lists.back().sentence_index != index) {
      lists.push_back(NBestList{index, {}});
    }
    lists.back().entries.push_back(std::move(e));
  }
  return lists;
}

void write_weights(const Weights& weights, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << std::setprecision(17);
  for (int i = 0; i < weights.dim(); ++i)
    out << weights.names[i] << '\t' << weights.values[i] << '\n';
}

Weights read_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  Weights w;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw format_error("weights line without tab: " + line);
    w.names.push_back(line.substr(0, tab));
    w.values.push_back(std::stod(line.substr(tab + 1)));
  }
  return w;
}

}  // namespace syscomb
