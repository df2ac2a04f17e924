#include "syscomb/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "syscomb/corpus.hpp"
#include "syscomb/metrics.hpp"

namespace syscomb {

using json = nlohmann::json;

ConfusionNetwork simplify_unk(const ConfusionNetwork& cn, const Sentence& ref,
                              bool lc) {
  if (ref.empty()) throw std::domain_error("empty reference");
  std::unordered_set<std::string> ref_words;
  for (const auto& w : ref) ref_words.insert(lc ? lowercase(w) : w);
  ConfusionNetwork out = cn;
  for (auto& slot : out.slots) {
    for (auto& w : slot.words) {
      if (is_epsilon(w)) continue;
      if (!ref_words.count(lc ? lowercase(w) : w)) w = kUnkWord;
    }
  }
  return out;
}

namespace {

struct VecHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (int x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

struct Partial {
  std::vector<int> seq;                        // lowercased word ids
  std::vector<std::pair<int, int>> gram_hits;  // ref-gram id -> count so far
  std::vector<int> matches;                    // clipped matches per order
  int total_matches = 0;
  double model_score = 0.0;
  std::string last1, last2;  // last two emitted surface words
  int parent = -1;
  int arc_choice = -1;
};

int gram_count(const std::vector<std::pair<int, int>>& hits, int id) {
  for (const auto& [g, c] : hits)
    if (g == id) return c;
  return 0;
}

void bump_gram(std::vector<std::pair<int, int>>& hits, int id) {
  for (auto& [g, c] : hits) {
    if (g == id) {
      ++c;
      return;
    }
  }
  hits.emplace_back(id, 1);
}

}  // namespace

OraclePath extract_oracle(const ConfusionNetwork& cn, const Sentence& ref,
                          const OracleConfig& cfg,
                          const OracleModelHook& model) {
  if (cn.slots.empty()) throw std::domain_error("empty confusion network");
  if (ref.empty()) throw std::domain_error("empty reference");
  if (cfg.k < 1) throw config_error("oracle beam must be at least 1");
  const int order = cfg.max_order;

  // Intern words; ids are assigned in sorted order so id-sequence comparison
  // is lexicographic word comparison.
  std::map<std::string, int> word_ids;
  auto norm = [&](const std::string& w) {
    return cfg.lowercase ? lowercase(w) : w;
  };
  for (const auto& w : ref) word_ids.emplace(norm(w), 0);
  for (const auto& slot : cn.slots)
    for (const auto& w : slot.words)
      if (!is_epsilon(w)) word_ids.emplace(norm(w), 0);
  {
    int next = 0;
    for (auto& [w, id] : word_ids) id = next++;
  }

  // Reference n-gram dictionary with multiplicities.
  std::vector<int> ref_ids;
  for (const auto& w : ref) ref_ids.push_back(word_ids.at(norm(w)));
  std::map<std::vector<int>, int> gram_dict;
  std::vector<int> gram_ref_count;
  for (int n = 1; n <= order; ++n) {
    for (std::size_t i = 0; i + n <= ref_ids.size(); ++i) {
      std::vector<int> g(ref_ids.begin() + i, ref_ids.begin() + i + n);
      auto [it, fresh] = gram_dict.emplace(std::move(g),
                                           static_cast<int>(gram_ref_count.size()));
      if (fresh)
        gram_ref_count.push_back(1);
      else
        ++gram_ref_count[it->second];
    }
  }

  std::vector<std::vector<MergedArc>> merged;
  merged.reserve(cn.slots.size());
  for (const auto& slot : cn.slots) merged.push_back(merge_slot(slot));

  const bool use_model = model && cfg.use_model_tiebreak;

  std::vector<Partial> arena;
  arena.push_back(Partial{{}, {}, std::vector<int>(order, 0), 0, 0.0,
                          kSentStart, kSentStart, -1, -1});
  std::vector<int> beam{0};

  std::vector<int> scratch;
  for (std::size_t t = 0; t < cn.slots.size(); ++t) {
    std::vector<int> candidates;
    for (int pi : beam) {
      for (std::size_t a = 0; a < merged[t].size(); ++a) {
        const MergedArc& arc = merged[t][a];
        Partial next = arena[pi];
        next.parent = pi;
        next.arc_choice = static_cast<int>(a);
        if (use_model)
          next.model_score += model(static_cast<int>(t), arc,
                                    arena[pi].last1, arena[pi].last2);
        if (!is_epsilon(arc.word)) {
          int wid = word_ids.at(norm(arc.word));
          next.seq.push_back(wid);
          next.last2 = arena[pi].last1;
          next.last1 = arc.word;
          const int len = static_cast<int>(next.seq.size());
          for (int n = 1; n <= order && n <= len; ++n) {
            scratch.assign(next.seq.end() - n, next.seq.end());
            auto it = gram_dict.find(scratch);
            if (it == gram_dict.end()) continue;
            int before = gram_count(next.gram_hits, it->second);
            bump_gram(next.gram_hits, it->second);
            if (before + 1 <= gram_ref_count[it->second]) {
              ++next.matches[n - 1];
              ++next.total_matches;
            }
          }
        }
        candidates.push_back(static_cast<int>(arena.size()));
        arena.push_back(std::move(next));
      }
    }
    // Recombine identical sequences, preferring the higher model score.
    std::unordered_map<std::vector<int>, int, VecHash> best_by_seq;
    std::vector<int> survivors;
    for (int ci : candidates) {
      auto [it, fresh] = best_by_seq.emplace(arena[ci].seq, ci);
      if (fresh) {
        survivors.push_back(ci);
      } else if (arena[ci].model_score > arena[it->second].model_score) {
        *std::find(survivors.begin(), survivors.end(), it->second) = ci;
        it->second = ci;
      }
    }
    std::sort(survivors.begin(), survivors.end(), [&](int a, int b) {
      const Partial& pa = arena[a];
      const Partial& pb = arena[b];
      if (pa.total_matches != pb.total_matches)
        return pa.total_matches > pb.total_matches;
      if (pa.model_score != pb.model_score)
        return pa.model_score > pb.model_score;
      return pa.seq < pb.seq;
    });
    if (cfg.k != kUnlimitedBeam && survivors.size() > cfg.k)
      survivors.resize(cfg.k);
    beam = std::move(survivors);
  }

  // Brevity penalty joins at the final node. Scoring goes through the same
  // arithmetic as sentence_bleu so oracle scores and metric scores are
  // bit-identical for equal statistics.
  auto final_sbleu = [&](const Partial& p) {
    NGramStats stats(order);
    stats.hyp_len = static_cast<long>(p.seq.size());
    stats.ref_len = static_cast<long>(ref.size());
    for (int n = 1; n <= order; ++n) {
      stats.matches[n - 1] = p.matches[n - 1];
      stats.totals[n - 1] = std::max<long>(0, stats.hyp_len - n + 1);
    }
    return sentence_bleu_from_stats(stats);
  };

  int best = beam.front();
  double best_score = final_sbleu(arena[best]);
  for (std::size_t i = 1; i < beam.size(); ++i) {
    double s = final_sbleu(arena[beam[i]]);
    const Partial& pa = arena[beam[i]];
    const Partial& pb = arena[best];
    if (s > best_score ||
        (s == best_score && (pa.model_score > pb.model_score ||
                             (pa.model_score == pb.model_score &&
                              pa.seq < pb.seq)))) {
      best = beam[i];
      best_score = s;
    }
  }

  OraclePath path;
  path.sbleu = best_score;
  path.decisions.resize(cn.slots.size());
  int node = best;
  for (int t = static_cast<int>(cn.slots.size()) - 1; t >= 0; --t) {
    const Partial& p = arena[node];
    const MergedArc& arc = merged[t][p.arc_choice];
    path.decisions[t] = OracleDecision{arc.word, arc.support};
    node = p.parent;
  }
  for (const auto& d : path.decisions)
    if (!is_epsilon(d.word)) path.words.push_back(d.word);
#ifndef NDEBUG
  // incremental clipped counts against a full recount
  if (!path.words.empty()) {
    MetricConfig mcfg{order, cfg.lowercase};
    NGramStats recount = ngram_stats(path.words, ref, mcfg);
    for (int n = 0; n < order; ++n)
      assert(recount.matches[n] == arena[best].matches[n]);
    assert(sentence_bleu_from_stats(recount) == path.sbleu);
  }
#endif
  return path;
}

OracleCorpusResult oracle_corpus(const std::vector<ConfusionNetwork>& networks,
                                 const std::vector<Sentence>& refs,
                                 const OracleConfig& cfg, bool simplify,
                                 const OracleModelHookFactory& hooks) {
  if (networks.size() != refs.size())
    throw corpus_shape_error("oracle: " + std::to_string(networks.size()) +
                             " networks vs " + std::to_string(refs.size()) +
                             " references");
  OracleCorpusResult result;
  for (std::size_t i = 0; i < networks.size(); ++i) {
    try {
      OracleModelHook hook = hooks ? hooks(networks[i]) : OracleModelHook{};
      OraclePath p =
          simplify
              ? extract_oracle(
                    simplify_unk(networks[i], refs[i], cfg.lowercase), refs[i],
                    cfg, hook)
              : extract_oracle(networks[i], refs[i], cfg, hook);
      result.sentences.push_back(p.words);
      result.paths.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw std::runtime_error("sentence " + std::to_string(i) + ": " +
                               e.what());
    }
  }
  MetricConfig mcfg{cfg.max_order, cfg.lowercase};
  result.bleu = corpus_bleu(result.sentences, refs, mcfg);
  result.ter_score = corpus_ter(result.sentences, refs, mcfg);
  result.criterion = (result.ter_score - result.bleu) / 2.0;
  return result;
}

void write_decisions(const std::vector<OraclePath>& paths,
                     const std::vector<int>& sentence_indices,
                     const std::string& path) {
  if (paths.size() != sentence_indices.size())
    throw corpus_shape_error("decision/index count mismatch");
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    json rec;
    std::vector<std::string> words;
    for (const auto& d : paths[i].decisions) words.push_back(d.word);
    rec["decisions"] = std::move(words);
    rec["sentence_index"] = sentence_indices[i];
    out << rec.dump() << '\n';
  }
}

std::vector<std::pair<int, std::vector<std::string>>> read_decisions(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::vector<std::pair<int, std::vector<std::string>>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      out.emplace_back(rec.at("sentence_index").get<int>(),
                       rec.at("decisions").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
      throw format_error(std::string("bad decision record: ") + e.what());
    }
  }
  return out;
}

}  // namespace syscomb
