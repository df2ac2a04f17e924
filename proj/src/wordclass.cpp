#include "syscomb/wordclass.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "syscomb/corpus.hpp"

namespace syscomb {

namespace {

inline double xlogx(double n) { return n > 0.0 ? n * std::log(n) : 0.0; }

struct BigramTable {
  // Word ids: 0..V-1 regular words, V = sentence boundary.
  std::vector<std::string> words;
  std::map<std::string, int> ids;
  std::vector<long> freq;
  std::vector<std::map<int, long>> succ;  // word -> following word counts
  std::vector<std::map<int, long>> pred;
  int boundary = 0;
};

BigramTable build_table(const std::vector<Sentence>& corpus) {
  BigramTable t;
  std::map<std::string, long> freq;
  for (const auto& s : corpus)
    for (const auto& w : s) ++freq[w];
  for (const auto& [w, f] : freq) {
    t.ids.emplace(w, static_cast<int>(t.words.size()));
    t.words.push_back(w);
  }
  t.boundary = static_cast<int>(t.words.size());
  t.freq.assign(t.words.size(), 0);
  for (const auto& [w, f] : freq) t.freq[t.ids[w]] = f;
  t.succ.resize(t.words.size() + 1);
  t.pred.resize(t.words.size() + 1);
  for (const auto& s : corpus) {
    if (s.empty()) continue;
    int prev = t.boundary;
    for (const auto& w : s) {
      int cur = t.ids[w];
      ++t.succ[prev][cur];
      ++t.pred[cur][prev];
      prev = cur;
    }
    ++t.succ[prev][t.boundary];
    ++t.pred[t.boundary][prev];
  }
  return t;
}

struct DeltaResult {
  double gain = 0.0;
  std::map<std::pair<int, int>, long> delta;
};

struct ClassCounts {
  int num_classes = 0;  // regular classes; boundary class index = num_classes
  std::vector<std::vector<long>> cc;  // (C+1) x (C+1)
  std::vector<long> row, col;

  double objective() const {
    double f = 0.0;
    for (const auto& r : cc)
      for (long n : r) f += xlogx(static_cast<double>(n));
    for (long n : row) f -= xlogx(static_cast<double>(n));
    for (long n : col) f -= xlogx(static_cast<double>(n));
    return f;
  }
};

}  // namespace

double class_bigram_objective(
    const std::vector<Sentence>& corpus,
    const std::unordered_map<std::string, int>& word_to_class) {
  int max_class = 0;
  for (const auto& [w, c] : word_to_class) max_class = std::max(max_class, c);
  const int boundary_class = max_class + 1;
  auto cls = [&](const std::string& w) {
    auto it = word_to_class.find(w);
    if (it == word_to_class.end())
      throw validation_error("word without class: " + w);
    return it->second;
  };
  std::map<std::pair<int, int>, long> cc;
  std::map<int, long> row, col;
  auto count = [&](int a, int b) {
    ++cc[{a, b}];
    ++row[a];
    ++col[b];
  };
  for (const auto& s : corpus) {
    if (s.empty()) continue;
    int prev = boundary_class;
    for (const auto& w : s) {
      count(prev, cls(w));
      prev = cls(w);
    }
    count(prev, boundary_class);
  }
  double f = 0.0;
  for (const auto& [k, n] : cc) f += xlogx(static_cast<double>(n));
  for (const auto& [k, n] : row) f -= xlogx(static_cast<double>(n));
  for (const auto& [k, n] : col) f -= xlogx(static_cast<double>(n));
  return f;
}

ClassMap train_classes(const std::vector<Sentence>& corpus,
                       const ClusterConfig& cfg, ClusterStats* stats) {
  if (cfg.num_classes < 2) throw config_error("need at least 2 classes");
  if (cfg.iterations < 1) throw config_error("need at least 1 iteration");
  BigramTable table = build_table(corpus);
  const int V = static_cast<int>(table.words.size());
  const int C = cfg.num_classes;
  if (V < C)
    throw std::domain_error("only " + std::to_string(V) +
                            " distinct words for " + std::to_string(C) +
                            " classes");

  // Frequency rank order, ties broken lexicographically.
  std::vector<int> rank(V);
  for (int i = 0; i < V; ++i) rank[i] = i;
  std::sort(rank.begin(), rank.end(), [&](int a, int b) {
    if (table.freq[a] != table.freq[b]) return table.freq[a] > table.freq[b];
    return table.words[a] < table.words[b];
  });

  std::vector<int> cls(V + 1, 0);
  cls[table.boundary] = C;
  for (int r = 0; r < V; ++r) {
    if (r < C - 1)
      cls[rank[r]] = r + 1;
    else
      cls[rank[r]] = (r - (C - 1)) % C;
  }

  ClassCounts counts;
  counts.num_classes = C;
  counts.cc.assign(C + 1, std::vector<long>(C + 1, 0));
  counts.row.assign(C + 1, 0);
  counts.col.assign(C + 1, 0);
  for (int w = 0; w <= V; ++w) {
    for (const auto& [v, n] : table.succ[w]) {
      counts.cc[cls[w]][cls[v]] += n;
      counts.row[cls[w]] += n;
      counts.col[cls[v]] += n;
    }
  }

  double objective = counts.objective();
  if (stats) {
    stats->objective_trace.clear();
    stats->moves = 0;
    stats->objective_trace.push_back(objective);
  }

  // One exchange sweep per iteration, visiting words in rank order.
  std::vector<long> pred_by_class(C + 1), succ_by_class(C + 1);
  std::vector<int> touched_pred, touched_succ;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (int r = 0; r < V; ++r) {
      const int w = rank[r];
      const int x = cls[w];
      // Aggregate w's neighbours by class, self transitions kept apart.
      touched_pred.clear();
      touched_succ.clear();
      long self = 0, in_total = 0, out_total = 0;
      for (const auto& [v, n] : table.pred[w]) {
        in_total += n;
        if (v == w) {
          self = n;
          continue;
        }
        if (pred_by_class[cls[v]] == 0) touched_pred.push_back(cls[v]);
        pred_by_class[cls[v]] += n;
      }
      for (const auto& [v, n] : table.succ[w]) {
        out_total += n;
        if (v == w) continue;
        if (succ_by_class[cls[v]] == 0) touched_succ.push_back(cls[v]);
        succ_by_class[cls[v]] += n;
      }

      auto delta_for = [&](int y) {
        // Cell deltas of moving w from x to y, applied to original counts.
        std::map<std::pair<int, int>, long> delta;
        for (int c : touched_pred) {
          long n = pred_by_class[c];
          delta[{c, x}] -= n;
          delta[{c, y}] += n;
        }
        for (int c : touched_succ) {
          long n = succ_by_class[c];
          delta[{x, c}] -= n;
          delta[{y, c}] += n;
        }
        if (self) {
          delta[{x, x}] -= self;
          delta[{y, y}] += self;
        }
        double d = 0.0;
        for (const auto& [cell, dn] : delta) {
          long n = counts.cc[cell.first][cell.second];
          d += xlogx(static_cast<double>(n + dn)) -
               xlogx(static_cast<double>(n));
        }
        d -= xlogx(static_cast<double>(counts.row[x] - out_total)) -
             xlogx(static_cast<double>(counts.row[x]));
        d -= xlogx(static_cast<double>(counts.row[y] + out_total)) -
             xlogx(static_cast<double>(counts.row[y]));
        d -= xlogx(static_cast<double>(counts.col[x] - in_total)) -
             xlogx(static_cast<double>(counts.col[x]));
        d -= xlogx(static_cast<double>(counts.col[y] + in_total)) -
             xlogx(static_cast<double>(counts.col[y]));
        return DeltaResult{d, std::move(delta)};
      };

      int best_y = -1;
      double best_d = 1e-9;
      for (int y = 0; y < C; ++y) {
        if (y == x) continue;
        auto res = delta_for(y);
        if (res.gain > best_d) {
          best_d = res.gain;
          best_y = y;
        }
      }
      if (best_y >= 0) {
        auto res = delta_for(best_y);
        for (const auto& [cell, dn] : res.delta)
          counts.cc[cell.first][cell.second] += dn;
        counts.row[x] -= out_total;
        counts.row[best_y] += out_total;
        counts.col[x] -= in_total;
        counts.col[best_y] += in_total;
        cls[w] = best_y;
        objective += res.gain;
        if (stats) {
          ++stats->moves;
          stats->objective_trace.push_back(objective);
        }
      }

      for (int c : touched_pred) pred_by_class[c] = 0;
      for (int c : touched_succ) succ_by_class[c] = 0;
    }
  }

  ClassMap map;
  map.num_classes = C;
  for (int w = 0; w < V; ++w) map.word_to_class[table.words[w]] = cls[w];
  return map;
}

std::string class_token(int class_id) {
  return "C" + std::to_string(class_id);
}

namespace {

bool is_class_token(const std::string& w) {
  if (w.size() < 2 || w[0] != 'C') return false;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(w[i]))) return false;
  return true;
}

}  // namespace

std::string apply_class(const std::string& word, const ClassMap& map) {
  if (is_reserved_token(word)) return word;
  auto it = map.word_to_class.find(word);
  if (it != map.word_to_class.end()) return class_token(it->second);
  if (is_class_token(word)) return word;  // already mapped
  return class_token(0);
}

Sentence apply_classes(const Sentence& sentence, const ClassMap& map) {
  Sentence out;
  out.reserve(sentence.size());
  for (const auto& w : sentence) out.push_back(apply_class(w, map));
  return out;
}

void write_class_map(const ClassMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  std::map<std::string, int> sorted(map.word_to_class.begin(),
                                    map.word_to_class.end());
  for (const auto& [w, c] : sorted) out << w << '\t' << c << '\n';
}

ClassMap read_class_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  ClassMap map;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw format_error("class map line without tab: " + line);
    int cls = std::stoi(line.substr(tab + 1));
    map.word_to_class[line.substr(0, tab)] = cls;
    map.num_classes = std::max(map.num_classes, cls + 1);
  }
  return map;
}

}  // namespace syscomb
