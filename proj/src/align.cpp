#include "syscomb/align.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

#include <json.hpp>

#include "syscomb/corpus.hpp"

namespace syscomb {

using json = nlohmann::json;

Sentence ConfusionNetwork::system_path(int system_id) const {
  Sentence out;
  for (const auto& slot : slots)
    if (!is_epsilon(slot.words[system_id]))
      out.push_back(slot.words[system_id]);
  return out;
}

int select_primary(const std::vector<Sentence>& hyps, const MetricConfig& cfg) {
  const int num = static_cast<int>(hyps.size());
  if (num < 2) throw corpus_shape_error("need at least 2 hypotheses");
  int best = -1;
  double best_mean = std::numeric_limits<double>::infinity();
  for (int i = 0; i < num; ++i) {
    if (hyps[i].empty()) continue;  // cannot serve as skeleton
    double sum = 0.0;
    for (int j = 0; j < num; ++j) {
      if (j == i) continue;
      sum += ter(hyps[j], hyps[i], cfg).rate;
    }
    double mean = sum / static_cast<double>(num - 1);
    if (mean < best_mean) {
      best_mean = mean;
      best = i;
    }
  }
  return best < 0 ? 0 : best;
}

std::vector<EditOp> align_pair(const std::vector<Slot>& slots,
                               const Sentence& hyp, bool lc) {
  const Sentence h = lc ? lowercase(hyp) : hyp;
  const std::size_t S = slots.size(), H = h.size();
  auto matches_slot = [&](std::size_t s, const std::string& word) {
    for (const auto& w : slots[s].words)
      if (!is_epsilon(w) && (lc ? lowercase(w) : w) == word) return true;
    return false;
  };
  std::vector<std::vector<int>> d(S + 1, std::vector<int>(H + 1, 0));
  for (std::size_t s = 0; s <= S; ++s) d[s][0] = static_cast<int>(s);
  for (std::size_t j = 0; j <= H; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t s = 1; s <= S; ++s) {
    for (std::size_t j = 1; j <= H; ++j) {
      int diag = d[s - 1][j - 1] + (matches_slot(s - 1, h[j - 1]) ? 0 : 1);
      int skip = d[s - 1][j] + 1;   // slot gets epsilon
      int ins = d[s][j - 1] + 1;    // new slot for this word
      d[s][j] = std::min({diag, skip, ins});
    }
  }
  std::vector<EditOp> ops;
  std::size_t s = S, j = H;
  while (s > 0 || j > 0) {
    if (s > 0 && j > 0 &&
        d[s][j] == d[s - 1][j - 1] + (matches_slot(s - 1, h[j - 1]) ? 0 : 1)) {
      ops.push_back(matches_slot(s - 1, h[j - 1]) ? EditOp::Match
                                                  : EditOp::Substitute);
      --s;
      --j;
    } else if (s > 0 && d[s][j] == d[s - 1][j] + 1) {
      ops.push_back(EditOp::Delete);
      --s;
    } else {
      ops.push_back(EditOp::Insert);
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

namespace {

// Applies an alignment to grow the network by one system's hypothesis.
void merge_hypothesis(std::vector<Slot>& slots, const Sentence& hyp,
                      const std::vector<EditOp>& ops, int system_id,
                      int num_systems) {
  std::vector<Slot> merged;
  merged.reserve(slots.size());
  std::size_t s = 0, j = 0;
  for (EditOp op : ops) {
    switch (op) {
      case EditOp::Match:
      case EditOp::Substitute:
        merged.push_back(slots[s++]);
        merged.back().words[system_id] = hyp[j++];
        break;
      case EditOp::Delete:
        merged.push_back(slots[s++]);
        merged.back().words[system_id] = kEpsilon;
        break;
      case EditOp::Insert: {
        Slot fresh;
        fresh.words.assign(num_systems, kEpsilon);
        fresh.words[system_id] = hyp[j++];
        merged.push_back(std::move(fresh));
        break;
      }
    }
  }
  slots = std::move(merged);
}

}  // namespace

ConfusionNetwork build_network(const std::vector<Sentence>& hyps,
                               int sentence_index, const MetricConfig& cfg) {
  const int num = static_cast<int>(hyps.size());
  if (num < 2) throw corpus_shape_error("need at least 2 hypotheses");
  ConfusionNetwork cn;
  cn.num_systems = num;
  cn.sentence_index = sentence_index;

  std::vector<int> nonempty;
  for (int i = 0; i < num; ++i) {
    if (hyps[i].empty())
      std::cerr << "warning: empty hypothesis from system " << i
                << " at sentence " << sentence_index << "\n";
    else
      nonempty.push_back(i);
  }
  if (nonempty.empty()) {
    cn.primary_id = 0;
    return cn;
  }

  cn.primary_id = select_primary(hyps, cfg);
  for (const auto& w : hyps[cn.primary_id]) {
    Slot slot;
    slot.words.assign(num, kEpsilon);
    slot.words[cn.primary_id] = w;
    cn.slots.push_back(std::move(slot));
  }

  // Remaining systems join in increasing TER against the skeleton.
  std::vector<std::pair<double, int>> order;
  for (int i : nonempty) {
    if (i == cn.primary_id) continue;
    order.emplace_back(ter(hyps[i], hyps[cn.primary_id], cfg).rate, i);
  }
  std::sort(order.begin(), order.end());
  for (const auto& [rate, i] : order) {
    auto ops = align_pair(cn.slots, hyps[i], cfg.lowercase);
    merge_hypothesis(cn.slots, hyps[i], ops, i, num);
  }
  return cn;
}

std::vector<MergedArc> merge_slot(const Slot& slot) {
  std::vector<MergedArc> arcs;
  for (std::size_t i = 0; i < slot.words.size(); ++i) {
    const std::string& w = slot.words[i];
    auto it = std::find_if(arcs.begin(), arcs.end(),
                           [&](const MergedArc& a) { return a.word == w; });
    if (it == arcs.end()) {
      arcs.push_back({w, {static_cast<int>(i)}});
    } else {
      it->support.push_back(static_cast<int>(i));
    }
  }
  return arcs;
}

std::string network_to_json(const ConfusionNetwork& cn) {
  json slots = json::array();
  for (const auto& slot : cn.slots) slots.push_back(slot.words);
  json rec;
  rec["primary_id"] = cn.primary_id;
  rec["sentence_index"] = cn.sentence_index;
  rec["slots"] = std::move(slots);
  return rec.dump();
}

ConfusionNetwork network_from_json(const std::string& line) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::exception& e) {
    throw format_error(std::string("bad network record: ") + e.what());
  }
  ConfusionNetwork cn;
  try {
    cn.primary_id = rec.at("primary_id").get<int>();
    cn.sentence_index = rec.at("sentence_index").get<int>();
    for (const auto& s : rec.at("slots")) {
      Slot slot;
      slot.words = s.get<std::vector<std::string>>();
      cn.slots.push_back(std::move(slot));
    }
  } catch (const json::exception& e) {
    throw format_error(std::string("bad network record: ") + e.what());
  }
  if (!cn.slots.empty()) {
    cn.num_systems = static_cast<int>(cn.slots.front().words.size());
    for (const auto& slot : cn.slots)
      if (static_cast<int>(slot.words.size()) != cn.num_systems)
        throw format_error("ragged slot widths in network record");
  }
  return cn;
}

void write_networks(const std::vector<ConfusionNetwork>& networks,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  for (const auto& cn : networks) out << network_to_json(cn) << '\n';
}

std::vector<ConfusionNetwork> read_networks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::vector<ConfusionNetwork> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(network_from_json(line));
  }
  return out;
}

}  // namespace syscomb
