#include "syscomb/synth.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>

#include <json.hpp>

namespace syscomb {

using json = nlohmann::json;

namespace {

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

// Frequency-proportional sampler over the reference vocabulary.
struct WordSampler {
  std::vector<std::string> words;
  std::vector<long> cumulative;
  long total = 0;

  explicit WordSampler(const std::vector<Sentence>& refs) {
    std::map<std::string, long> freq;
    for (const auto& s : refs)
      for (const auto& w : s) ++freq[w];
    for (const auto& [w, f] : freq) {
      words.push_back(w);
      total += f;
      cumulative.push_back(total);
    }
  }

  const std::string& draw(std::mt19937_64& rng) const {
    long x = static_cast<long>(rng() % static_cast<std::uint64_t>(total));
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    return words[it - cumulative.begin()];
  }
};

}  // namespace

SynthResult generate_systems(const std::vector<Sentence>& refs,
                             const NoiseSpec& spec, int num_systems) {
  if (refs.empty()) throw std::domain_error("empty reference corpus");
  if (num_systems < 2) throw config_error("need at least 2 systems");
  for (double rate : {spec.substitution_rate, spec.deletion_rate,
                      spec.insertion_rate, spec.planted_minority_rate})
    if (rate < 0.0 || rate > 1.0) throw config_error("rates must be in [0,1]");

  WordSampler sampler(refs);
  auto draw_sub = [&](std::mt19937_64& rng, const std::string& avoid) {
    for (int attempt = 0; attempt < 16; ++attempt) {
      const std::string& w = spec.confusables.empty()
                                 ? sampler.draw(rng)
                                 : spec.confusables[rng() %
                                                    spec.confusables.size()];
      if (w != avoid) return w;
    }
    return avoid + "_alt";
  };
  // Distractor pool for planted positions, disjoint from the reference
  // vocabulary by construction.
  const int distractor_pool = 32;
  auto draw_distractor = [&](std::mt19937_64& rng) {
    return "zq" + std::to_string(rng() % distractor_pool);
  };

  std::mt19937_64 planted_rng(spec.seed * 6364136223846793005ull + 1);
  std::vector<std::mt19937_64> sys_rng;
  for (int i = 0; i < num_systems; ++i)
    sys_rng.emplace_back(spec.seed * 6364136223846793005ull +
                         2654435761ull * (i + 2));

  SynthResult result;
  result.corpus.systems.resize(num_systems);
  for (int i = 0; i < num_systems; ++i) {
    result.corpus.systems[i].system_id = i;
    result.corpus.systems[i].name = "synthetic-" + std::to_string(i);
  }
  result.corpus.references = refs;

  for (std::size_t si = 0; si < refs.size(); ++si) {
    const Sentence& ref = refs[si];
    std::vector<Sentence> outputs(num_systems);

    // Planted positions first so every system agrees on the channel.
    std::vector<int> planted(ref.size(), -1);
    std::vector<std::string> distractor(ref.size());
    for (std::size_t pos = 0; pos < ref.size(); ++pos) {
      if (uniform_unit(planted_rng) < spec.planted_minority_rate) {
        planted[pos] = static_cast<int>(planted_rng() %
                                        static_cast<std::uint64_t>(num_systems));
        distractor[pos] = draw_distractor(planted_rng);
        result.labels.push_back({static_cast<int>(si), static_cast<int>(pos),
                                 planted[pos]});
      }
    }

    for (int i = 0; i < num_systems; ++i) {
      auto& rng = sys_rng[i];
      Sentence out;
      for (std::size_t pos = 0; pos < ref.size(); ++pos) {
        if (planted[pos] >= 0) {
          out.push_back(planted[pos] == i ? ref[pos] : distractor[pos]);
          continue;
        }
        double u = uniform_unit(rng);
        if (u < spec.deletion_rate) {
          // dropped token
        } else if (u < spec.deletion_rate + spec.substitution_rate) {
          out.push_back(draw_sub(rng, ref[pos]));
        } else {
          out.push_back(ref[pos]);
        }
        if (uniform_unit(rng) < spec.insertion_rate)
          out.push_back(sampler.draw(rng));
      }
      outputs[i] = std::move(out);
    }
    for (int i = 0; i < num_systems; ++i)
      result.corpus.systems[i].sentences.push_back(std::move(outputs[i]));
  }
  return result;
}

void write_labels(const std::vector<PlantedLabel>& labels,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  for (const auto& l : labels) {
    json rec;
    rec["correct_system"] = l.correct_system;
    rec["position"] = l.position;
    rec["sentence_index"] = l.sentence_index;
    out << rec.dump() << '\n';
  }
}

std::vector<PlantedLabel> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::vector<PlantedLabel> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      labels.push_back({rec.at("sentence_index").get<int>(),
                        rec.at("position").get<int>(),
                        rec.at("correct_system").get<int>()});
    } catch (const json::exception& e) {
      throw format_error(std::string("bad label record: ") + e.what());
    }
  }
  return labels;
}

}  // namespace syscomb
