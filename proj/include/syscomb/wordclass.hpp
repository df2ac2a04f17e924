#ifndef SYSCOMB_WORDCLASS_HPP
#define SYSCOMB_WORDCLASS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "syscomb/types.hpp"

namespace syscomb {

struct ClusterConfig {
  int num_classes = 1000;
  int iterations = 10;
  std::uint64_t seed = 0;
};

struct ClassMap {
  std::unordered_map<std::string, int> word_to_class;
  int num_classes = 0;

  // Unseen words fall back to class 0.
  int class_of(const std::string& word) const {
    auto it = word_to_class.find(word);
    return it == word_to_class.end() ? 0 : it->second;
  }
};

// Surface form of a class id as used on NN layers. Reserved tokens map to
// themselves.
std::string class_token(int class_id);
std::string apply_class(const std::string& word, const ClassMap& map);
Sentence apply_classes(const Sentence& sentence, const ClassMap& map);

struct ClusterStats {
  // Exact objective value after initialization and after every accepted
  // exchange move.
  std::vector<double> objective_trace;
  int moves = 0;
};

// Exchange clustering against the class-bigram likelihood objective.
// Initialization: the C-1 most frequent words get singleton classes, the
// rest are assigned round robin.
ClassMap train_classes(const std::vector<Sentence>& corpus,
                       const ClusterConfig& cfg,
                       ClusterStats* stats = nullptr);

// Class-bigram log-likelihood term of a labeling; exposed so tests can
// compare against exhaustive search.
double class_bigram_objective(const std::vector<Sentence>& corpus,
                              const std::unordered_map<std::string, int>&
                                  word_to_class);

void write_class_map(const ClassMap& map, const std::string& path);
ClassMap read_class_map(const std::string& path);

}  // namespace syscomb

#endif
