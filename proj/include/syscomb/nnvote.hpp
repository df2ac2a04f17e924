#ifndef SYSCOMB_NNVOTE_HPP
#define SYSCOMB_NNVOTE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "syscomb/align.hpp"
#include "syscomb/oracle.hpp"
#include "syscomb/types.hpp"
#include "syscomb/wordclass.hpp"

namespace syscomb {

struct Vocabulary {
  // Reserved: 0 = <s>, 1 = <eps>, 2 = <unk>; regular words sorted after.
  static constexpr int kStartId = 0;
  static constexpr int kEpsilonId = 1;
  static constexpr int kUnknownId = 2;

  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;

  Vocabulary();
  void insert(const std::string& word);
  int lookup(const std::string& word) const;  // unseen -> kUnknownId
  int size() const { return static_cast<int>(words.size()); }
  bool operator==(const Vocabulary& o) const { return words == o.words; }
};

// A word-level training example: history*I context words, one target word.
struct WordExample {
  std::vector<std::string> context;
  std::string target;

  bool operator==(const WordExample&) const = default;
};

struct TrainingExample {
  std::vector<int> context;
  int target = 0;
};

struct NNConfig {
  int hidden_size = 200;
  double learning_rate = 0.08;
  int epochs = 20;
  int projection_dim = 150;
  int history = 1;  // 1 = slot words only, 2 = predecessor + slot word
  std::uint64_t seed = 1;
  int batch_size = 64;
};

// One shared projection layer, one rectifier hidden layer, softmax output.
struct FeedForwardNet {
  Vocabulary vocab;
  NNConfig config;
  int num_systems = 0;
  Eigen::MatrixXd projection;  // vocab x projection_dim
  Eigen::MatrixXd w_hidden;    // (history*I*projection_dim) x hidden
  Eigen::VectorXd b_hidden;
  Eigen::MatrixXd w_output;    // hidden x vocab
  Eigen::VectorXd b_output;

  int context_size() const { return config.history * num_systems; }
  Eigen::VectorXd forward(const std::vector<int>& context) const;
};

// One example per slot whose oracle decision is a real word (not UNK, not
// epsilon). Contexts are read from the network as given; pass the raw
// (unsimplified) network so inputs are the actual system words.
std::vector<WordExample> extract_examples(const ConfusionNetwork& cn,
                                          const OraclePath& oracle_path,
                                          int history);
std::vector<WordExample> extract_examples(
    const ConfusionNetwork& cn, const std::vector<std::string>& decisions,
    int history);

Vocabulary build_vocab(const std::vector<WordExample>& examples);

std::vector<TrainingExample> encode_examples(
    const std::vector<WordExample>& examples, const Vocabulary& vocab);

struct Gradients {
  Eigen::MatrixXd projection;
  Eigen::MatrixXd w_hidden;
  Eigen::VectorXd b_hidden;
  Eigen::MatrixXd w_output;
  Eigen::VectorXd b_output;
};

// Mean cross-entropy over the batch; fills gradients for every parameter
// block when `grads` is non-null.
double loss_and_gradients(const FeedForwardNet& net,
                          const std::vector<TrainingExample>& batch,
                          Gradients* grads);

struct TrainReport {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

FeedForwardNet train(const std::vector<WordExample>& examples,
                     const NNConfig& cfg, int num_systems,
                     TrainReport* report = nullptr);

double training_accuracy(const FeedForwardNet& net,
                         const std::vector<WordExample>& examples);

// Log-probability of one arc word given the slot context (one word per
// system) and, for history 2, each system's predecessor words.
double score_arc(const FeedForwardNet& net,
                 const std::vector<std::string>& slot_words,
                 const std::vector<std::string>& predecessors,
                 const std::string& arc_word);

void save_model(const FeedForwardNet& net, const std::string& path,
                const std::optional<ClassMap>& classes = std::nullopt);
struct LoadedModel {
  FeedForwardNet net;
  std::optional<ClassMap> classes;
};
LoadedModel load_model(const std::string& path);

// Examples file: context words space separated, target after a tab.
void write_examples(const std::vector<WordExample>& examples,
                    const std::string& path);
std::vector<WordExample> read_examples(const std::string& path);

// Decode-time scorer; applies the optional class map before lookup.
struct LocalVoteScorer {
  FeedForwardNet net;
  std::optional<ClassMap> classes;

  int history() const { return net.config.history; }
  double score(const std::vector<std::string>& slot_words,
               const std::vector<std::string>& predecessors,
               const std::string& arc_word) const;
  // Probabilities for a whole slot context; avoids per-arc forwards.
  Eigen::VectorXd distribution(const std::vector<std::string>& slot_words,
                               const std::vector<std::string>& predecessors)
      const;
  int target_id(const std::string& arc_word) const;
};

}  // namespace syscomb

#endif
