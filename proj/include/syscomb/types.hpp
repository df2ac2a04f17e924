#ifndef SYSCOMB_TYPES_HPP
#define SYSCOMB_TYPES_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace syscomb {

// A pre-tokenized sentence. Storage preserves case; metrics lowercase
// internally.
using Sentence = std::vector<std::string>;

// Marker for an arc that emits no word. Distinguished from vocabulary
// tokens: loading rejects all reserved strings below.
inline const std::string kEpsilon = "<eps>";
inline const std::string kUnkWord = "UNK";
inline const std::string kSentStart = "<s>";
inline const std::string kSentEnd = "</s>";
inline const std::string kUnkToken = "<unk>";

inline bool is_epsilon(const std::string& tok) { return tok == kEpsilon; }

inline bool is_reserved_token(const std::string& tok) {
  return tok == kEpsilon || tok == kUnkWord || tok == kSentStart ||
         tok == kSentEnd || tok == kUnkToken;
}

struct SystemOutput {
  int system_id = 0;
  std::string name;
  std::vector<Sentence> sentences;
};

struct CombinationCorpus {
  std::vector<SystemOutput> systems;
  std::optional<std::vector<Sentence>> references;

  int num_systems() const { return static_cast<int>(systems.size()); }
  std::size_t size() const {
    return systems.empty() ? 0 : systems.front().sentences.size();
  }
};

// Error taxonomy. Sentence-level math errors use std::domain_error.
struct corpus_shape_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace syscomb

#endif
