#ifndef SYSCOMB_SYNTH_HPP
#define SYSCOMB_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "syscomb/types.hpp"

namespace syscomb {

struct NoiseSpec {
  double substitution_rate = 0.0;
  double deletion_rate = 0.0;
  double insertion_rate = 0.0;
  // Fraction of reference positions where exactly one randomly designated
  // system keeps the reference word while all others agree on the same
  // distractor token.
  double planted_minority_rate = 0.0;
  // Substitution pool; empty means sampling from the reference vocabulary by
  // frequency. Planted distractors come from a dedicated token pool so the
  // planted channel stays identifiable.
  std::vector<std::string> confusables;
  std::uint64_t seed = 1;
};

struct PlantedLabel {
  int sentence_index = 0;
  int position = 0;  // reference token position
  int correct_system = 0;

  bool operator==(const PlantedLabel&) const = default;
};

struct SynthResult {
  CombinationCorpus corpus;
  std::vector<PlantedLabel> labels;
};

SynthResult generate_systems(const std::vector<Sentence>& refs,
                             const NoiseSpec& spec, int num_systems);

// Labels file: JSON lines {sentence_index, position, correct_system}.
void write_labels(const std::vector<PlantedLabel>& labels,
                  const std::string& path);
std::vector<PlantedLabel> read_labels(const std::string& path);

}  // namespace syscomb

#endif
