#ifndef SYSCOMB_ALIGN_HPP
#define SYSCOMB_ALIGN_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "syscomb/metrics.hpp"
#include "syscomb/types.hpp"

namespace syscomb {

// One word (or epsilon) per system, indexed by system id.
struct Slot {
  std::vector<std::string> words;

  bool operator==(const Slot&) const = default;
};

struct ConfusionNetwork {
  std::vector<Slot> slots;
  int num_systems = 0;
  int primary_id = 0;
  int sentence_index = 0;

  bool operator==(const ConfusionNetwork&) const = default;
  // Non-epsilon arcs of one system, left to right.
  Sentence system_path(int system_id) const;
};

struct MergedArc {
  std::string word;          // kEpsilon for the epsilon arc
  std::vector<int> support;  // ascending system ids

  bool operator==(const MergedArc&) const = default;
};

// Skeleton choice: argmin over systems of the mean TER of all other
// hypotheses scored against this one; ties go to the lowest index.
int select_primary(const std::vector<Sentence>& hyps,
                   const MetricConfig& cfg = {});

// Monotone edit alignment of one hypothesis against the current slot
// sequence. A hypothesis word matching any word already present in a slot
// costs 0; substitution, slot skip (epsilon) and new-slot insertion cost 1.
// Ops consume: Match/Substitute one slot + one word, Delete one slot,
// Insert one word (a new slot).
std::vector<EditOp> align_pair(const std::vector<Slot>& slots,
                               const Sentence& hyp, bool lowercase = true);

ConfusionNetwork build_network(const std::vector<Sentence>& hyps,
                               int sentence_index,
                               const MetricConfig& cfg = {});

// Groups a slot's arcs by word in order of first occurrence; supports
// partition the systems.
std::vector<MergedArc> merge_slot(const Slot& slot);

// JSON-lines dump of networks; byte-exact round trip.
std::string network_to_json(const ConfusionNetwork& cn);
ConfusionNetwork network_from_json(const std::string& line);
void write_networks(const std::vector<ConfusionNetwork>& networks,
                    const std::string& path);
std::vector<ConfusionNetwork> read_networks(const std::string& path);

}  // namespace syscomb

#endif
