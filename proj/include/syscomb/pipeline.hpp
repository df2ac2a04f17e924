#ifndef SYSCOMB_PIPELINE_HPP
#define SYSCOMB_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "syscomb/decode.hpp"
#include "syscomb/metrics.hpp"
#include "syscomb/nnvote.hpp"
#include "syscomb/oracle.hpp"
#include "syscomb/tune.hpp"
#include "syscomb/types.hpp"
#include "syscomb/wordclass.hpp"

namespace syscomb {

struct SplitPaths {
  std::vector<std::string> systems;
  std::string references;  // optional for the test split
};

struct PipelineConfig {
  std::string output_dir = "run";
  SplitPaths tune_nn;
  SplitPaths tune_mert;
  SplitPaths test;
  OracleConfig oracle;
  NNConfig nn;
  bool localvote = true;
  bool classes_enabled = false;
  ClusterConfig classes;
  std::string classes_corpus;  // empty: tune (NN) references
  MERTConfig mert;
  MetricConfig metric;
};

PipelineConfig pipeline_config_from_json(const std::string& text);
std::string pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig load_pipeline_config(const std::string& path);

struct EvalRow {
  std::string name;
  double bleu = 0.0;
  double ter = 0.0;
  double criterion = 0.0;
};

struct DistributionRow {
  int support = 0;
  long in_output = 0;
  long total = 0;
  double percent = 0.0;
};

struct PipelineReport {
  std::vector<EvalRow> rows;
  std::vector<double> baseline_tune_criteria;
  std::vector<double> localvote_tune_criteria;
  std::vector<DistributionRow> baseline_distribution;
  std::vector<DistributionRow> localvote_distribution;
};

PipelineReport run_pipeline(const PipelineConfig& cfg);

// Per-sentence type-level support counts: for every word type in the union
// of the system outputs, in how many systems it appears and whether it made
// it into the combined output.
std::vector<DistributionRow> word_occurrence_distribution(
    const std::vector<std::vector<Sentence>>& systems,
    const std::vector<Sentence>& combined);

std::string format_distribution(const std::vector<DistributionRow>& rows);

enum class SweepAxis { KBest, ClassSize };

struct SweepRow {
  double value = 0.0;
  double criterion = 0.0;
};

std::vector<SweepRow> sweep(const PipelineConfig& cfg, SweepAxis axis,
                            const std::vector<double>& values);
void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& path);

}  // namespace syscomb

#endif
