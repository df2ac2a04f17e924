#include "syscomb/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "syscomb/corpus.hpp"
#include "syscomb/synth.hpp"

namespace syscomb {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

SplitPaths split_from_json(const json& j) {
  SplitPaths p;
  p.systems = j.at("systems").get<std::vector<std::string>>();
  if (j.contains("references"))
    p.references = j.at("references").get<std::string>();
  return p;
}

json split_to_json(const SplitPaths& p) {
  json j;
  j["systems"] = p.systems;
  if (!p.references.empty()) j["references"] = p.references;
  return j;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw format_error(std::string("bad pipeline config: ") + e.what());
  }
  PipelineConfig cfg;
  try {
    cfg.output_dir = j.at("output_dir").get<std::string>();
    cfg.tune_nn = split_from_json(j.at("splits").at("tune_nn"));
    cfg.tune_mert = split_from_json(j.at("splits").at("tune_mert"));
    cfg.test = split_from_json(j.at("splits").at("test"));
    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      if (o.contains("k")) cfg.oracle.k = o.at("k").get<std::size_t>();
    }
    if (j.contains("nn")) {
      const auto& n = j.at("nn");
      if (n.contains("hidden_size"))
        cfg.nn.hidden_size = n.at("hidden_size").get<int>();
      if (n.contains("learning_rate"))
        cfg.nn.learning_rate = n.at("learning_rate").get<double>();
      if (n.contains("epochs")) cfg.nn.epochs = n.at("epochs").get<int>();
      if (n.contains("projection_dim"))
        cfg.nn.projection_dim = n.at("projection_dim").get<int>();
      if (n.contains("history")) cfg.nn.history = n.at("history").get<int>();
      if (n.contains("seed")) cfg.nn.seed = n.at("seed").get<std::uint64_t>();
      if (n.contains("batch_size"))
        cfg.nn.batch_size = n.at("batch_size").get<int>();
    }
    if (j.contains("features") && j.at("features").contains("localvote"))
      cfg.localvote = j.at("features").at("localvote").get<bool>();
    if (j.contains("word_classes")) {
      const auto& w = j.at("word_classes");
      if (w.contains("enabled")) cfg.classes_enabled = w.at("enabled").get<bool>();
      if (w.contains("num_classes"))
        cfg.classes.num_classes = w.at("num_classes").get<int>();
      if (w.contains("iterations"))
        cfg.classes.iterations = w.at("iterations").get<int>();
      if (w.contains("seed"))
        cfg.classes.seed = w.at("seed").get<std::uint64_t>();
      if (w.contains("corpus"))
        cfg.classes_corpus = w.at("corpus").get<std::string>();
    }
    if (j.contains("mert")) {
      const auto& m = j.at("mert");
      if (m.contains("restarts")) cfg.mert.restarts = m.at("restarts").get<int>();
      if (m.contains("outer_iterations"))
        cfg.mert.outer_iterations = m.at("outer_iterations").get<int>();
      if (m.contains("nbest_size"))
        cfg.mert.nbest_size = m.at("nbest_size").get<std::size_t>();
      if (m.contains("seed")) cfg.mert.seed = m.at("seed").get<std::uint64_t>();
      if (m.contains("epsilon")) cfg.mert.epsilon = m.at("epsilon").get<double>();
    }
    if (j.contains("metric")) {
      const auto& m = j.at("metric");
      if (m.contains("max_order"))
        cfg.metric.max_order = m.at("max_order").get<int>();
      if (m.contains("lowercase"))
        cfg.metric.lowercase = m.at("lowercase").get<bool>();
    }
  } catch (const json::exception& e) {
    throw format_error(std::string("bad pipeline config: ") + e.what());
  }
  cfg.oracle.max_order = cfg.metric.max_order;
  cfg.oracle.lowercase = cfg.metric.lowercase;
  return cfg;
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  json j;
  j["output_dir"] = cfg.output_dir;
  j["splits"]["tune_nn"] = split_to_json(cfg.tune_nn);
  j["splits"]["tune_mert"] = split_to_json(cfg.tune_mert);
  j["splits"]["test"] = split_to_json(cfg.test);
  j["oracle"]["k"] = cfg.oracle.k;
  j["nn"] = {{"hidden_size", cfg.nn.hidden_size},
             {"learning_rate", cfg.nn.learning_rate},
             {"epochs", cfg.nn.epochs},
             {"projection_dim", cfg.nn.projection_dim},
             {"history", cfg.nn.history},
             {"seed", cfg.nn.seed},
             {"batch_size", cfg.nn.batch_size}};
  j["features"]["localvote"] = cfg.localvote;
  j["word_classes"] = {{"enabled", cfg.classes_enabled},
                       {"num_classes", cfg.classes.num_classes},
                       {"iterations", cfg.classes.iterations},
                       {"seed", cfg.classes.seed},
                       {"corpus", cfg.classes_corpus}};
  j["mert"] = {{"restarts", cfg.mert.restarts},
               {"outer_iterations", cfg.mert.outer_iterations},
               {"nbest_size", cfg.mert.nbest_size},
               {"seed", cfg.mert.seed},
               {"epsilon", cfg.mert.epsilon}};
  j["metric"] = {{"max_order", cfg.metric.max_order},
                 {"lowercase", cfg.metric.lowercase}};
  return j.dump(2);
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return pipeline_config_from_json(buffer.str());
}

namespace {

struct Stage {
  std::string name;

  [[noreturn]] void fail(const std::string& what, int sentence = -1) const {
    std::string msg = "stage " + name + ": " + what;
    if (sentence >= 0) msg += " (sentence " + std::to_string(sentence) + ")";
    throw std::runtime_error(msg);
  }
};

std::vector<ConfusionNetwork> build_networks(const CombinationCorpus& corpus,
                                             const MetricConfig& mcfg,
                                             const std::string& stage_name) {
  std::vector<ConfusionNetwork> networks;
  networks.reserve(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    std::vector<Sentence> hyps;
    for (const auto& sys : corpus.systems) hyps.push_back(sys.sentences[s]);
    try {
      networks.push_back(build_network(hyps, static_cast<int>(s), mcfg));
    } catch (const std::exception& e) {
      throw std::runtime_error("stage " + stage_name + ": " + e.what() +
                               " (sentence " + std::to_string(s) + ")");
    }
  }
  return networks;
}

EvalRow eval_row(const std::string& name, const std::vector<Sentence>& hyps,
                 const std::vector<Sentence>& refs, const MetricConfig& mcfg) {
  EvalRow row;
  row.name = name;
  row.bleu = corpus_bleu(hyps, refs, mcfg);
  row.ter = corpus_ter(hyps, refs, mcfg);
  row.criterion = (row.ter - row.bleu) / 2.0;
  return row;
}

std::string format_pct(double fraction) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << fraction * 100.0;
  return out.str();
}

}  // namespace

std::vector<DistributionRow> word_occurrence_distribution(
    const std::vector<std::vector<Sentence>>& systems,
    const std::vector<Sentence>& combined) {
  if (systems.empty()) throw corpus_shape_error("no systems");
  const std::size_t S = combined.size();
  for (const auto& sys : systems)
    if (sys.size() != S)
      throw corpus_shape_error("system/combined sentence count mismatch");
  const int num = static_cast<int>(systems.size());
  std::vector<DistributionRow> rows(num);
  for (int c = 0; c < num; ++c) rows[c].support = c + 1;
  for (std::size_t s = 0; s < S; ++s) {
    std::map<std::string, int> support;
    for (const auto& sys : systems) {
      std::set<std::string> types(sys[s].begin(), sys[s].end());
      for (const auto& w : types) ++support[w];
    }
    std::set<std::string> out_types(combined[s].begin(), combined[s].end());
    for (const auto& [w, c] : support) {
      rows[c - 1].total += 1;
      if (out_types.count(w)) rows[c - 1].in_output += 1;
    }
  }
  for (auto& row : rows)
    row.percent = row.total > 0 ? 100.0 * static_cast<double>(row.in_output) /
                                      static_cast<double>(row.total)
                                : 0.0;
  return rows;
}

std::string format_distribution(const std::vector<DistributionRow>& rows) {
  std::ostringstream out;
  out << "# support  in-output/total  (percent)\n";
  for (const auto& r : rows) {
    out << std::setw(9) << r.support << "  " << r.in_output << "/" << r.total
        << " (" << std::fixed << std::setprecision(1) << r.percent << "%)\n";
  }
  return out.str();
}

namespace {

void validate_splits(const PipelineConfig& cfg) {
  const SplitPaths* splits[] = {&cfg.tune_nn, &cfg.tune_mert, &cfg.test};
  const char* names[] = {"tune_nn", "tune_mert", "test"};
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      bool same_refs = !splits[a]->references.empty() &&
                       splits[a]->references == splits[b]->references;
      if (same_refs || splits[a]->systems == splits[b]->systems)
        throw config_error(std::string("splits ") + names[a] + " and " +
                           names[b] + " must be distinct");
    }
  }
}

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& cfg) {
  validate_splits(cfg);
  PipelineReport report;
  fs::create_directories(cfg.output_dir);
  auto path = [&cfg](const std::string& name) {
    return (fs::path(cfg.output_dir) / name).string();
  };
  auto stage = [](const std::string& name, auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw std::runtime_error("stage " + name + ": " + e.what());
    }
  };
  {
    std::ofstream snap(path("config.json"));
    snap << pipeline_config_to_json(cfg) << '\n';
  }

  std::optional<LocalVoteScorer> scorer;
  if (cfg.localvote) {
    // -- tune (NN): networks, oracle decisions, training examples --
    CombinationCorpus tune_nn =
        load_corpus(cfg.tune_nn.systems, cfg.tune_nn.references);
    if (!tune_nn.references)
      throw config_error("tune_nn split needs references");
    auto networks = build_networks(tune_nn, cfg.metric, "build(tune_nn)");
    write_networks(networks, path("networks_tune_nn.jsonl"));

    OracleCorpusResult oracle = stage("oracle(tune_nn)", [&] {
      return oracle_corpus(networks, *tune_nn.references, cfg.oracle);
    });
    write_sentences(oracle.sentences, path("oracle_tune_nn.txt"));
    std::vector<int> indices;
    for (const auto& cn : networks) indices.push_back(cn.sentence_index);
    write_decisions(oracle.paths, indices, path("oracle_decisions.jsonl"));
    report.rows.push_back({"oracle(tune_nn)", oracle.bleu, oracle.ter_score,
                           oracle.criterion});

    std::vector<WordExample> examples;
    for (std::size_t s = 0; s < networks.size(); ++s) {
      auto ex = extract_examples(networks[s], oracle.paths[s], cfg.nn.history);
      examples.insert(examples.end(), ex.begin(), ex.end());
    }
    if (examples.empty())
      throw std::runtime_error("stage extract: no training examples");
    write_examples(examples, path("examples.txt"));

    // -- optional word classes --
    std::optional<ClassMap> classes;
    if (cfg.classes_enabled) {
      std::string corpus_path = cfg.classes_corpus.empty()
                                    ? cfg.tune_nn.references
                                    : cfg.classes_corpus;
      auto class_corpus = load_sentence_file(corpus_path);
      classes = train_classes(class_corpus, cfg.classes);
      write_class_map(*classes, path("classes.tsv"));
    }

    std::vector<WordExample> train_set = examples;
    if (classes) {
      for (auto& ex : train_set) {
        for (auto& w : ex.context) w = apply_class(w, *classes);
        ex.target = apply_class(ex.target, *classes);
      }
    }

    TrainReport train_report;
    FeedForwardNet net = stage("nn-train", [&] {
      return train(train_set, cfg.nn, tune_nn.num_systems(), &train_report);
    });
    save_model(net, path("model.json"), classes);
    {
      std::ofstream loss(path("nn_loss.csv"));
      loss << "epoch,loss\n" << std::setprecision(17);
      for (std::size_t e = 0; e < train_report.epoch_loss.size(); ++e)
        loss << e + 1 << ',' << train_report.epoch_loss[e] << '\n';
    }
    scorer = LocalVoteScorer{std::move(net), classes};
  }

  // -- tune (MERT) --
  CombinationCorpus tune_mert =
      load_corpus(cfg.tune_mert.systems, cfg.tune_mert.references);
  if (!tune_mert.references)
    throw config_error("tune_mert split needs references");
  auto networks_mert = build_networks(tune_mert, cfg.metric, "build(tune_mert)");
  write_networks(networks_mert, path("networks_tune_mert.jsonl"));
  TrigramLM lm_mert = TrigramLM::train(tune_mert);

  Weights base_init = make_weights(tune_mert.num_systems(), false);
  TuneLoopResult base_tuned = stage("tune(baseline)", [&] {
    return tune_loop(networks_mert, *tune_mert.references, lm_mert, nullptr,
                     base_init, cfg.mert, cfg.metric);
  });
  write_weights(base_tuned.weights, path("weights_baseline.tsv"));
  report.baseline_tune_criteria = base_tuned.criteria;
  {
    DecodeResult d = decode_corpus(networks_mert, base_tuned.weights, lm_mert,
                                   nullptr, 1);
    report.rows.push_back(eval_row("tune_mert baseline", d.onebest,
                                   *tune_mert.references, cfg.metric));
  }

  TuneLoopResult lv_tuned;
  if (cfg.localvote) {
    Weights lv_init = make_weights(tune_mert.num_systems(), true);
    lv_tuned = stage("tune(+localVote)", [&] {
      return tune_loop(networks_mert, *tune_mert.references, lm_mert, &*scorer,
                       lv_init, cfg.mert, cfg.metric);
    });
    write_weights(lv_tuned.weights, path("weights_localvote.tsv"));
    report.localvote_tune_criteria = lv_tuned.criteria;
    DecodeResult d = decode_corpus(networks_mert, lv_tuned.weights, lm_mert,
                                   &*scorer, 1);
    report.rows.push_back(eval_row("tune_mert +localVote", d.onebest,
                                   *tune_mert.references, cfg.metric));
  }

  // -- test --
  CombinationCorpus test = load_corpus(cfg.test.systems, cfg.test.references);
  auto networks_test = build_networks(test, cfg.metric, "build(test)");
  write_networks(networks_test, path("networks_test.jsonl"));
  TrigramLM lm_test = TrigramLM::train(test);

  DecodeResult test_base = stage("decode(test baseline)", [&] {
    return decode_corpus(networks_test, base_tuned.weights, lm_test, nullptr,
                         1);
  });
  write_sentences(test_base.onebest, path("output_test_baseline.txt"));
  std::vector<std::vector<Sentence>> test_systems;
  for (const auto& sys : test.systems) test_systems.push_back(sys.sentences);
  report.baseline_distribution =
      word_occurrence_distribution(test_systems, test_base.onebest);

  DecodeResult test_lv;
  if (cfg.localvote) {
    test_lv = stage("decode(test +localVote)", [&] {
      return decode_corpus(networks_test, lv_tuned.weights, lm_test, &*scorer,
                           1);
    });
    write_sentences(test_lv.onebest, path("output_test_localvote.txt"));
    report.localvote_distribution =
        word_occurrence_distribution(test_systems, test_lv.onebest);
  }

  if (test.references) {
    for (int i = 0; i < test.num_systems(); ++i)
      report.rows.push_back(eval_row("test system " + std::to_string(i),
                                     test.systems[i].sentences,
                                     *test.references, cfg.metric));
    report.rows.push_back(eval_row("test baseline", test_base.onebest,
                                   *test.references, cfg.metric));
    if (cfg.localvote)
      report.rows.push_back(eval_row("test +localVote", test_lv.onebest,
                                     *test.references, cfg.metric));
  }

  // -- report --
  {
    std::ofstream txt(path("report.txt"));
    txt << "setup                     BLEU%   TER%    (TER-BLEU)/2%\n";
    for (const auto& r : report.rows) {
      txt << std::left << std::setw(25) << r.name << ' ' << std::right
          << std::setw(6) << format_pct(r.bleu) << ' ' << std::setw(6)
          << format_pct(r.ter) << ' ' << std::setw(8)
          << format_pct(r.criterion) << '\n';
    }
    txt << '\n';
    txt << "word occurrence distribution (test, baseline)\n"
        << format_distribution(report.baseline_distribution);
    if (cfg.localvote)
      txt << "\nword occurrence distribution (test, +localVote)\n"
          << format_distribution(report.localvote_distribution);
  }
  {
    std::ofstream csv(path("report.csv"));
    csv << "name,bleu,ter,criterion\n" << std::setprecision(17);
    for (const auto& r : report.rows)
      csv << r.name << ',' << r.bleu << ',' << r.ter << ',' << r.criterion
          << '\n';
  }
  return report;
}

std::vector<SweepRow> sweep(const PipelineConfig& cfg, SweepAxis axis,
                            const std::vector<double>& values) {
  if (values.empty()) throw config_error("empty sweep value list");
  std::vector<SweepRow> rows;
  if (axis == SweepAxis::KBest) {
    CombinationCorpus tune_nn =
        load_corpus(cfg.tune_nn.systems, cfg.tune_nn.references);
    if (!tune_nn.references)
      throw config_error("tune_nn split needs references");
    auto networks = build_networks(tune_nn, cfg.metric, "build(tune_nn)");
    for (double v : values) {
      if (v < 1.0) throw config_error("k must be at least 1");
      OracleConfig ocfg = cfg.oracle;
      ocfg.k = static_cast<std::size_t>(v);
      OracleCorpusResult res =
          oracle_corpus(networks, *tune_nn.references, ocfg);
      rows.push_back({v, res.criterion});
    }
  } else {
    for (double v : values) {
      PipelineConfig sub = cfg;
      sub.localvote = true;
      sub.classes_enabled = true;
      sub.classes.num_classes = static_cast<int>(v);
      sub.output_dir = (fs::path(cfg.output_dir) /
                        ("classes_" + std::to_string(static_cast<int>(v))))
                           .string();
      PipelineReport rep = run_pipeline(sub);
      double crit = rep.localvote_tune_criteria.empty()
                        ? 0.0
                        : rep.localvote_tune_criteria.back();
      rows.push_back({v, crit});
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << "value,criterion\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.value << ',' << r.criterion << '\n';
}

}  // namespace syscomb
