#include <CLI11.hpp>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

#include "syscomb/corpus.hpp"
#include "syscomb/decode.hpp"
#include "syscomb/metrics.hpp"
#include "syscomb/nnvote.hpp"
#include "syscomb/oracle.hpp"
#include "syscomb/pipeline.hpp"
#include "syscomb/synth.hpp"
#include "syscomb/tune.hpp"
#include "syscomb/wordclass.hpp"

using namespace syscomb;

namespace {

std::vector<ConfusionNetwork> networks_for(const CombinationCorpus& corpus,
                                           const std::string& networks_path,
                                           const MetricConfig& mcfg) {
  if (!networks_path.empty()) return read_networks(networks_path);
  std::vector<ConfusionNetwork> networks;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    std::vector<Sentence> hyps;
    for (const auto& sys : corpus.systems) hyps.push_back(sys.sentences[s]);
    networks.push_back(build_network(hyps, static_cast<int>(s), mcfg));
  }
  return networks;
}

void print_eval(const std::vector<Sentence>& hyps,
                const std::vector<Sentence>& refs) {
  double bleu = corpus_bleu(hyps, refs);
  double t = corpus_ter(hyps, refs);
  std::cout << std::fixed << std::setprecision(2);
  std::cout << "BLEU " << bleu * 100.0 << '\n';
  std::cout << "TER " << t * 100.0 << '\n';
  std::cout << "(TER-BLEU)/2 " << (t - bleu) / 2.0 * 100.0 << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confusion-network system combination with a neural local "
               "voting feature"};
  app.require_subcommand(1);

  // ---- combine ----
  auto* combine = app.add_subcommand(
      "combine", "Build confusion networks and decode a combined output");
  std::vector<std::string> c_systems;
  std::string c_refs, c_output, c_dump_cn, c_weights, c_model, c_nbest_out;
  std::size_t c_nbest = 1;
  combine->add_option("--systems", c_systems, "System output files")
      ->required()
      ->expected(-2);
  combine->add_option("--refs", c_refs, "Reference file (for evaluation)");
  combine->add_option("--output", c_output, "Combined 1-best output file")
      ->required();
  combine->add_option("--dump-cn", c_dump_cn, "Dump networks as JSON lines");
  combine->add_option("--weights", c_weights, "Weights file (default uniform)");
  combine->add_option("--model", c_model, "localVote model file");
  combine->add_option("--nbest", c_nbest, "n-best size to emit");
  combine->add_option("--nbest-out", c_nbest_out, "n-best output file");

  // ---- oracle ----
  auto* oracle_cmd = app.add_subcommand(
      "oracle", "Extract best-sBLEU paths and arc decisions");
  std::vector<std::string> o_systems;
  std::string o_refs, o_networks, o_output, o_decisions;
  std::size_t o_k = 1200;
  oracle_cmd->add_option("--systems", o_systems, "System output files")
      ->expected(-2);
  oracle_cmd->add_option("--refs", o_refs, "Reference file")->required();
  oracle_cmd->add_option("--networks", o_networks,
                         "Use dumped networks instead of rebuilding");
  oracle_cmd->add_option("--output", o_output, "Oracle sentences file")
      ->required();
  oracle_cmd->add_option("--decisions", o_decisions, "Arc decision file");
  oracle_cmd->add_option("--k", o_k, "Beam size per node");
  std::string o_weights;
  oracle_cmd->add_option("--weights", o_weights,
                         "Baseline weights for the model-score tie-break");

  // ---- extract ----
  auto* extract_cmd = app.add_subcommand(
      "extract", "Turn oracle arc decisions into NN training examples");
  std::vector<std::string> x_systems;
  std::string x_networks, x_decisions, x_output;
  int x_history = 1;
  extract_cmd->add_option("--systems", x_systems, "System output files")
      ->expected(-2);
  extract_cmd->add_option("--networks", x_networks, "Dumped networks file");
  extract_cmd->add_option("--decisions", x_decisions, "Arc decision file")
      ->required();
  extract_cmd->add_option("--history", x_history, "1 (unigram) or 2 (bigram)");
  extract_cmd->add_option("--output", x_output, "Examples file")->required();

  // ---- classes ----
  auto* classes_cmd =
      app.add_subcommand("classes", "Train exchange word classes");
  std::string cl_corpus, cl_output;
  int cl_num = 1000, cl_iters = 10;
  std::uint64_t cl_seed = 0;
  classes_cmd->add_option("--corpus", cl_corpus, "Monolingual text file")
      ->required();
  classes_cmd->add_option("--num-classes", cl_num, "Number of classes");
  classes_cmd->add_option("--iterations", cl_iters, "Exchange iterations");
  classes_cmd->add_option("--seed", cl_seed, "Seed");
  classes_cmd->add_option("--output", cl_output, "Class map file")->required();

  // ---- nn-train ----
  auto* nn_cmd = app.add_subcommand("nn-train", "Train the localVote network");
  std::string n_examples, n_classes, n_output;
  NNConfig n_cfg;
  nn_cmd->add_option("--examples", n_examples, "Examples file")->required();
  nn_cmd->add_option("--classes", n_classes, "Optional class map file");
  nn_cmd->add_option("--hidden", n_cfg.hidden_size, "Hidden layer size");
  nn_cmd->add_option("--learning-rate", n_cfg.learning_rate, "Learning rate");
  nn_cmd->add_option("--epochs", n_cfg.epochs, "Training epochs");
  nn_cmd->add_option("--projection", n_cfg.projection_dim, "Projection size");
  nn_cmd->add_option("--history", n_cfg.history, "1 or 2");
  nn_cmd->add_option("--seed", n_cfg.seed, "Seed");
  nn_cmd->add_option("--batch", n_cfg.batch_size, "Minibatch size");
  nn_cmd->add_option("--output", n_output, "Model file")->required();

  // ---- tune ----
  auto* tune_cmd = app.add_subcommand(
      "tune", "MERT over decode/re-tune iterations; writes weights");
  std::vector<std::string> t_systems;
  std::string t_refs, t_model, t_output, t_networks;
  MERTConfig t_cfg;
  tune_cmd->add_option("--systems", t_systems, "System output files")
      ->expected(-2);
  tune_cmd->add_option("--refs", t_refs, "Reference file")->required();
  tune_cmd->add_option("--networks", t_networks, "Dumped networks file");
  tune_cmd->add_option("--model", t_model, "localVote model (enables feature)");
  tune_cmd->add_option("--restarts", t_cfg.restarts, "MERT restarts");
  tune_cmd->add_option("--outer-iterations", t_cfg.outer_iterations,
                       "Decode/tune iterations");
  tune_cmd->add_option("--nbest", t_cfg.nbest_size, "n-best size");
  tune_cmd->add_option("--seed", t_cfg.seed, "Seed");
  tune_cmd->add_option("--output", t_output, "Weights file")->required();

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "Score hypotheses");
  std::string e_hyp, e_refs, e_hyp_b;
  int e_samples = 1000;
  std::uint64_t e_seed = 1;
  eval_cmd->add_option("--hyp", e_hyp, "Hypothesis file")->required();
  eval_cmd->add_option("--refs", e_refs, "Reference file")->required();
  eval_cmd->add_option("--hyp-b", e_hyp_b,
                       "Second hypothesis file for bootstrap comparison");
  eval_cmd->add_option("--samples", e_samples, "Bootstrap resamples");
  eval_cmd->add_option("--seed", e_seed, "Bootstrap seed");

  // ---- analyze ----
  auto* analyze_cmd = app.add_subcommand(
      "analyze", "Word occurrence distribution of a combined output");
  std::vector<std::string> a_systems;
  std::string a_combined, a_csv;
  analyze_cmd->add_option("--systems", a_systems, "System output files")
      ->required()
      ->expected(-2);
  analyze_cmd->add_option("--combined", a_combined, "Combined output file")
      ->required();
  analyze_cmd->add_option("--csv", a_csv, "Optional CSV output");

  // ---- sweep ----
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Sweep oracle k or word-class size; writes CSV");
  std::string s_config, s_axis = "k", s_output;
  std::vector<double> s_values;
  sweep_cmd->add_option("--config", s_config, "Pipeline config")->required();
  sweep_cmd->add_option("--axis", s_axis, "k or class-size");
  sweep_cmd->add_option("--values", s_values, "Axis values")
      ->required()
      ->expected(-1);
  sweep_cmd->add_option("--output", s_output, "CSV file")->required();

  // ---- pipeline ----
  auto* pipeline_cmd =
      app.add_subcommand("pipeline", "Run the full experimental protocol");
  std::string p_config;
  pipeline_cmd->add_option("--config", p_config, "Pipeline config")->required();

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand(
      "synth", "Generate noisy synthetic system outputs from references");
  std::string sy_refs, sy_prefix, sy_labels;
  int sy_systems = 4;
  NoiseSpec sy_spec;
  synth_cmd->add_option("--refs", sy_refs, "Reference file")->required();
  synth_cmd->add_option("--output-prefix", sy_prefix,
                        "Prefix for system files (prefix<i>.txt)")
      ->required();
  synth_cmd->add_option("--systems", sy_systems, "Number of systems");
  synth_cmd->add_option("--sub-rate", sy_spec.substitution_rate,
                        "Substitution rate");
  synth_cmd->add_option("--del-rate", sy_spec.deletion_rate, "Deletion rate");
  synth_cmd->add_option("--ins-rate", sy_spec.insertion_rate,
                        "Insertion rate");
  synth_cmd->add_option("--planted-rate", sy_spec.planted_minority_rate,
                        "Planted minority rate");
  synth_cmd->add_option("--seed", sy_spec.seed, "Seed");
  synth_cmd->add_option("--labels", sy_labels, "Planted label file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*combine) {
      CombinationCorpus corpus = load_corpus(c_systems, c_refs);
      MetricConfig mcfg;
      auto networks = networks_for(corpus, "", mcfg);
      if (!c_dump_cn.empty()) write_networks(networks, c_dump_cn);
      TrigramLM lm = TrigramLM::train(corpus);
      std::optional<LocalVoteScorer> scorer;
      if (!c_model.empty()) {
        LoadedModel m = load_model(c_model);
        scorer = LocalVoteScorer{std::move(m.net), std::move(m.classes)};
      }
      Weights weights = c_weights.empty()
                            ? make_weights(corpus.num_systems(),
                                           scorer.has_value())
                            : read_weights(c_weights);
      DecodeResult dec =
          decode_corpus(networks, weights, lm, scorer ? &*scorer : nullptr,
                        std::max<std::size_t>(c_nbest, 1));
      write_sentences(dec.onebest, c_output);
      if (!c_nbest_out.empty()) write_nbest(dec.nbest, c_nbest_out);
      if (corpus.references) print_eval(dec.onebest, *corpus.references);
    } else if (*oracle_cmd) {
      if (o_systems.empty() && o_networks.empty())
        throw config_error("oracle needs --systems or --networks");
      std::vector<ConfusionNetwork> networks;
      std::vector<Sentence> refs = load_sentence_file(o_refs);
      if (!o_networks.empty()) {
        networks = read_networks(o_networks);
      } else {
        CombinationCorpus corpus = load_corpus(o_systems, o_refs);
        networks = networks_for(corpus, "", MetricConfig{});
      }
      OracleConfig cfg;
      cfg.k = o_k;
      OracleModelHookFactory hooks;
      std::optional<Weights> tiebreak;
      std::optional<TrigramLM> oracle_lm;
      if (!o_weights.empty()) {
        tiebreak = read_weights(o_weights);
        std::vector<std::vector<Sentence>> rows;
        for (const auto& cn : networks) {
          for (int i = 0; i < cn.num_systems; ++i) {
            if (static_cast<int>(rows.size()) <= i) rows.resize(i + 1);
            rows[i].push_back(cn.system_path(i));
          }
        }
        oracle_lm = TrigramLM::train(rows);
        cfg.use_model_tiebreak = true;
        hooks = [&](const ConfusionNetwork& cn) {
          return make_oracle_model_hook(cn, *tiebreak, *oracle_lm);
        };
      }
      OracleCorpusResult res = oracle_corpus(networks, refs, cfg, true, hooks);
      write_sentences(res.sentences, o_output);
      if (!o_decisions.empty()) {
        std::vector<int> indices;
        for (const auto& cn : networks) indices.push_back(cn.sentence_index);
        write_decisions(res.paths, indices, o_decisions);
      }
      print_eval(res.sentences, refs);
    } else if (*extract_cmd) {
      if (x_systems.empty() && x_networks.empty())
        throw config_error("extract needs --systems or --networks");
      std::vector<ConfusionNetwork> networks;
      if (!x_networks.empty()) {
        networks = read_networks(x_networks);
      } else {
        CombinationCorpus corpus = load_corpus(x_systems);
        networks = networks_for(corpus, "", MetricConfig{});
      }
      auto decisions = read_decisions(x_decisions);
      if (decisions.size() != networks.size())
        throw corpus_shape_error("decision/network count mismatch");
      std::vector<WordExample> examples;
      for (std::size_t s = 0; s < networks.size(); ++s) {
        auto ex = extract_examples(networks[s], decisions[s].second, x_history);
        examples.insert(examples.end(), ex.begin(), ex.end());
      }
      write_examples(examples, x_output);
      std::cerr << examples.size() << " training examples\n";
    } else if (*classes_cmd) {
      auto corpus = load_sentence_file(cl_corpus);
      ClusterConfig cfg{cl_num, cl_iters, cl_seed};
      ClassMap map = train_classes(corpus, cfg);
      write_class_map(map, cl_output);
    } else if (*nn_cmd) {
      auto examples = read_examples(n_examples);
      if (examples.empty()) throw std::domain_error("no training examples");
      std::optional<ClassMap> classes;
      if (!n_classes.empty()) {
        classes = read_class_map(n_classes);
        for (auto& ex : examples) {
          for (auto& w : ex.context) w = apply_class(w, *classes);
          ex.target = apply_class(ex.target, *classes);
        }
      }
      const int ctx = static_cast<int>(examples.front().context.size());
      if (ctx % n_cfg.history != 0)
        throw config_error("context size not divisible by history");
      TrainReport report;
      FeedForwardNet net =
          train(examples, n_cfg, ctx / n_cfg.history, &report);
      save_model(net, n_output, classes);
      for (std::size_t e = 0; e < report.epoch_loss.size(); ++e)
        std::cerr << "epoch " << e + 1 << " loss " << report.epoch_loss[e]
                  << '\n';
    } else if (*tune_cmd) {
      if (t_systems.empty() && t_networks.empty())
        throw config_error("tune needs --systems or --networks");
      std::vector<Sentence> refs = load_sentence_file(t_refs);
      std::vector<ConfusionNetwork> networks;
      if (!t_networks.empty())
        networks = read_networks(t_networks);
      else
        networks = networks_for(load_corpus(t_systems, t_refs), "",
                                MetricConfig{});
      std::vector<std::vector<Sentence>> rows;
      for (const auto& cn : networks) {
        for (int i = 0; i < cn.num_systems; ++i) {
          if (static_cast<int>(rows.size()) <= i) rows.resize(i + 1);
          rows[i].push_back(cn.system_path(i));
        }
      }
      TrigramLM lm = TrigramLM::train(rows);
      std::optional<LocalVoteScorer> scorer;
      if (!t_model.empty()) {
        LoadedModel m = load_model(t_model);
        scorer = LocalVoteScorer{std::move(m.net), std::move(m.classes)};
      }
      int num = networks.empty() ? 0 : networks.front().num_systems;
      Weights init = make_weights(num, scorer.has_value());
      TuneLoopResult res = tune_loop(networks, refs, lm,
                                     scorer ? &*scorer : nullptr, init, t_cfg);
      write_weights(res.weights, t_output);
      for (std::size_t i = 0; i < res.criteria.size(); ++i)
        std::cerr << "iteration " << i + 1 << " criterion " << res.criteria[i]
                  << '\n';
    } else if (*eval_cmd) {
      auto hyps = load_sentence_file(e_hyp);
      auto refs = load_sentence_file(e_refs);
      print_eval(hyps, refs);
      if (!e_hyp_b.empty()) {
        auto hyps_b = load_sentence_file(e_hyp_b);
        double frac =
            bootstrap_significance(hyps, hyps_b, refs, e_samples, e_seed);
        std::cout << std::fixed << std::setprecision(3)
                  << "bootstrap P(A beats B on BLEU) " << frac << '\n';
        if (frac >= 0.99)
          std::cout << "significant at 99%\n";
        else if (frac >= 0.95)
          std::cout << "significant at 95%\n";
        else
          std::cout << "not significant at 95%\n";
      }
    } else if (*analyze_cmd) {
      std::vector<std::vector<Sentence>> systems;
      for (const auto& p : a_systems) systems.push_back(load_sentence_file(p));
      auto combined = load_sentence_file(a_combined);
      auto rows = word_occurrence_distribution(systems, combined);
      std::cout << format_distribution(rows);
      if (!a_csv.empty()) {
        std::ofstream out(a_csv);
        if (!out) throw io_error("cannot write " + a_csv);
        out << "support,in_output,total,percent\n";
        for (const auto& r : rows)
          out << r.support << ',' << r.in_output << ',' << r.total << ','
              << std::fixed << std::setprecision(1) << r.percent << '\n';
      }
    } else if (*sweep_cmd) {
      PipelineConfig cfg = load_pipeline_config(s_config);
      SweepAxis axis;
      if (s_axis == "k")
        axis = SweepAxis::KBest;
      else if (s_axis == "class-size")
        axis = SweepAxis::ClassSize;
      else
        throw config_error("axis must be k or class-size");
      auto rows = sweep(cfg, axis, s_values);
      write_sweep_csv(rows, s_output);
    } else if (*pipeline_cmd) {
      PipelineConfig cfg = load_pipeline_config(p_config);
      PipelineReport report = run_pipeline(cfg);
      for (const auto& r : report.rows)
        std::cout << r.name << ": BLEU " << std::fixed << std::setprecision(2)
                  << r.bleu * 100.0 << " TER " << r.ter * 100.0
                  << " (TER-BLEU)/2 " << r.criterion * 100.0 << '\n';
    } else if (*synth_cmd) {
      auto refs = load_sentence_file(sy_refs);
      SynthResult res = generate_systems(refs, sy_spec, sy_systems);
      for (int i = 0; i < sy_systems; ++i)
        write_sentences(res.corpus.systems[i].sentences,
                        sy_prefix + std::to_string(i) + ".txt");
      if (!sy_labels.empty()) write_labels(res.labels, sy_labels);
      std::cerr << res.labels.size() << " planted positions\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
