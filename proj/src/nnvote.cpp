#include "syscomb/nnvote.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "syscomb/corpus.hpp"

namespace syscomb {

using json = nlohmann::json;

Vocabulary::Vocabulary() {
  words = {kSentStart, kEpsilon, kUnkToken};
  for (std::size_t i = 0; i < words.size(); ++i)
    index.emplace(words[i], static_cast<int>(i));
}

void Vocabulary::insert(const std::string& word) {
  if (index.emplace(word, static_cast<int>(words.size())).second)
    words.push_back(word);
}

int Vocabulary::lookup(const std::string& word) const {
  auto it = index.find(word);
  return it == index.end() ? kUnknownId : it->second;
}

std::vector<WordExample> extract_examples(
    const ConfusionNetwork& cn, const std::vector<std::string>& decisions,
    int history) {
  if (history != 1 && history != 2)
    throw config_error("history must be 1 or 2");
  if (decisions.size() != cn.slots.size())
    throw validation_error(
        "decision count " + std::to_string(decisions.size()) +
        " does not match slot count " + std::to_string(cn.slots.size()));
  const int num = cn.num_systems;
  std::vector<std::string> previous(num, kSentStart);
  std::vector<WordExample> examples;
  for (std::size_t t = 0; t < cn.slots.size(); ++t) {
    const Slot& slot = cn.slots[t];
    const std::string& decision = decisions[t];
    if (!is_epsilon(decision) && decision != kUnkWord) {
      WordExample ex;
      for (int i = 0; i < num; ++i) {
        if (history == 2) ex.context.push_back(previous[i]);
        ex.context.push_back(is_epsilon(slot.words[i]) ? kEpsilon
                                                       : slot.words[i]);
      }
      ex.target = decision;
      examples.push_back(std::move(ex));
    }
    for (int i = 0; i < num; ++i)
      if (!is_epsilon(slot.words[i])) previous[i] = slot.words[i];
  }
  return examples;
}

std::vector<WordExample> extract_examples(const ConfusionNetwork& cn,
                                          const OraclePath& oracle_path,
                                          int history) {
  std::vector<std::string> decisions;
  decisions.reserve(oracle_path.decisions.size());
  for (const auto& d : oracle_path.decisions) decisions.push_back(d.word);
  return extract_examples(cn, decisions, history);
}

Vocabulary build_vocab(const std::vector<WordExample>& examples) {
  std::set<std::string> seen;
  for (const auto& ex : examples) {
    for (const auto& w : ex.context)
      if (!is_reserved_token(w)) seen.insert(w);
    if (!is_reserved_token(ex.target)) seen.insert(ex.target);
  }
  Vocabulary vocab;
  for (const auto& w : seen) vocab.insert(w);
  return vocab;
}

std::vector<TrainingExample> encode_examples(
    const std::vector<WordExample>& examples, const Vocabulary& vocab) {
  std::vector<TrainingExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    TrainingExample enc;
    enc.context.reserve(ex.context.size());
    for (const auto& w : ex.context) enc.context.push_back(vocab.lookup(w));
    enc.target = vocab.lookup(ex.target);
    out.push_back(std::move(enc));
  }
  return out;
}

Eigen::VectorXd FeedForwardNet::forward(const std::vector<int>& context) const {
  const int m = context_size();
  if (static_cast<int>(context.size()) != m)
    throw config_error("context size " + std::to_string(context.size()) +
                       ", expected " + std::to_string(m));
  const int p = config.projection_dim;
  Eigen::VectorXd x(m * p);
  for (int i = 0; i < m; ++i)
    x.segment(i * p, p) = projection.row(context[i]).transpose();
  Eigen::VectorXd hidden =
      (w_hidden.transpose() * x + b_hidden).cwiseMax(0.0);
  Eigen::VectorXd logits = w_output.transpose() * hidden + b_output;
  Eigen::VectorXd probs = (logits.array() - logits.maxCoeff()).exp();
  probs /= probs.sum();
  return probs;
}

namespace {

// Deterministic draws; the standard distributions are implementation
// defined, these are not.
double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

void fill_uniform(Eigen::MatrixXd& m, std::mt19937_64& rng, double range) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = (uniform_unit(rng) * 2.0 - 1.0) * range;
}

void fill_uniform(Eigen::VectorXd& v, std::mt19937_64& rng, double range) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = (uniform_unit(rng) * 2.0 - 1.0) * range;
}

void shuffle_indices(std::vector<int>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng() % i]);
}

}  // namespace

double loss_and_gradients(const FeedForwardNet& net,
                          const std::vector<TrainingExample>& batch,
                          Gradients* grads) {
  if (batch.empty()) throw std::domain_error("empty batch");
  const int m = net.context_size();
  const int p = net.config.projection_dim;
  const int v = net.vocab.size();
  const int b = static_cast<int>(batch.size());

  Eigen::MatrixXd x(b, m * p);
  for (int r = 0; r < b; ++r) {
    const auto& ctx = batch[r].context;
    if (static_cast<int>(ctx.size()) != m)
      throw config_error("context size " + std::to_string(ctx.size()) +
                         ", expected " + std::to_string(m));
    for (int i = 0; i < m; ++i)
      x.block(r, i * p, 1, p) = net.projection.row(ctx[i]);
  }
  Eigen::MatrixXd pre = (x * net.w_hidden).rowwise() + net.b_hidden.transpose();
  Eigen::MatrixXd hid = pre.cwiseMax(0.0);
  Eigen::MatrixXd logits =
      (hid * net.w_output).rowwise() + net.b_output.transpose();
  Eigen::MatrixXd probs(b, v);
  double loss = 0.0;
  for (int r = 0; r < b; ++r) {
    Eigen::ArrayXd row = logits.row(r).array();
    row -= row.maxCoeff();
    Eigen::ArrayXd e = row.exp();
    probs.row(r) = (e / e.sum()).matrix();
    loss -= std::log(probs(r, batch[r].target));
  }
  loss /= static_cast<double>(b);
  if (!grads) return loss;

  Eigen::MatrixXd dlogits = probs;
  for (int r = 0; r < b; ++r) dlogits(r, batch[r].target) -= 1.0;
  dlogits /= static_cast<double>(b);

  grads->w_output = hid.transpose() * dlogits;
  grads->b_output = dlogits.colwise().sum().transpose();
  Eigen::MatrixXd dhid = dlogits * net.w_output.transpose();
  dhid = (pre.array() > 0.0).select(dhid, 0.0);
  grads->w_hidden = x.transpose() * dhid;
  grads->b_hidden = dhid.colwise().sum().transpose();
  Eigen::MatrixXd dx = dhid * net.w_hidden.transpose();
  grads->projection = Eigen::MatrixXd::Zero(v, p);
  for (int r = 0; r < b; ++r) {
    const auto& ctx = batch[r].context;
    for (int i = 0; i < m; ++i)
      grads->projection.row(ctx[i]) += dx.block(r, i * p, 1, p);
  }
  return loss;
}

FeedForwardNet train(const std::vector<WordExample>& examples,
                     const NNConfig& cfg, int num_systems,
                     TrainReport* report) {
  if (examples.empty()) throw std::domain_error("no training examples");
  if (cfg.history != 1 && cfg.history != 2)
    throw config_error("history must be 1 or 2");
  const int m = cfg.history * num_systems;
  for (const auto& ex : examples)
    if (static_cast<int>(ex.context.size()) != m)
      throw validation_error("example context size " +
                             std::to_string(ex.context.size()) +
                             ", expected " + std::to_string(m));

  FeedForwardNet net;
  net.config = cfg;
  net.num_systems = num_systems;
  net.vocab = build_vocab(examples);
  const int v = net.vocab.size();
  const int p = cfg.projection_dim;
  const int h = cfg.hidden_size;

  std::mt19937_64 rng(cfg.seed);
  net.projection.resize(v, p);
  net.w_hidden.resize(m * p, h);
  net.b_hidden.resize(h);
  net.w_output.resize(h, v);
  net.b_output.resize(v);
  fill_uniform(net.projection, rng, 0.05);
  fill_uniform(net.w_hidden, rng, 0.05);
  fill_uniform(net.b_hidden, rng, 0.05);
  fill_uniform(net.w_output, rng, 0.05);
  fill_uniform(net.b_output, rng, 0.05);

  auto data = encode_examples(examples, net.vocab);
  std::vector<int> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);

  const int batch_size = std::max(1, cfg.batch_size);
  std::vector<TrainingExample> batch;
  Gradients grads;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(idx, rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < idx.size(); begin += batch_size) {
      const std::size_t end = std::min(idx.size(), begin + batch_size);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(data[idx[i]]);
      double loss = loss_and_gradients(net, batch, &grads);
      loss_sum += loss * static_cast<double>(batch.size());
      net.projection -= cfg.learning_rate * grads.projection;
      net.w_hidden -= cfg.learning_rate * grads.w_hidden;
      net.b_hidden -= cfg.learning_rate * grads.b_hidden;
      net.w_output -= cfg.learning_rate * grads.w_output;
      net.b_output -= cfg.learning_rate * grads.b_output;
    }
    if (report)
      report->epoch_loss.push_back(loss_sum /
                                   static_cast<double>(data.size()));
  }
  return net;
}

double training_accuracy(const FeedForwardNet& net,
                         const std::vector<WordExample>& examples) {
  if (examples.empty()) return 0.0;
  auto data = encode_examples(examples, net.vocab);
  int correct = 0;
  for (const auto& ex : data) {
    Eigen::VectorXd probs = net.forward(ex.context);
    Eigen::Index argmax;
    probs.maxCoeff(&argmax);
    if (static_cast<int>(argmax) == ex.target) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

double score_arc(const FeedForwardNet& net,
                 const std::vector<std::string>& slot_words,
                 const std::vector<std::string>& predecessors,
                 const std::string& arc_word) {
  if (is_epsilon(arc_word)) return 0.0;
  const int num = net.num_systems;
  if (static_cast<int>(slot_words.size()) != num)
    throw config_error("slot context size mismatch");
  std::vector<int> context;
  context.reserve(net.context_size());
  for (int i = 0; i < num; ++i) {
    if (net.config.history == 2) {
      const std::string& prev =
          i < static_cast<int>(predecessors.size()) ? predecessors[i]
                                                    : kSentStart;
      context.push_back(net.vocab.lookup(prev));
    }
    context.push_back(is_epsilon(slot_words[i])
                          ? Vocabulary::kEpsilonId
                          : net.vocab.lookup(slot_words[i]));
  }
  Eigen::VectorXd probs = net.forward(context);
  return std::log(probs(net.vocab.lookup(arc_word)));
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index r,
                                 Eigen::Index c) {
  if (static_cast<Eigen::Index>(rows.size()) != r)
    throw format_error("matrix row count mismatch");
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows[i];
    if (static_cast<Eigen::Index>(row.size()) != c)
      throw format_error("matrix column count mismatch");
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row[j].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr, Eigen::Index n) {
  if (static_cast<Eigen::Index>(arr.size()) != n)
    throw format_error("vector size mismatch");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = arr[i].get<double>();
  return v;
}

constexpr int kModelVersion = 1;

}  // namespace

void save_model(const FeedForwardNet& net, const std::string& path,
                const std::optional<ClassMap>& classes) {
  json rec;
  rec["version"] = kModelVersion;
  rec["num_systems"] = net.num_systems;
  rec["config"] = {{"hidden_size", net.config.hidden_size},
                   {"learning_rate", net.config.learning_rate},
                   {"epochs", net.config.epochs},
                   {"projection_dim", net.config.projection_dim},
                   {"history", net.config.history},
                   {"seed", net.config.seed},
                   {"batch_size", net.config.batch_size}};
  rec["vocab"] = net.vocab.words;
  rec["projection"] = matrix_to_json(net.projection);
  rec["w_hidden"] = matrix_to_json(net.w_hidden);
  rec["b_hidden"] = vector_to_json(net.b_hidden);
  rec["w_output"] = matrix_to_json(net.w_output);
  rec["b_output"] = vector_to_json(net.b_output);
  if (classes) {
    json cm;
    cm["num_classes"] = classes->num_classes;
    json entries = json::object();
    for (const auto& [w, c] : classes->word_to_class) entries[w] = c;
    cm["words"] = std::move(entries);
    rec["classes"] = std::move(cm);
  }
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << rec.dump() << '\n';
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  json rec;
  try {
    in >> rec;
  } catch (const json::exception& e) {
    throw format_error(std::string("bad model file: ") + e.what());
  }
  LoadedModel loaded;
  try {
    if (rec.at("version").get<int>() != kModelVersion)
      throw format_error("unsupported model version");
    FeedForwardNet& net = loaded.net;
    net.num_systems = rec.at("num_systems").get<int>();
    const json& c = rec.at("config");
    net.config.hidden_size = c.at("hidden_size").get<int>();
    net.config.learning_rate = c.at("learning_rate").get<double>();
    net.config.epochs = c.at("epochs").get<int>();
    net.config.projection_dim = c.at("projection_dim").get<int>();
    net.config.history = c.at("history").get<int>();
    net.config.seed = c.at("seed").get<std::uint64_t>();
    net.config.batch_size = c.at("batch_size").get<int>();
    auto words = rec.at("vocab").get<std::vector<std::string>>();
    if (words.size() < 3 || words[0] != kSentStart || words[1] != kEpsilon ||
        words[2] != kUnkToken)
      throw format_error("bad vocabulary header");
    net.vocab = Vocabulary();
    for (std::size_t i = 3; i < words.size(); ++i) net.vocab.insert(words[i]);
    if (net.vocab.words != words) throw format_error("bad vocabulary order");
    const int v = net.vocab.size();
    const int p = net.config.projection_dim;
    const int h = net.config.hidden_size;
    const int m = net.context_size();
    net.projection = matrix_from_json(rec.at("projection"), v, p);
    net.w_hidden = matrix_from_json(rec.at("w_hidden"), m * p, h);
    net.b_hidden = vector_from_json(rec.at("b_hidden"), h);
    net.w_output = matrix_from_json(rec.at("w_output"), h, v);
    net.b_output = vector_from_json(rec.at("b_output"), v);
    if (rec.contains("classes")) {
      ClassMap map;
      map.num_classes = rec.at("classes").at("num_classes").get<int>();
      for (const auto& [w, cid] : rec.at("classes").at("words").items())
        map.word_to_class[w] = cid.get<int>();
      loaded.classes = std::move(map);
    }
  } catch (const json::exception& e) {
    throw format_error(std::string("bad model file: ") + e.what());
  }
  return loaded;
}

void write_examples(const std::vector<WordExample>& examples,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  for (const auto& ex : examples) {
    for (std::size_t i = 0; i < ex.context.size(); ++i) {
      if (i) out << ' ';
      out << ex.context[i];
    }
    out << '\t' << ex.target << '\n';
  }
}

std::vector<WordExample> read_examples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::vector<WordExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw format_error("example line without tab: " + line);
    WordExample ex;
    ex.context = split_tokens(line.substr(0, tab));
    ex.target = line.substr(tab + 1);
    if (ex.target.empty()) throw format_error("example without target");
    out.push_back(std::move(ex));
  }
  return out;
}

double LocalVoteScorer::score(const std::vector<std::string>& slot_words,
                              const std::vector<std::string>& predecessors,
                              const std::string& arc_word) const {
  if (is_epsilon(arc_word)) return 0.0;
  if (!classes) return score_arc(net, slot_words, predecessors, arc_word);
  std::vector<std::string> slot_c, pred_c;
  slot_c.reserve(slot_words.size());
  for (const auto& w : slot_words) slot_c.push_back(apply_class(w, *classes));
  pred_c.reserve(predecessors.size());
  for (const auto& w : predecessors) pred_c.push_back(apply_class(w, *classes));
  return score_arc(net, slot_c, pred_c, apply_class(arc_word, *classes));
}

Eigen::VectorXd LocalVoteScorer::distribution(
    const std::vector<std::string>& slot_words,
    const std::vector<std::string>& predecessors) const {
  const int num = net.num_systems;
  std::vector<int> context;
  context.reserve(net.context_size());
  for (int i = 0; i < num; ++i) {
    if (net.config.history == 2) {
      std::string prev = i < static_cast<int>(predecessors.size())
                             ? predecessors[i]
                             : kSentStart;
      if (classes) prev = apply_class(prev, *classes);
      context.push_back(net.vocab.lookup(prev));
    }
    std::string cur = slot_words[i];
    if (classes) cur = apply_class(cur, *classes);
    context.push_back(is_epsilon(cur) ? Vocabulary::kEpsilonId
                                      : net.vocab.lookup(cur));
  }
  return net.forward(context);
}

int LocalVoteScorer::target_id(const std::string& arc_word) const {
  std::string w = arc_word;
  if (classes) w = apply_class(w, *classes);
  return net.vocab.lookup(w);
}

}  // namespace syscomb
