#include "syscomb/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace syscomb {

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

std::string join_tokens(const Sentence& sentence) {
  std::string out;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (i) out += ' ';
    out += sentence[i];
  }
  return out;
}

std::string lowercase(std::string word) {
  for (char& c : word)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return word;
}

Sentence lowercase(const Sentence& sentence) {
  Sentence out;
  out.reserve(sentence.size());
  for (const auto& w : sentence) out.push_back(lowercase(w));
  return out;
}

std::vector<Sentence> load_sentence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::vector<Sentence> sentences;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Sentence s = split_tokens(line);
    for (const auto& tok : s) {
      if (is_reserved_token(tok))
        throw validation_error("reserved token '" + tok + "' in " + path +
                               " line " + std::to_string(sentences.size() + 1));
    }
    sentences.push_back(std::move(s));
  }
  return sentences;
}

CombinationCorpus load_corpus(const std::vector<std::string>& system_paths,
                              const std::string& reference_path) {
  if (system_paths.size() < 2)
    throw corpus_shape_error("need at least 2 system outputs, got " +
                             std::to_string(system_paths.size()));
  CombinationCorpus corpus;
  std::size_t expected = 0;
  for (std::size_t i = 0; i < system_paths.size(); ++i) {
    SystemOutput sys;
    sys.system_id = static_cast<int>(i);
    sys.name = system_paths[i];
    sys.sentences = load_sentence_file(system_paths[i]);
    if (i == 0) {
      expected = sys.sentences.size();
    } else if (sys.sentences.size() != expected) {
      throw corpus_shape_error(
          "line count mismatch: " + system_paths[i] + " has " +
          std::to_string(sys.sentences.size()) + " lines, expected " +
          std::to_string(expected));
    }
    corpus.systems.push_back(std::move(sys));
  }
  if (!reference_path.empty()) {
    auto refs = load_sentence_file(reference_path);
    if (refs.size() != expected)
      throw corpus_shape_error("line count mismatch: " + reference_path +
                               " has " + std::to_string(refs.size()) +
                               " lines, expected " + std::to_string(expected));
    corpus.references = std::move(refs);
  }
  return corpus;
}

void write_sentences(const std::vector<Sentence>& sentences,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  for (const auto& s : sentences) out << join_tokens(s) << '\n';
  if (!out) throw io_error("write failed for " + path);
}

}  // namespace syscomb
