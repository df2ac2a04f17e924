#ifndef SYSCOMB_CORPUS_HPP
#define SYSCOMB_CORPUS_HPP

#include <string>
#include <vector>

#include "syscomb/types.hpp"

namespace syscomb {

std::vector<std::string> split_tokens(const std::string& line);
std::string join_tokens(const Sentence& sentence);

// ASCII lowercasing; non-ASCII bytes pass through untouched.
std::string lowercase(std::string word);
Sentence lowercase(const Sentence& sentence);

// One sentence per line, space-separated tokens. Rejects reserved tokens.
std::vector<Sentence> load_sentence_file(const std::string& path);

// Loads I parallel system outputs plus an optional reference file and
// validates that all files have the same number of lines.
CombinationCorpus load_corpus(const std::vector<std::string>& system_paths,
                              const std::string& reference_path = "");

void write_sentences(const std::vector<Sentence>& sentences,
                     const std::string& path);

}  // namespace syscomb

#endif
