#include <doctest.h>

#include "oracles.hpp"
#include "syscomb/corpus.hpp"
#include "testutil.hpp"

using namespace syscomb;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("loads parallel system outputs with a reference") {
  TempDir dir("corpus_fig4");
  write_file(dir.file("a.txt"), "the black cab\n");
  write_file(dir.file("b.txt"), "an red train\n");
  write_file(dir.file("c.txt"), "a orange car\n");
  write_file(dir.file("d.txt"), "a green car\n");
  write_file(dir.file("ref.txt"), "the blue car\n");

  CombinationCorpus corpus = load_corpus(
      {dir.file("a.txt"), dir.file("b.txt"), dir.file("c.txt"),
       dir.file("d.txt")},
      dir.file("ref.txt"));
  CHECK(corpus.num_systems() == 4);
  CHECK(corpus.size() == 1);
  CHECK(corpus.systems[0].sentences[0] == Sentence{"the", "black", "cab"});
  CHECK(corpus.systems[2].system_id == 2);
  REQUIRE(corpus.references.has_value());
  CHECK((*corpus.references)[0] == Sentence{"the", "blue", "car"});
}

TEST_CASE("two identical single-line files") {
  TempDir dir("corpus_identical");
  write_file(dir.file("a.txt"), "same line here\n");
  write_file(dir.file("b.txt"), "same line here\n");
  CombinationCorpus corpus =
      load_corpus({dir.file("a.txt"), dir.file("b.txt")});
  CHECK(corpus.num_systems() == 2);
  CHECK(corpus.size() == 1);
  CHECK(corpus.systems[0].sentences == corpus.systems[1].sentences);
}

TEST_CASE("line count mismatch names the offending file") {
  TempDir dir("corpus_mismatch");
  write_file(dir.file("a.txt"), "one\ntwo\nthree\n");
  write_file(dir.file("b.txt"), "one\ntwo\nthree\nfour\n");
  try {
    load_corpus({dir.file("a.txt"), dir.file("b.txt")});
    FAIL("expected corpus_shape_error");
  } catch (const corpus_shape_error& e) {
    CHECK(std::string(e.what()).find("b.txt") != std::string::npos);
  }
}

TEST_CASE("reserved tokens are rejected at load") {
  TempDir dir("corpus_reserved");
  for (const char* tok : {"<eps>", "UNK", "<s>", "<unk>", "</s>"}) {
    write_file(dir.file("a.txt"), std::string("a ") + tok + " b\n");
    write_file(dir.file("b.txt"), "a b c\n");
    CHECK_THROWS_AS(load_corpus({dir.file("a.txt"), dir.file("b.txt")}),
                    validation_error);
  }
}

TEST_CASE("write_sentences emits one line per sentence") {
  TempDir dir("corpus_write");
  write_sentences({{"the", "blue", "car"}}, dir.file("out.txt"));
  CHECK(testutil::read_file(dir.file("out.txt")) == "the blue car\n");

  write_sentences({}, dir.file("empty.txt"));
  CHECK(testutil::read_file(dir.file("empty.txt")).empty());
}

TEST_CASE("write then load round-trips random corpora") {
  TempDir dir("corpus_roundtrip");
  testoracle::Rng rng(20240811);
  for (int round = 0; round < 30; ++round) {
    std::vector<Sentence> sentences;
    int count = 1 + rng.below(8);
    for (int s = 0; s < count; ++s)
      sentences.push_back(testoracle::random_sentence(rng, 9, 40));
    std::string path = dir.file("roundtrip.txt");
    write_sentences(sentences, path);
    CHECK(load_sentence_file(path) == sentences);
  }
}

TEST_CASE("unwritable path raises io_error") {
  CHECK_THROWS_AS(write_sentences({{"x"}}, "/nonexistent-dir/file.txt"),
                  io_error);
  CHECK_THROWS_AS(load_sentence_file("/nonexistent-dir/file.txt"), io_error);
}

TEST_CASE("lowercase is ascii only") {
  CHECK(lowercase(std::string("The CAR")) == "the car");
  CHECK(lowercase(Sentence{"The", "Blue"}) == Sentence{"the", "blue"});
}
