#include <doctest.h>

#include "semfilter/clip_tokenizer.hpp"
#include "semfilter/error.hpp"
#include "support.hpp"

using namespace semfilter;

TEST_CASE("token ids match the reference tokenizer") {
  const auto tok = ClipTokenizer::from_file(testing::data_dir() / "clip_bpe_vocab_16e6.txt.gz");
  CHECK(tok.vocab_size() == 49408);
  CHECK(tok.sot() == 49406);
  CHECK(tok.eot() == 49407);

  const auto golden = testing::read_json(testing::data_dir() / "tokenizer_golden.json");
  const std::size_t context = golden["context"];
  for (const auto& c : golden["cases"]) {
    const std::string text = c["text"];
    CAPTURE(text);
    CHECK(tok.encode(text) == c["bpe"].get<std::vector<std::int64_t>>());
    CHECK(tok.tokenize(text, context) == c["ids"].get<std::vector<std::int64_t>>());
    CHECK(tok.count(text) == c["bpe"].size() + 2);
  }
}

TEST_CASE("truncation keeps the end marker in the last slot") {
  const auto tok = ClipTokenizer::from_file(testing::data_dir() / "clip_bpe_vocab_16e6.txt.gz");
  const auto ids = tok.tokenize("one two three four five six", 4);
  REQUIRE(ids.size() == 4);
  CHECK(ids.front() == tok.sot());
  CHECK(ids.back() == tok.eot());
}

TEST_CASE("a missing merges file is an IoError") {
  CHECK_THROWS_AS(ClipTokenizer::from_file("/nonexistent/bpe.txt.gz"), IoError);
}
