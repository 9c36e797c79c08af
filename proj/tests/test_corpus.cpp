#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "synthtext/corpus.hpp"
#include "synthtext/errors.hpp"
#include "synthtext/rng.hpp"

using namespace synthtext;

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(7, 0) == derive_seed(7, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, 5) != derive_seed(2, 5));
}

TEST_CASE("rng helpers stay in range") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0 && u < 1));
    const auto k = rng.uniform_index(7);
    CHECK(k < 7);
    const int v = rng.uniform_int(-2, 2);
    CHECK((v >= -2 && v <= 2));
  }
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("parse splits tokens on whitespace and lines on newlines") {
  const Corpus c = parse_corpus("hello world\nfoo");
  CHECK(c.tokens == std::vector<std::string>{"hello", "world", "foo"});
  CHECK(c.lines == std::vector<std::string>{"hello world", "foo"});
}

TEST_CASE("blank lines and extra whitespace are dropped") {
  const Corpus c = parse_corpus("  a\t b  \n\n\n c \n");
  CHECK(c.tokens == std::vector<std::string>{"a", "b", "c"});
  CHECK(c.lines.size() == 2);
  for (const auto& t : c.tokens) CHECK(t.find_first_of(" \t\n") == std::string::npos);
}

TEST_CASE("empty corpus is a validation error") {
  CHECK_THROWS_AS(parse_corpus(""), ValidationError);
  CHECK_THROWS_AS(parse_corpus(" \n\t\n"), ValidationError);
}

TEST_CASE("unreadable corpus file is an ingestion error") {
  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.txt"), IngestionError);
}

TEST_CASE("single line of N tokens") {
  const auto path = std::filesystem::temp_directory_path() / "synthtext_corpus_one_line.txt";
  std::ofstream(path) << "one two three four five\n";
  const Corpus c = load_corpus(path);
  CHECK(c.lines.size() == 1);
  CHECK(c.tokens.size() == 5);
  std::filesystem::remove(path);
}

TEST_CASE("word samples are drawn uniformly from the tokens") {
  const Corpus c = parse_corpus("hello world\nfoo");
  Rng rng(11);
  std::map<std::string, int> hits;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const TextSample s = sample_text(c, TextKind::Word, rng);
    CHECK(s.line_count == 1);
    ++hits[s.content];
  }
  CHECK(hits.size() == 3);
  for (const auto& [tok, k] : hits) CHECK(std::abs(static_cast<double>(k) / n - 1.0 / 3) <= 0.02);
}

TEST_CASE("line and paragraph runs respect their caps and stay consecutive") {
  std::string text;
  for (int i = 0; i < 20; ++i) text += "line " + std::to_string(i) + "\n";
  const Corpus c = parse_corpus(text);
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    for (auto kind : {TextKind::Line, TextKind::Paragraph}) {
      const TextSample s = sample_text(c, kind, rng);
      const int cap = kind == TextKind::Line ? 3 : 7;
      CHECK(s.line_count >= 1);
      CHECK(s.line_count <= cap);
      CHECK(std::count(s.content.begin(), s.content.end(), '\n') == s.line_count - 1);
      // Consecutive source lines.
      const auto first = s.content.substr(0, s.content.find('\n'));
      const int start = std::stoi(first.substr(5));
      std::string expect;
      for (int k = 0; k < s.line_count; ++k) expect += (k ? "\n" : "") + c.lines[start + k];
      CHECK(s.content == expect);
    }
  }
}

TEST_CASE("runs are clamped at the end of the corpus") {
  const Corpus c = parse_corpus("a\nb");
  Rng rng(1);
  for (int i = 0; i < 200; ++i) CHECK(sample_text(c, TextKind::Paragraph, rng).line_count <= 2);
}

TEST_CASE("over-long tokens are resampled") {
  const Corpus c = parse_corpus("short averyveryveryverylongtokenthatexceedslimits ok");
  Rng rng(2);
  for (int i = 0; i < 500; ++i) CHECK(sample_text(c, TextKind::Word, rng).content.size() <= 24);
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  const Corpus c = parse_corpus("alpha beta\ngamma delta\nepsilon");
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) {
    const auto kind = sample_kind({1.0 / 3, 1.0 / 3, 1.0 / 3}, a);
    CHECK(kind == sample_kind({1.0 / 3, 1.0 / 3, 1.0 / 3}, b));
    CHECK(sample_text(c, kind, a).content == sample_text(c, kind, b).content);
  }
}

TEST_CASE("kind probabilities are honoured") {
  Rng rng(4);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 30000; ++i) ++counts[static_cast<int>(sample_kind({0.5, 0.3, 0.2}, rng))];
  CHECK(counts[0] / 30000.0 == doctest::Approx(0.5).epsilon(0.05));
  CHECK(counts[1] / 30000.0 == doctest::Approx(0.3).epsilon(0.05));
  CHECK(counts[2] / 30000.0 == doctest::Approx(0.2).epsilon(0.05));
}
