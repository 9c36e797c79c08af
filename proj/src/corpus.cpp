#include "synthtext/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "synthtext/errors.hpp"

namespace synthtext {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Collapses internal whitespace runs so a rendered line has single spaces.
std::string normalize_line(const std::string& s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

const char* to_string(TextKind kind) {
  switch (kind) {
    case TextKind::Word: return "word";
    case TextKind::Line: return "line";
    case TextKind::Paragraph: return "paragraph";
  }
  return "unknown";
}

Corpus parse_corpus(const std::string& text) {
  Corpus corpus;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::string cleaned = normalize_line(trim(line));
    if (!cleaned.empty()) corpus.lines.push_back(std::move(cleaned));
  }
  std::istringstream words(text);
  std::string tok;
  while (words >> tok) corpus.tokens.push_back(tok);
  if (corpus.tokens.empty()) throw ValidationError("corpus contains no tokens");
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot read corpus: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IngestionError("read error on corpus: " + path.string());
  return parse_corpus(ss.str());
}

TextSample sample_text(const Corpus& corpus, TextKind kind, Rng& rng, const TextSamplerConfig& cfg) {
  if (corpus.tokens.empty() || corpus.lines.empty()) throw ValidationError("empty corpus");
  TextSample out;
  out.kind = kind;

  if (kind == TextKind::Word) {
    // Over-long tokens are resampled; give up only if the corpus has none short enough.
    constexpr int kMaxDraws = 1000;
    for (int i = 0; i < kMaxDraws; ++i) {
      const auto& tok = corpus.tokens[rng.uniform_index(corpus.tokens.size())];
      if (tok.size() <= cfg.max_token_length) {
        out.content = tok;
        out.line_count = 1;
        return out;
      }
    }
    throw ValidationError("no corpus token within the maximum token length");
  }

  const int max_run = kind == TextKind::Line ? cfg.max_line_run : cfg.max_paragraph_run;
  const int wanted = rng.uniform_int(1, max_run);
  const std::size_t start = rng.uniform_index(corpus.lines.size());
  const std::size_t count = std::min<std::size_t>(wanted, corpus.lines.size() - start);
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out.content.push_back('\n');
    out.content += corpus.lines[start + i];
  }
  out.line_count = static_cast<int>(count);
  return out;
}

TextKind sample_kind(const std::array<double, 3>& probs, Rng& rng) {
  const double u = rng.uniform();
  if (u < probs[0]) return TextKind::Word;
  if (u < probs[0] + probs[1]) return TextKind::Line;
  return TextKind::Paragraph;
}

}  // namespace synthtext
