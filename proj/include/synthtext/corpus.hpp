#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "synthtext/rng.hpp"

namespace synthtext {

/// Plain-text source for sampled words, lines and paragraphs. Immutable after
/// construction.
struct Corpus {
  std::vector<std::string> lines;   // non-empty lines, source order
  std::vector<std::string> tokens;  // whitespace-delimited, source order
};

enum class TextKind { Word, Line, Paragraph };

const char* to_string(TextKind kind);

struct TextSample {
  TextKind kind = TextKind::Word;
  std::string content;  // lines joined with '\n'
  int line_count = 1;
};

struct TextSamplerConfig {
  std::size_t max_token_length = 24;
  int max_line_run = 3;
  int max_paragraph_run = 7;
};

Corpus parse_corpus(const std::string& text);

/// Throws IngestionError when the file cannot be read and ValidationError when
/// it holds no tokens.
Corpus load_corpus(const std::filesystem::path& path);

TextSample sample_text(const Corpus& corpus, TextKind kind, Rng& rng,
                       const TextSamplerConfig& cfg = {});

/// Draws a kind according to `probs` (Word, Line, Paragraph).
TextKind sample_kind(const std::array<double, 3>& probs, Rng& rng);

}  // namespace synthtext
