#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webcp/miner/html.hpp"

namespace webcp::miner {

inline constexpr double kFilenameMatchThreshold = 0.85;
inline constexpr std::size_t kMaxContextTokens = 256;
inline constexpr std::size_t kMaxContextSentences = 10;

/// A parsed page; tokenisation happens once per document.
class HtmlDocument {
 public:
  explicit HtmlDocument(std::string_view html) : tokens_(tokenize_html(html)) {}

  const std::vector<HtmlToken>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<HtmlToken> tokens_;
};

struct ImageMatch {
  std::size_t token_index = 0;  // index of the <img> start tag
  std::string attribute;        // "src" or "url-src"
  std::string matched_url;
  double ratio = 0.0;
  /// False when the element has no usable src (empty, data: URI, ...),
  /// which is how lazily loaded images present.
  bool has_resolvable_src = false;
};

/// First <img> whose src or url-src filename has fuzzy_ratio strictly
/// above `threshold` against the filename of `image_url`.
std::optional<ImageMatch> match_image_in_page(const HtmlDocument& doc, std::string_view image_url,
                                              double threshold = kFilenameMatchThreshold);

struct ExtractedContext {
  std::string alt_text;
  std::vector<std::string> pre_sentences;   // document order, nearest last
  std::vector<std::string> post_sentences;  // document order, nearest first

  std::string pre_text() const;
  std::string post_text() const;
};

struct ContextLimits {
  std::size_t max_tokens = kMaxContextTokens;
  std::size_t max_sentences = kMaxContextSentences;
};

ExtractedContext extract_context(const HtmlDocument& doc, const ImageMatch& match,
                                 const ContextLimits& limits = {});

/// Rule-based splitter: breaks after runs of . ! ? followed by whitespace
/// and a character that is not a lowercase ASCII letter.
std::vector<std::string> split_sentences(std::string_view block);

/// Maximal runs of non-whitespace.
std::size_t count_tokens(std::string_view text);

/// Splits stored context text (one sentence per line) back into sentences.
std::vector<std::string> stored_sentences(std::string_view text);

}  // namespace webcp::miner
