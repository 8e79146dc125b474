#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace webcp::miner {

/// One lexical unit of an HTML document.
struct HtmlToken {
  enum class Kind { kText, kStartTag, kEndTag };

  Kind kind = Kind::kText;
  std::string name;  // lowercased tag name; empty for text
  std::vector<std::pair<std::string, std::string>> attrs;  // names lowercased, values decoded
  std::string text;  // entity-decoded text for kText
  bool self_closing = false;

  const std::string* attr(std::string_view key) const;
};

/// Lenient tokenizer: never throws, recovers from unterminated tags, stray
/// '<', unquoted attributes and missing end tags. Comments, doctypes and
/// processing instructions are dropped. The bodies of raw-text elements
/// (script, style, textarea, title) are emitted as a single text token.
std::vector<HtmlToken> tokenize_html(std::string_view html);

/// Decodes named (common subset) and numeric character references.
std::string decode_entities(std::string_view s);

/// Elements whose boundaries end a sentence in extracted plaintext.
bool is_block_element(std::string_view tag);

/// Plaintext of an HTML fragment (tags stripped, entities decoded,
/// whitespace collapsed).
std::string html_to_plaintext(std::string_view fragment);

}  // namespace webcp::miner
