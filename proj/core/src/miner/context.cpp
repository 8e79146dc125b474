#include "webcp/miner/context.hpp"

#include <algorithm>
#include <cctype>

#include "webcp/miner/fuzzy.hpp"
#include "webcp/miner/url.hpp"

namespace webcp::miner {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string_view> tokens_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string join(const std::vector<std::string_view>& parts, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (!out.empty()) out.push_back(' ');
    out.append(parts[i]);
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (is_space(c)) {
      space = !out.empty();
    } else {
      if (space) out.push_back(' ');
      space = false;
      out.push_back(c);
    }
  }
  return out;
}

bool unusable_src(const std::string* src) {
  if (!src) return true;
  std::string v = collapse_whitespace(*src);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return v.empty() || v.starts_with("data:") || v.starts_with("about:") ||
         v.starts_with("javascript:") || v == "#";
}

// Plaintext blocks on either side of the token at `split`. Each block is
// whitespace-collapsed; block element boundaries start a new block.
struct SplitBlocks {
  std::vector<std::string> before;
  std::vector<std::string> after;
};

SplitBlocks collect_blocks(const std::vector<HtmlToken>& tokens, std::size_t split) {
  SplitBlocks out;
  std::string current;
  std::vector<std::string>* target = &out.before;
  auto flush = [&] {
    std::string block = collapse_whitespace(current);
    current.clear();
    if (!block.empty()) target->push_back(std::move(block));
  };
  int skip_depth = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == split) {
      flush();
      target = &out.after;
      continue;
    }
    const HtmlToken& t = tokens[i];
    const bool excluded = t.name == "script" || t.name == "style" || t.name == "template";
    switch (t.kind) {
      case HtmlToken::Kind::kStartTag:
        if (excluded && !t.self_closing) ++skip_depth;
        else if (is_block_element(t.name)) flush();
        break;
      case HtmlToken::Kind::kEndTag:
        if (excluded) skip_depth = std::max(0, skip_depth - 1);
        else if (is_block_element(t.name)) flush();
        break;
      case HtmlToken::Kind::kText:
        if (skip_depth == 0) current += t.text;
        break;
    }
  }
  flush();
  return out;
}

std::size_t total_tokens(const std::vector<std::string>& sentences) {
  std::size_t n = 0;
  for (const auto& s : sentences) n += count_tokens(s);
  return n;
}

// Keeps the last sentences (pre-context) within both bounds.
std::vector<std::string> truncate_tail(const std::vector<std::string>& sentences,
                                       const ContextLimits& limits) {
  const std::size_t keep = std::min(limits.max_sentences, sentences.size());
  std::vector<std::string> by_sentence(sentences.end() - static_cast<std::ptrdiff_t>(keep),
                                       sentences.end());

  std::vector<std::string> by_token;
  std::size_t budget = limits.max_tokens;
  for (auto it = sentences.rbegin(); it != sentences.rend() && budget > 0; ++it) {
    const auto toks = tokens_of(*it);
    if (toks.size() <= budget) {
      by_token.push_back(*it);
      budget -= toks.size();
    } else {
      by_token.push_back(join(toks, toks.size() - budget, toks.size()));
      budget = 0;
    }
  }
  std::reverse(by_token.begin(), by_token.end());

  return total_tokens(by_token) < total_tokens(by_sentence) ? by_token : by_sentence;
}

// Keeps the first sentences (post-context) within both bounds.
std::vector<std::string> truncate_head(const std::vector<std::string>& sentences,
                                       const ContextLimits& limits) {
  const std::size_t keep = std::min(limits.max_sentences, sentences.size());
  std::vector<std::string> by_sentence(sentences.begin(),
                                       sentences.begin() + static_cast<std::ptrdiff_t>(keep));

  std::vector<std::string> by_token;
  std::size_t budget = limits.max_tokens;
  for (auto it = sentences.begin(); it != sentences.end() && budget > 0; ++it) {
    const auto toks = tokens_of(*it);
    if (toks.size() <= budget) {
      by_token.push_back(*it);
      budget -= toks.size();
    } else {
      by_token.push_back(join(toks, 0, budget));
      budget = 0;
    }
  }

  return total_tokens(by_token) < total_tokens(by_sentence) ? by_token : by_sentence;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out.push_back('\n');
    out += l;
  }
  return out;
}

}  // namespace

std::optional<ImageMatch> match_image_in_page(const HtmlDocument& doc, std::string_view image_url,
                                              double threshold) {
  const std::string target = url_filename(image_url);
  if (target.empty()) return std::nullopt;
  const auto& tokens = doc.tokens();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const HtmlToken& t = tokens[i];
    if (t.kind != HtmlToken::Kind::kStartTag || t.name != "img") continue;
    for (const char* key : {"src", "url-src"}) {
      const std::string* value = t.attr(key);
      if (!value) continue;
      const std::string name = url_filename(collapse_whitespace(*value));
      if (name.empty()) continue;
      const double ratio = fuzzy_ratio(name, target);
      if (ratio > threshold) {
        ImageMatch m;
        m.token_index = i;
        m.attribute = key;
        m.matched_url = collapse_whitespace(*value);
        m.ratio = ratio;
        m.has_resolvable_src = !unusable_src(t.attr("src"));
        return m;
      }
    }
  }
  return std::nullopt;
}

ExtractedContext extract_context(const HtmlDocument& doc, const ImageMatch& match,
                                 const ContextLimits& limits) {
  ExtractedContext out;
  const auto& tokens = doc.tokens();
  if (match.token_index < tokens.size()) {
    if (const std::string* alt = tokens[match.token_index].attr("alt")) {
      out.alt_text = alt->find('<') != std::string::npos ? html_to_plaintext(*alt)
                                                         : collapse_whitespace(*alt);
    }
  }
  const SplitBlocks blocks = collect_blocks(tokens, match.token_index);
  std::vector<std::string> before, after;
  for (const auto& b : blocks.before) {
    for (auto& s : split_sentences(b)) before.push_back(std::move(s));
  }
  for (const auto& b : blocks.after) {
    for (auto& s : split_sentences(b)) after.push_back(std::move(s));
  }
  out.pre_sentences = truncate_tail(before, limits);
  out.post_sentences = truncate_head(after, limits);
  return out;
}

std::string ExtractedContext::pre_text() const { return join_lines(pre_sentences); }
std::string ExtractedContext::post_text() const { return join_lines(post_sentences); }

std::vector<std::string> split_sentences(std::string_view block) {
  std::vector<std::string> out;
  const std::string text = collapse_whitespace(block);
  std::size_t start = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    std::string s = collapse_whitespace(std::string_view(text).substr(start, end - start));
    if (!s.empty()) out.push_back(std::move(s));
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
    while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == ')' ||
                               text[j] == ']')) {
      ++j;
    }
    if (j < text.size() && text[j] == ' ' && j + 1 < text.size() &&
        !std::islower(static_cast<unsigned char>(text[j + 1]))) {
      emit(j);
      start = j + 1;
    }
    i = j;
  }
  emit(text.size());
  return out;
}

std::size_t count_tokens(std::string_view text) { return tokens_of(text).size(); }

std::vector<std::string> stored_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line = collapse_whitespace(text.substr(pos, end - pos));
    if (!line.empty()) out.push_back(std::move(line));
    pos = end + 1;
  }
  return out;
}

}  // namespace webcp::miner
