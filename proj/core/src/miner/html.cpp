#include "webcp/miner/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace webcp::miner {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct NamedEntity {
  std::string_view name;
  std::uint32_t cp;
};

// Common subset; unknown names are left verbatim.
constexpr std::array<NamedEntity, 24> kEntities{{
    {"amp", '&'},       {"lt", '<'},        {"gt", '>'},        {"quot", '"'},
    {"apos", '\''},     {"nbsp", ' '},      {"copy", 0xA9},     {"reg", 0xAE},
    {"trade", 0x2122},  {"hellip", 0x2026}, {"mdash", 0x2014},  {"ndash", 0x2013},
    {"lsquo", 0x2018},  {"rsquo", 0x2019},  {"ldquo", 0x201C},  {"rdquo", 0x201D},
    {"laquo", 0xAB},    {"raquo", 0xBB},    {"eacute", 0xE9},   {"egrave", 0xE8},
    {"uuml", 0xFC},     {"ouml", 0xF6},     {"auml", 0xE4},     {"middot", 0xB7},
}};

bool is_raw_text(std::string_view tag) { return tag == "script" || tag == "style"; }

bool is_escapable_raw_text(std::string_view tag) { return tag == "textarea" || tag == "title"; }

// Case-insensitive search for "</tag" starting at `from`.
std::size_t find_end_tag(std::string_view html, std::string_view tag, std::size_t from) {
  for (std::size_t i = html.find("</", from); i != std::string_view::npos;
       i = html.find("</", i + 1)) {
    if (i + 2 + tag.size() > html.size()) return std::string_view::npos;
    bool same = true;
    for (std::size_t k = 0; k < tag.size(); ++k) {
      if (lower(html[i + 2 + k]) != tag[k]) {
        same = false;
        break;
      }
    }
    if (!same) continue;
    const std::size_t after = i + 2 + tag.size();
    if (after == html.size() || is_space(html[after]) || html[after] == '>' || html[after] == '/') {
      return i;
    }
  }
  return std::string_view::npos;
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view html) : html_(html) {}

  std::vector<HtmlToken> run() {
    while (pos_ < html_.size()) {
      if (html_[pos_] == '<' && lex_markup()) continue;
      lex_text();
    }
    flush_text();
    return std::move(tokens_);
  }

 private:
  void lex_text() {
    const std::size_t start = pos_;
    // A '<' that did not open markup is literal text.
    if (html_[pos_] == '<') ++pos_;
    const std::size_t next = html_.find('<', pos_);
    pos_ = next == std::string_view::npos ? html_.size() : next;
    pending_text_.append(html_.substr(start, pos_ - start));
  }

  void flush_text() {
    if (pending_text_.empty()) return;
    HtmlToken t;
    t.kind = HtmlToken::Kind::kText;
    t.text = decode_entities(pending_text_);
    pending_text_.clear();
    tokens_.push_back(std::move(t));
  }

  bool lex_markup() {
    const std::string_view rest = html_.substr(pos_);
    if (rest.starts_with("<!--")) {
      flush_text();
      const auto end = html_.find("-->", pos_ + 4);
      pos_ = end == std::string_view::npos ? html_.size() : end + 3;
      return true;
    }
    if (rest.starts_with("<!") || rest.starts_with("<?")) {
      flush_text();
      const auto end = html_.find('>', pos_ + 2);
      pos_ = end == std::string_view::npos ? html_.size() : end + 1;
      return true;
    }
    if (rest.size() >= 3 && rest[1] == '/' && is_alpha(rest[2])) {
      flush_text();
      lex_end_tag();
      return true;
    }
    if (rest.size() >= 2 && is_alpha(rest[1])) {
      flush_text();
      lex_start_tag();
      return true;
    }
    return false;
  }

  std::string lex_name() {
    const std::size_t start = pos_;
    while (pos_ < html_.size() && !is_space(html_[pos_]) && html_[pos_] != '>' &&
           html_[pos_] != '/' && html_[pos_] != '=' && html_[pos_] != '<') {
      ++pos_;
    }
    return lowercase(html_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (pos_ < html_.size() && is_space(html_[pos_])) ++pos_;
  }

  void lex_end_tag() {
    pos_ += 2;
    HtmlToken t;
    t.kind = HtmlToken::Kind::kEndTag;
    t.name = lex_name();
    const auto end = html_.find('>', pos_);
    pos_ = end == std::string_view::npos ? html_.size() : end + 1;
    tokens_.push_back(std::move(t));
  }

  void lex_start_tag() {
    ++pos_;
    HtmlToken t;
    t.kind = HtmlToken::Kind::kStartTag;
    t.name = lex_name();
    while (pos_ < html_.size()) {
      skip_space();
      if (pos_ >= html_.size()) break;
      const char c = html_[pos_];
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '/') {
        ++pos_;
        if (pos_ < html_.size() && html_[pos_] == '>') {
          t.self_closing = true;
          ++pos_;
          break;
        }
        continue;
      }
      if (c == '<') break;  // unterminated tag; let the next tag start here
      std::string name = lex_name();
      if (name.empty()) {
        ++pos_;  // stray '='
        continue;
      }
      skip_space();
      std::string value;
      if (pos_ < html_.size() && html_[pos_] == '=') {
        ++pos_;
        skip_space();
        value = lex_attr_value();
      }
      if (!t.attr(name)) t.attrs.emplace_back(std::move(name), decode_entities(value));
    }
    const std::string name = t.name;
    const bool self_closing = t.self_closing;
    tokens_.push_back(std::move(t));
    if (!self_closing && (is_raw_text(name) || is_escapable_raw_text(name))) lex_raw_body(name);
  }

  std::string lex_attr_value() {
    if (pos_ >= html_.size()) return {};
    const char q = html_[pos_];
    if (q == '"' || q == '\'') {
      const auto end = html_.find(q, pos_ + 1);
      if (end == std::string_view::npos) {
        // Unterminated quote: take up to the next '>'.
        const auto gt = html_.find('>', pos_ + 1);
        const std::size_t stop = gt == std::string_view::npos ? html_.size() : gt;
        std::string v(html_.substr(pos_ + 1, stop - pos_ - 1));
        pos_ = stop;
        return v;
      }
      std::string v(html_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return v;
    }
    const std::size_t start = pos_;
    while (pos_ < html_.size() && !is_space(html_[pos_]) && html_[pos_] != '>') ++pos_;
    return std::string(html_.substr(start, pos_ - start));
  }

  void lex_raw_body(const std::string& tag) {
    const auto end = find_end_tag(html_, tag, pos_);
    const std::size_t stop = end == std::string_view::npos ? html_.size() : end;
    if (stop > pos_) {
      HtmlToken text;
      text.kind = HtmlToken::Kind::kText;
      const std::string_view body = html_.substr(pos_, stop - pos_);
      text.text = is_raw_text(tag) ? std::string(body) : decode_entities(body);
      tokens_.push_back(std::move(text));
    }
    pos_ = stop;
    if (end != std::string_view::npos) lex_end_tag();
  }

  std::string_view html_;
  std::size_t pos_ = 0;
  std::string pending_text_;
  std::vector<HtmlToken> tokens_;
};

}  // namespace

const std::string* HtmlToken::attr(std::string_view key) const {
  for (const auto& [k, v] : attrs) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::vector<HtmlToken> tokenize_html(std::string_view html) { return Tokenizer(html).run(); }

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view body = s.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (body.size() >= 2 && body[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = true;
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const std::string_view digits = body.substr(hex ? 2 : 1);
      if (digits.empty()) ok = false;
      for (char c : digits) {
        int v = -1;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        if (v < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      }
      if (ok) {
        append_utf8(out, cp == 0xA0 ? ' ' : cp);
        decoded = true;
      }
    } else {
      for (const auto& e : kEntities) {
        if (e.name == body) {
          append_utf8(out, e.cp);
          decoded = true;
          break;
        }
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

bool is_block_element(std::string_view tag) {
  static constexpr std::array<std::string_view, 38> kBlocks{
      "address", "article", "aside",  "blockquote", "br",      "dd",     "details", "div",
      "dl",      "dt",      "fieldset", "figcaption", "figure", "footer", "form",    "h1",
      "h2",      "h3",      "h4",     "h5",         "h6",      "header", "hr",      "li",
      "main",    "nav",     "ol",     "p",          "pre",     "section", "table",  "tbody",
      "td",      "th",      "thead",  "tr",         "ul",      "title"};
  return std::find(kBlocks.begin(), kBlocks.end(), tag) != kBlocks.end();
}

std::string html_to_plaintext(std::string_view fragment) {
  std::string raw;
  bool skipping = false;
  std::string skip_tag;
  for (const auto& t : tokenize_html(fragment)) {
    switch (t.kind) {
      case HtmlToken::Kind::kStartTag:
        if (!skipping && (t.name == "script" || t.name == "style") && !t.self_closing) {
          skipping = true;
          skip_tag = t.name;
        } else if (is_block_element(t.name)) {
          raw.push_back(' ');
        }
        break;
      case HtmlToken::Kind::kEndTag:
        if (skipping && t.name == skip_tag) skipping = false;
        else if (is_block_element(t.name)) raw.push_back(' ');
        break;
      case HtmlToken::Kind::kText:
        if (!skipping) raw += t.text;
        break;
    }
  }
  std::string out;
  bool space = false;
  for (char c : raw) {
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

}  // namespace webcp::miner
