#include "claa/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>

namespace claa {

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool opens_tag(std::string_view s, std::size_t i) {
  if (i + 1 >= s.size() || s[i] != '<') return false;
  const char c = s[i + 1];
  return is_alpha(c) || c == '/' || c == '!' || c == '?';
}

constexpr std::array<std::string_view, 24> kBlockTags = {
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl",
    "dt", "footer", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr",
    "li", "ol", "p", "table", "td", "tr",
};

bool is_block_tag(std::string_view name) {
  return std::find(kBlockTags.begin(), kBlockTags.end(), name) != kBlockTags.end() ||
         name == "th" || name == "ul" || name == "pre" || name == "section";
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.empty()) return from;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(hay[i + j])) != needle[j]) {
        ok = false;
        break;
      }
    }
    if (ok) return i;
  }
  return std::string_view::npos;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string remove_tags(std::string_view html, const StripOptions& options,
                        std::vector<std::string>* diagnostics) {
  std::string out;
  out.reserve(html.size());
  std::size_t i = 0;
  while (i < html.size()) {
    if (!opens_tag(html, i)) {
      out += html[i++];
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      const auto end = html.find("-->", i + 4);
      if (end == std::string_view::npos) {
        if (diagnostics) diagnostics->push_back("unclosed comment");
        break;
      }
      i = end + 3;
      continue;
    }
    const auto close = html.find('>', i + 1);
    if (close == std::string_view::npos) {
      // Not a tag after all; keep the text.
      if (diagnostics) diagnostics->push_back("unclosed tag at offset " + std::to_string(i));
      out += html[i++];
      continue;
    }
    std::size_t p = i + 1;
    const bool closing = html[p] == '/';
    if (closing) ++p;
    std::string name;
    while (p < close && std::isalnum(static_cast<unsigned char>(html[p]))) {
      name += static_cast<char>(std::tolower(static_cast<unsigned char>(html[p])));
      ++p;
    }
    if (!closing && name == "pre" && options.drop_block_code) {
      const auto end = find_ci(html, "</pre", close + 1);
      if (end == std::string_view::npos) {
        if (diagnostics) diagnostics->push_back("unclosed <pre> block dropped to end of input");
        out += ' ';
        break;
      }
      const auto end_close = html.find('>', end);
      i = end_close == std::string_view::npos ? html.size() : end_close + 1;
      out += ' ';
      continue;
    }
    if (is_block_tag(name)) out += ' ';
    i = close + 1;
  }
  return out;
}

// '<' that would open a tag becomes "< ".
std::string neutralize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    out += text[i];
    if (opens_tag(text, i)) out += ' ';
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out += text[i++];
      continue;
    }
    const auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += text[i++];
      continue;
    }
    const auto body = text.substr(i + 1, semi - i - 1);
    bool decoded = true;
    if (body == "amp") {
      out += '&';
    } else if (body == "lt") {
      out += '<';
    } else if (body == "gt") {
      out += '>';
    } else if (body == "quot") {
      out += '"';
    } else if (body == "apos") {
      out += '\'';
    } else if (body == "nbsp") {
      out += ' ';
    } else if (body.size() >= 2 && body[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const auto digits = body.substr(hex ? 2 : 1);
      decoded = !digits.empty();
      for (char c : digits) {
        const int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                      : hex && std::isxdigit(static_cast<unsigned char>(c))
                          ? std::tolower(static_cast<unsigned char>(c)) - 'a' + 10
                          : -1;
        if (v < 0 || cp > 0x10FFFF) {
          decoded = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      }
      if (decoded && (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) decoded = false;
      if (decoded) append_utf8(out, cp);
    } else {
      decoded = false;
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out += text[i++];
    }
  }
  return out;
}

bool looks_like_markup(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (opens_tag(text, i)) return true;
  }
  return false;
}

std::string strip_html(std::string_view html, const StripOptions& options,
                       std::vector<std::string>& diagnostics) {
  std::string text = remove_tags(html, options, &diagnostics);
  // Double-escaped bodies ("&amp;lt;") decode to a fixed point.
  for (int round = 0; round < 8; ++round) {
    std::string next = decode_entities(text);
    if (next == text) break;
    text = std::move(next);
  }
  return collapse_whitespace(neutralize(text));
}

std::string strip_html(std::string_view html, const StripOptions& options) {
  std::vector<std::string> ignored;
  return strip_html(html, options, ignored);
}

}  // namespace claa
