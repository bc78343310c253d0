#include "claa/text.hpp"

#include <cctype>

#include "claa/util.hpp"

namespace claa {

namespace {

bool is_separator(unsigned char c) {
  return c < 0x80 && (std::isspace(c) || std::ispunct(c) || std::iscntrl(c));
}

}  // namespace

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (is_separator(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> encoder_tokens(std::string_view text) {
  auto tokens = word_tokens(text);
  for (auto& t : tokens) t = to_lower_ascii(t);
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace claa
