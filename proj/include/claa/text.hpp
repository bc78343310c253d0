#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace claa {

// Splits on whitespace and ASCII punctuation; separators are dropped and
// case is preserved. Bytes >= 0x80 are treated as word characters so UTF-8
// text stays intact.
std::vector<std::string> word_tokens(std::string_view text);

// word_tokens, lowercased.
std::vector<std::string> encoder_tokens(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens, std::string_view sep = " ");

}  // namespace claa
