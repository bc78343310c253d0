#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace claa {

struct StripOptions {
  // <pre> blocks (and their <code>) are dropped entirely when true; when
  // false their text is kept like any other element.
  bool drop_block_code = true;
};

// HTML to plain text. Tags are removed (block-level tags act as word
// breaks), entities decoded, whitespace collapsed. Any '<' left in the
// output that could open a tag is followed by a space, so the result is
// markup-free and strip_html(strip_html(x)) == strip_html(x).
std::string strip_html(std::string_view html, const StripOptions& options = {});

// Optional diagnostics for malformed input (unclosed tags or blocks).
std::string strip_html(std::string_view html, const StripOptions& options,
                       std::vector<std::string>& diagnostics);

// Decodes named (amp, lt, gt, quot, apos, nbsp) and numeric entities once.
std::string decode_entities(std::string_view text);

// True when the text contains '<' immediately followed by a letter, '/', '!'
// or '?', i.e. something that still looks like markup.
bool looks_like_markup(std::string_view text);

}  // namespace claa
