#include "claa/aspect.hpp"

#include <algorithm>
#include <cctype>

#include "claa/error.hpp"

namespace claa {

namespace {

constexpr std::array<std::string_view, kAspectCount> kNames = {
    "Performance",   "Usability", "Security", "Community",
    "Compatibility", "Portability", "Documentation", "Bug",
    "Legal",         "OnlySentiment", "Others",
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view aspect_name(Aspect aspect) { return kNames[aspect_index(aspect)]; }

std::optional<Aspect> parse_aspect(std::string_view name) {
  // Trim surrounding blanks; CSV sources often carry them.
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.front()))) name.remove_prefix(1);
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.remove_suffix(1);
  for (std::size_t i = 0; i < kAspectCount; ++i) {
    if (iequals(name, kNames[i])) return kAllAspects[i];
  }
  return std::nullopt;
}

Aspect require_aspect(std::string_view name) {
  if (auto a = parse_aspect(name)) return *a;
  throw ValidationError("unknown aspect '" + std::string(name) +
                        "'; valid names: " + valid_aspect_names());
}

std::string valid_aspect_names() {
  std::string out;
  for (auto n : kNames) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace claa
