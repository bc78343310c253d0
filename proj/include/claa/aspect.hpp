#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace claa {

// The eleven API aspects of the benchmark. Order is the canonical order used
// in every report and bundle index.
enum class Aspect : std::uint8_t {
  Performance,
  Usability,
  Security,
  Community,
  Compatibility,
  Portability,
  Documentation,
  Bug,
  Legal,
  OnlySentiment,
  Others,
};

inline constexpr std::size_t kAspectCount = 11;

inline constexpr std::array<Aspect, kAspectCount> kAllAspects = {
    Aspect::Performance,   Aspect::Usability,     Aspect::Security,
    Aspect::Community,     Aspect::Compatibility, Aspect::Portability,
    Aspect::Documentation, Aspect::Bug,           Aspect::Legal,
    Aspect::OnlySentiment, Aspect::Others,
};

// Marker emitted when no aspect classifier fires for a sentence.
inline constexpr std::string_view kNoneMarker = "None";

std::string_view aspect_name(Aspect aspect);

// Case-insensitive lookup; nullopt for anything that is not one of the 11.
std::optional<Aspect> parse_aspect(std::string_view name);

// Like parse_aspect but throws ValidationError listing the valid names.
Aspect require_aspect(std::string_view name);

// "Performance, Usability, ..." for diagnostics.
std::string valid_aspect_names();

constexpr std::size_t aspect_index(Aspect aspect) {
  return static_cast<std::size_t>(aspect);
}

}  // namespace claa
