#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "claa/classifier.hpp"
#include "claa/corpus.hpp"
#include "claa/linalg.hpp"

namespace claa::testing {

// Learning rate that suits the hashed encoder at fixture scale.
inline constexpr double kFixtureLr = 2e-2;

// Two keyword aspects (Security, Performance) plus keyword-free background.
Corpus two_aspect_corpus(std::size_t per_aspect, std::uint64_t seed);

// Every aspect keyed by default_fixture_keywords().
Corpus full_fixture_corpus(std::uint64_t seed);

PipelineOptions fixture_pipeline(bool with_contrastive = true);

inline constexpr std::uint64_t kFixtureCorpusSeed = 5;
inline constexpr std::uint64_t kFixtureBundleSeed = 5;

// Written by the ctest setup fixture: corpus.jsonl, two_aspect.jsonl,
// dump/, bundle/.
std::filesystem::path fixture_dir();

// The eleven-aspect fixture bundle: loaded from fixture_dir() when the setup
// fixture ran, trained in-process otherwise.
const AspectModelBundle& fixture_bundle();

// Fresh directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

// Central differences of f at x, one coordinate at a time.
Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x, double h = 1e-5);

// max |a - b| / max(1, |b|) style relative error, elementwise over the larger
// of the absolute values with a small floor.
double relative_error(const Matrix& analytic, const Matrix& numeric);

// Random rows, each scaled to unit length.
Matrix random_unit_rows(std::size_t n, std::size_t d, std::uint64_t seed);

// Hand-built dump: two json-tagged posts (question title + 2 body sentences,
// answer with 2 sentences), one comment, one python question with a comment.
void write_fixture_dump(const std::filesystem::path& dir);

// Random mix of tags, entities, comments, code blocks and text.
std::string random_markup(std::uint64_t seed);

// stdout of a shell command; sets exit_code.
std::string run_command(const std::string& command, int& exit_code);

}  // namespace claa::testing
