#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "claa/encoder.hpp"
#include "claa/linalg.hpp"

namespace claa {

enum class ProjectionMethod { Tsne, Pca };

std::string_view method_name(ProjectionMethod m);
ProjectionMethod parse_method(std::string_view name);

struct ProjectionParams {
  // Clamped to (n - 1) / 3.
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  std::uint64_t seed = 0;
};

struct ProjectedPoints {
  Matrix points;  // n x 2
  std::vector<int> labels;
  ProjectionMethod method = ProjectionMethod::Pca;
  ProjectionParams params;
  // Perplexity actually used (t-SNE).
  double effective_perplexity = 0.0;
};

// Top-2 principal components of the centered rows. Each component's sign
// makes its largest-magnitude loading positive. Throws on fewer than 3 rows
// or zero variance.
Matrix pca_2d(const Matrix& x);

// Exact t-SNE with PCA initialization. Throws when the clamped perplexity
// falls below 1.
Matrix tsne_2d(const Matrix& x, const ProjectionParams& params, double* effective_perplexity = nullptr);

ProjectedPoints project_2d(const EmbeddingMatrix& embeddings, std::span<const int> labels, ProjectionMethod method,
                           const ProjectionParams& params = {});

// Mean silhouette coefficient (Euclidean). Needs two labels present;
// points alone in their class score 0.
double silhouette_score(const Matrix& points, std::span<const int> labels);

// TSV with header "x\ty\tlabel", 6 decimals.
void export_points(const ProjectedPoints& points, const std::filesystem::path& path);
ProjectedPoints read_points(const std::filesystem::path& path);

nlohmann::json to_json(const ProjectionParams& p);

}  // namespace claa
