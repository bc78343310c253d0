#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP variant with the same signature. The OpenMP variants only split
// independent rows or resamples, and every cross-row sum is taken serially
// over a per-row buffer, so both variants produce bit-identical results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "claa/linalg.hpp"

namespace claa::kernels {

// Sparse feature vector (sorted, unique indices).
struct SparseRow {
  std::vector<std::uint32_t> index;
  std::vector<double> value;
};

struct ResampleScores {
  std::vector<double> f1_a, f1_b, acc_a, acc_b;
};

namespace serial {

// out(i, :) = sum_k rows[i].value[k] * params[rows[i].index[k]*dim .. +dim]
void sparse_project(std::span<const SparseRow> rows, std::span<const double> params,
                    std::size_t dim, Matrix& out);

// out = z * z^T
void gram(const Matrix& z, Matrix& out);

// Weighted F1 / accuracy of two prediction vectors on n_resamples bootstrap
// draws; resample r uses the stream sub_seed(seed, r).
ResampleScores bootstrap_scores(std::span<const int> gold, std::span<const int> pred_a,
                                std::span<const int> pred_b, std::size_t n_resamples,
                                std::uint64_t seed);

// Exact t-SNE gradient of KL(P || Q) for a 2-D layout; returns the
// normalizer Z = sum_{i != j} (1 + |y_i - y_j|^2)^-1.
double tsne_gradient(const Matrix& p, const Matrix& y, Matrix& grad);

}  // namespace serial

namespace omp {

void sparse_project(std::span<const SparseRow> rows, std::span<const double> params,
                    std::size_t dim, Matrix& out);
void gram(const Matrix& z, Matrix& out);
ResampleScores bootstrap_scores(std::span<const int> gold, std::span<const int> pred_a,
                                std::span<const int> pred_b, std::size_t n_resamples,
                                std::uint64_t seed);
double tsne_gradient(const Matrix& p, const Matrix& y, Matrix& grad);

}  // namespace omp

// Number of worker threads the OpenMP variants use (1 when built without
// OpenMP).
int max_threads();

}  // namespace claa::kernels
