#include "claa/error.hpp"
#include "row_ops.hpp"

#include <string>

namespace claa::kernels {

namespace detail {

void check_bootstrap_inputs(std::span<const int> gold, std::span<const int> a, std::span<const int> b) {
  if (gold.size() != a.size() || gold.size() != b.size()) {
    throw ValidationError("misaligned inputs: gold " + std::to_string(gold.size()) + ", A " +
                          std::to_string(a.size()) + ", B " + std::to_string(b.size()));
  }
  if (gold.empty()) throw ValidationError("empty input");
}

}  // namespace detail

namespace serial {

void sparse_project(std::span<const SparseRow> rows, std::span<const double> params,
                    std::size_t dim, Matrix& out) {
  out.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail::project_row(rows[i], params, dim, out.row(static_cast<Eigen::Index>(i)).data());
  }
}

void gram(const Matrix& z, Matrix& out) {
  out.resize(z.rows(), z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) detail::gram_row(z, i, out);
}

ResampleScores bootstrap_scores(std::span<const int> gold, std::span<const int> pred_a,
                                std::span<const int> pred_b, std::size_t n_resamples,
                                std::uint64_t seed) {
  detail::check_bootstrap_inputs(gold, pred_a, pred_b);
  auto out = detail::make_scores(n_resamples);
  for (std::size_t r = 0; r < n_resamples; ++r) detail::resample_row(gold, pred_a, pred_b, seed, r, out);
  return out;
}

double tsne_gradient(const Matrix& p, const Matrix& y, Matrix& grad) {
  const Eigen::Index n = y.rows();
  std::vector<double> row_sums(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) row_sums[static_cast<std::size_t>(i)] = detail::tsne_row_sum(y, i);
  double z = 0.0;
  for (double s : row_sums) z += s;
  grad.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) detail::tsne_grad_row(p, y, z, i, grad);
  return z;
}

}  // namespace serial
}  // namespace claa::kernels
