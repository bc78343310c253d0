#include "row_ops.hpp"

#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace claa::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace omp {

void sparse_project(std::span<const SparseRow> rows, std::span<const double> params,
                    std::size_t dim, Matrix& out) {
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
  out.resize(n, static_cast<Eigen::Index>(dim));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    detail::project_row(rows[static_cast<std::size_t>(i)], params, dim, out.row(i).data());
  }
}

void gram(const Matrix& z, Matrix& out) {
  const Eigen::Index n = z.rows();
  out.resize(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) detail::gram_row(z, i, out);
}

ResampleScores bootstrap_scores(std::span<const int> gold, std::span<const int> pred_a,
                                std::span<const int> pred_b, std::size_t n_resamples,
                                std::uint64_t seed) {
  detail::check_bootstrap_inputs(gold, pred_a, pred_b);
  auto out = detail::make_scores(n_resamples);
  const auto n = static_cast<std::ptrdiff_t>(n_resamples);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    detail::resample_row(gold, pred_a, pred_b, seed, static_cast<std::size_t>(r), out);
  }
  return out;
}

double tsne_gradient(const Matrix& p, const Matrix& y, Matrix& grad) {
  const Eigen::Index n = y.rows();
  std::vector<double> row_sums(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) row_sums[static_cast<std::size_t>(i)] = detail::tsne_row_sum(y, i);
  double z = 0.0;
  for (double s : row_sums) z += s;
  grad.resize(n, 2);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) detail::tsne_grad_row(p, y, z, i, grad);
  return z;
}

}  // namespace omp
}  // namespace claa::kernels
