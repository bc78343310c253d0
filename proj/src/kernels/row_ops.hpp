#pragma once

// Per-row bodies shared by the serial and OpenMP kernels. Keeping one body
// per row is what makes the two variants bit-identical.

#include <cstddef>
#include <span>

#include "claa/kernels.hpp"
#include "claa/metrics.hpp"
#include "claa/util.hpp"

namespace claa::kernels::detail {

inline void project_row(const SparseRow& row, std::span<const double> params, std::size_t dim,
                        double* out) {
  for (std::size_t r = 0; r < dim; ++r) out[r] = 0.0;
  for (std::size_t k = 0; k < row.index.size(); ++k) {
    const double v = row.value[k];
    const double* col = params.data() + static_cast<std::size_t>(row.index[k]) * dim;
    for (std::size_t r = 0; r < dim; ++r) out[r] += v * col[r];
  }
}

inline void gram_row(const Matrix& z, Eigen::Index i, Matrix& out) {
  for (Eigen::Index j = 0; j < z.rows(); ++j) out(i, j) = z.row(i).dot(z.row(j));
}

inline void resample_row(std::span<const int> gold, std::span<const int> a, std::span<const int> b,
                         std::uint64_t seed, std::size_t r, ResampleScores& out) {
  Rng rng(sub_seed(seed, r));
  const std::size_t n = gold.size();
  ConfusionMatrix ca, cb;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = uniform_index(rng, n);
    const int g = gold[i];
    if (g == 1) {
      (a[i] == 1 ? ca.tp : ca.fn)++;
      (b[i] == 1 ? cb.tp : cb.fn)++;
    } else {
      (a[i] == 1 ? ca.fp : ca.tn)++;
      (b[i] == 1 ? cb.fp : cb.tn)++;
    }
  }
  out.f1_a[r] = weighted_prf(ca).f1;
  out.f1_b[r] = weighted_prf(cb).f1;
  out.acc_a[r] = accuracy(ca);
  out.acc_b[r] = accuracy(cb);
}

inline double tsne_row_sum(const Matrix& y, Eigen::Index i) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    if (j == i) continue;
    const double d = (y.row(i) - y.row(j)).squaredNorm();
    s += 1.0 / (1.0 + d);
  }
  return s;
}

inline void tsne_grad_row(const Matrix& p, const Matrix& y, double z, Eigen::Index i, Matrix& grad) {
  double gx = 0.0, gy = 0.0;
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    if (j == i) continue;
    const double dx = y(i, 0) - y(j, 0);
    const double dy = y(i, 1) - y(j, 1);
    const double num = 1.0 / (1.0 + dx * dx + dy * dy);
    const double mult = (p(i, j) - num / z) * num;
    gx += mult * dx;
    gy += mult * dy;
  }
  grad(i, 0) = 4.0 * gx;
  grad(i, 1) = 4.0 * gy;
}

inline ResampleScores make_scores(std::size_t n) {
  ResampleScores s;
  s.f1_a.resize(n);
  s.f1_b.resize(n);
  s.acc_a.resize(n);
  s.acc_b.resize(n);
  return s;
}

void check_bootstrap_inputs(std::span<const int> gold, std::span<const int> a, std::span<const int> b);

}  // namespace claa::kernels::detail
