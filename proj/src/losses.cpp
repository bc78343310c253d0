#include "claa/losses.hpp"

#include <cmath>
#include <string>

#include "claa/error.hpp"
#include "claa/kernels.hpp"

namespace claa {

namespace {

constexpr double kNormTolerance = 1e-6;
// Below this the Euclidean distance gradient is taken as zero.
constexpr double kMinDistance = 1e-12;

void check_index(std::size_t idx, Eigen::Index rows) {
  if (idx >= static_cast<std::size_t>(rows)) {
    throw ValidationError("loss index " + std::to_string(idx) + " out of range");
  }
}

}  // namespace

SupConResult supcon_loss(const Matrix& z, std::span<const int> labels, double temperature,
                         bool check_normalized) {
  const Eigen::Index n = z.rows();
  if (n < 2) throw ValidationError("supcon_loss needs at least 2 rows");
  if (static_cast<std::size_t>(n) != labels.size()) throw ValidationError("labels not aligned with rows");
  if (!(temperature > 0.0)) throw ValidationError("temperature must be > 0");
  if (check_normalized) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(z.row(i).norm() - 1.0) > kNormTolerance) {
        throw ValidationError("supcon_loss expects L2-normalized rows (row " + std::to_string(i) + ")");
      }
    }
  }

  Matrix sim;
  kernels::omp::gram(z, sim);
  sim /= temperature;

  SupConResult out;
  // d(loss)/d(sim_ia) accumulated per anchor, scaled after the anchor count is known.
  Matrix coeff = Matrix::Zero(n, n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t positives = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
      if (p != i && labels[static_cast<std::size_t>(p)] == labels[static_cast<std::size_t>(i)]) ++positives;
    }
    if (positives == 0) {
      ++out.anchors_skipped;
      continue;
    }
    ++out.anchors_used;
    double mx = -INFINITY;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a != i) mx = std::max(mx, sim(i, a));
    }
    double denom = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a != i) denom += std::exp(sim(i, a) - mx);
    }
    const double log_denom = mx + std::log(denom);
    const double inv_p = 1.0 / static_cast<double>(positives);
    double anchor_loss = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a == i) continue;
      const bool is_pos = labels[static_cast<std::size_t>(a)] == labels[static_cast<std::size_t>(i)];
      if (is_pos) anchor_loss -= inv_p * (sim(i, a) - log_denom);
      coeff(i, a) = std::exp(sim(i, a) - log_denom) - (is_pos ? inv_p : 0.0);
    }
    total += anchor_loss;
  }
  if (out.anchors_used == 0) {
    throw ValidationError("supcon_loss: no anchor has a same-label partner in the batch");
  }
  const double scale = 1.0 / static_cast<double>(out.anchors_used);
  out.value = total * scale;
  // sim_ia = z_i . z_a / tau, so dL/dz_i += c_ia z_a / tau and dL/dz_a += c_ia z_i / tau.
  coeff *= scale / temperature;
  out.grad = coeff * z + coeff.transpose() * z;
  return out;
}

LossResult triplet_loss(const Matrix& z, std::span<const Triplet> triplets, double margin) {
  if (triplets.empty()) throw ValidationError("triplet_loss needs at least one triplet");
  LossResult out;
  out.grad = Matrix::Zero(z.rows(), z.cols());
  const double inv = 1.0 / static_cast<double>(triplets.size());
  for (const auto& t : triplets) {
    check_index(t.anchor, z.rows());
    check_index(t.positive, z.rows());
    check_index(t.negative, z.rows());
    const auto a = static_cast<Eigen::Index>(t.anchor);
    const auto p = static_cast<Eigen::Index>(t.positive);
    const auto ng = static_cast<Eigen::Index>(t.negative);
    const Eigen::RowVectorXd ap = z.row(a) - z.row(p);
    const Eigen::RowVectorXd an = z.row(a) - z.row(ng);
    const double dap = ap.norm();
    const double dan = an.norm();
    const double hinge = dap - dan + margin;
    if (hinge <= 0.0) continue;
    out.value += hinge * inv;
    if (dap > kMinDistance) {
      const Eigen::RowVectorXd g = ap * (inv / dap);
      out.grad.row(a) += g;
      out.grad.row(p) -= g;
    }
    if (dan > kMinDistance) {
      const Eigen::RowVectorXd g = an * (inv / dan);
      out.grad.row(a) -= g;
      out.grad.row(ng) += g;
    }
  }
  return out;
}

TripletGrads triplet_loss(const Matrix& anchors, const Matrix& positives, const Matrix& negatives,
                          double margin) {
  const Eigen::Index n = anchors.rows();
  if (n < 1 || positives.rows() != n || negatives.rows() != n || positives.cols() != anchors.cols() ||
      negatives.cols() != anchors.cols()) {
    throw ValidationError("triplet_loss: anchors, positives and negatives must be aligned and non-empty");
  }
  Matrix z(3 * n, anchors.cols());
  z << anchors, positives, negatives;
  std::vector<Triplet> triplets;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto u = static_cast<std::size_t>(k), m = static_cast<std::size_t>(n);
    triplets.push_back({u, m + u, 2 * m + u});
  }
  auto r = triplet_loss(z, triplets, margin);
  return {r.value, r.grad.topRows(n), r.grad.middleRows(n, n), r.grad.bottomRows(n)};
}

LossResult pairwise_contrastive_loss(const Matrix& z, std::span<const Pair> pairs, double margin) {
  if (pairs.empty()) throw ValidationError("pairwise_contrastive_loss needs at least one pair");
  LossResult out;
  out.grad = Matrix::Zero(z.rows(), z.cols());
  const double inv = 1.0 / static_cast<double>(pairs.size());
  for (const auto& pr : pairs) {
    check_index(pr.first, z.rows());
    check_index(pr.second, z.rows());
    const auto i = static_cast<Eigen::Index>(pr.first);
    const auto j = static_cast<Eigen::Index>(pr.second);
    const Eigen::RowVectorXd diff = z.row(i) - z.row(j);
    const double d = diff.norm();
    if (pr.similar) {
      out.value += d * d * inv;
      out.grad.row(i) += 2.0 * inv * diff;
      out.grad.row(j) -= 2.0 * inv * diff;
    } else {
      const double gap = margin - d;
      if (gap <= 0.0) continue;
      out.value += gap * gap * inv;
      if (d > kMinDistance) {
        const Eigen::RowVectorXd g = diff * (-2.0 * gap * inv / d);
        out.grad.row(i) += g;
        out.grad.row(j) -= g;
      }
    }
  }
  return out;
}

PairGrads pairwise_contrastive_loss(const Matrix& first, const Matrix& second,
                                    std::span<const int> similar, double margin) {
  const Eigen::Index n = first.rows();
  if (n < 1 || second.rows() != n || second.cols() != first.cols() ||
      similar.size() != static_cast<std::size_t>(n)) {
    throw ValidationError("pairwise_contrastive_loss: inputs must be aligned and non-empty");
  }
  Matrix z(2 * n, first.cols());
  z << first, second;
  std::vector<Pair> pairs;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto u = static_cast<std::size_t>(k);
    pairs.push_back({u, static_cast<std::size_t>(n) + u, similar[u] != 0});
  }
  auto r = pairwise_contrastive_loss(z, pairs, margin);
  return {r.value, r.grad.topRows(n), r.grad.bottomRows(n)};
}

}  // namespace claa
