#include "claa/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include <Eigen/SVD>

#include "claa/error.hpp"
#include "claa/kernels.hpp"
#include "claa/util.hpp"

namespace claa {

namespace {

constexpr double kMinProbability = 1e-12;
constexpr double kEntropyTolerance = 1e-5;
constexpr int kSearchSteps = 64;
constexpr std::size_t kMomentumSwitch = 250;

// Row-conditional probabilities matching the target perplexity.
Matrix joint_probabilities(const Matrix& x, double perplexity) {
  const Eigen::Index n = x.rows();
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (x.row(i) - x.row(j)).squaredNorm();
  }
  const double target = std::log(perplexity);
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = INFINITY;
    for (int step = 0; step < kSearchSteps; ++step) {
      double sum = 0.0, weighted = 0.0;
      double dmin = INFINITY;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) dmin = std::min(dmin, d(i, j));
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double v = std::exp(-(d(i, j) - dmin) * beta);
        p(i, j) = v;
        sum += v;
        weighted += (d(i, j) - dmin) * v;
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      p.row(i) /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < kEntropyTolerance) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
  }
  Matrix joint = (p + p.transpose()) / (2.0 * static_cast<double>(n));
  joint = joint.cwiseMax(kMinProbability);
  joint.diagonal().setZero();
  return joint;
}

}  // namespace

std::string_view method_name(ProjectionMethod m) { return m == ProjectionMethod::Tsne ? "tsne" : "pca"; }

ProjectionMethod parse_method(std::string_view name) {
  const auto n = to_lower_ascii(name);
  if (n == "tsne" || n == "t-sne") return ProjectionMethod::Tsne;
  if (n == "pca") return ProjectionMethod::Pca;
  throw ValidationError("unknown projection method '" + std::string(name) + "' (expected tsne or pca)");
}

Matrix pca_2d(const Matrix& x) {
  if (x.rows() < 3) throw ValidationError("pca needs at least 3 points, got " + std::to_string(x.rows()));
  if (!x.allFinite()) throw ValidationError("pca: non-finite input");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix xc = x.rowwise() - mean;
  if (xc.squaredNorm() <= 1e-24 * std::max(1.0, x.squaredNorm())) {
    throw ValidationError("pca: input has zero variance");
  }
  Eigen::BDCSVD<Matrix> svd(xc, Eigen::ComputeThinV);
  Matrix v = svd.matrixV();
  const Eigen::Index k = std::min<Eigen::Index>(2, v.cols());
  Matrix out = Matrix::Zero(x.rows(), 2);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    if (v(arg, c) < 0) v.col(c) = -v.col(c);
    out.col(c) = xc * v.col(c);
  }
  return out;
}

Matrix tsne_2d(const Matrix& x, const ProjectionParams& params, double* effective_perplexity) {
  const Eigen::Index n = x.rows();
  if (!(params.perplexity > 0.0)) throw ValidationError("tsne: perplexity must be > 0");
  const double perplexity = std::min(params.perplexity, static_cast<double>(n - 1) / 3.0);
  if (n < 4 || perplexity < 1.0) {
    throw ValidationError("tsne needs more points: n=" + std::to_string(n) + " gives perplexity " +
                          std::to_string(perplexity) + " < 1");
  }
  if (effective_perplexity) *effective_perplexity = perplexity;
  const Matrix p = joint_probabilities(x, perplexity);

  Matrix y = pca_2d(x);
  const double sd = std::sqrt((y.col(0).array() - y.col(0).mean()).square().sum() / static_cast<double>(n));
  y *= 1e-4 / (sd > 0 ? sd : 1.0);

  Matrix update = Matrix::Zero(n, 2), gains = Matrix::Ones(n, 2), grad;
  const Matrix p_exaggerated = p * params.early_exaggeration;
  for (std::size_t it = 0; it < params.iterations; ++it) {
    const bool early = it < params.exaggeration_iterations;
    kernels::omp::tsne_gradient(early ? p_exaggerated : p, y, grad);
    const double momentum = it < kMomentumSwitch ? 0.5 : 0.8;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < 2; ++c) {
        const bool same = (grad(i, c) > 0) == (update(i, c) > 0);
        gains(i, c) = same ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
        update(i, c) = momentum * update(i, c) - params.learning_rate * gains(i, c) * grad(i, c);
      }
    }
    y += update;
    y.rowwise() -= y.colwise().mean();
  }
  if (!y.allFinite()) throw NumericError("tsne diverged to non-finite coordinates");
  return y;
}

ProjectedPoints project_2d(const EmbeddingMatrix& embeddings, std::span<const int> labels, ProjectionMethod method,
                           const ProjectionParams& params) {
  if (labels.size() != static_cast<std::size_t>(embeddings.rows())) {
    throw ValidationError("project_2d: labels not aligned with embeddings");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("project_2d: labels must be 0 or 1");
  }
  ProjectedPoints out;
  out.labels.assign(labels.begin(), labels.end());
  out.method = method;
  out.params = params;
  out.points = method == ProjectionMethod::Pca ? pca_2d(embeddings.values)
                                               : tsne_2d(embeddings.values, params, &out.effective_perplexity);
  return out;
}

double silhouette_score(const Matrix& points, std::span<const int> labels) {
  const Eigen::Index n = points.rows();
  if (labels.size() != static_cast<std::size_t>(n)) throw ValidationError("silhouette: labels not aligned");
  std::map<int, std::size_t> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) throw ValidationError("silhouette needs at least two classes");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::map<int, double> sum;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) sum[labels[static_cast<std::size_t>(j)]] += (points.row(i) - points.row(j)).norm();
    }
    const int own = labels[static_cast<std::size_t>(i)];
    if (sizes[own] < 2) continue;
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = INFINITY;
    for (const auto& [label, count] : sizes) {
      if (label != own) b = std::min(b, sum[label] / static_cast<double>(count));
    }
    const double m = std::max(a, b);
    if (m > 0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

void export_points(const ProjectedPoints& points, const std::filesystem::path& path) {
  if (points.points.cols() != 2 || static_cast<std::size_t>(points.points.rows()) != points.labels.size()) {
    throw ValidationError("export_points: expected n x 2 points with n labels");
  }
  if (!points.points.allFinite()) throw ValidationError("export_points: non-finite coordinates");
  std::string out = "x\ty\tlabel\n";
  char line[96];
  for (Eigen::Index i = 0; i < points.points.rows(); ++i) {
    std::snprintf(line, sizeof line, "%.6f\t%.6f\t%d\n", points.points(i, 0), points.points(i, 1),
                  points.labels[static_cast<std::size_t>(i)]);
    out += line;
  }
  write_file(path, out);
}

ProjectedPoints read_points(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x\ty\tlabel") {
    throw ValidationError(path.string() + ": expected header x<TAB>y<TAB>label");
  }
  std::vector<double> xs, ys;
  ProjectedPoints out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    double x, y;
    int label;
    if (!(fields >> x >> y >> label) || (label != 0 && label != 1)) {
      throw ValidationError(path.string() + ": line " + std::to_string(row) + ": malformed point");
    }
    xs.push_back(x);
    ys.push_back(y);
    out.labels.push_back(label);
  }
  out.points.resize(static_cast<Eigen::Index>(xs.size()), 2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.points(static_cast<Eigen::Index>(i), 0) = xs[i];
    out.points(static_cast<Eigen::Index>(i), 1) = ys[i];
  }
  return out;
}

nlohmann::json to_json(const ProjectionParams& p) {
  return {{"perplexity", p.perplexity},
          {"iterations", p.iterations},
          {"learning_rate", p.learning_rate},
          {"early_exaggeration", p.early_exaggeration},
          {"exaggeration_iterations", p.exaggeration_iterations},
          {"seed", p.seed}};
}

}  // namespace claa
