#include "dqlap/pca.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "dqlap/errors.hpp"
#include "dqlap/rng.hpp"

namespace dqlap {

namespace {

constexpr double kEigenTolerance = 1e-10;
constexpr int kMaxSweeps = 1000;

// y = C * x for a dense symmetric matrix stored row-major.
void matvec(const std::vector<double>& c, std::size_t n,
            const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    const double* row = c.data() + r * n;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[r] = acc;
  }
}

double norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (const double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void fix_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  }
  if (v[arg] < 0.0) {
    for (double& x : v) x = -x;
  }
}

// Deterministic unit vector orthogonal to `other` (nullptr for none), used
// when power iteration lands on a zero image (rank-deficient directions).
std::vector<double> orthonormal_fallback(std::size_t n, const std::vector<double>* other) {
  for (std::size_t axis = 0; axis < n; ++axis) {
    std::vector<double> v(n, 0.0);
    v[axis] = 1.0;
    if (other) {
      const double proj = dot(v, *other);
      for (std::size_t i = 0; i < n; ++i) v[i] -= proj * (*other)[i];
    }
    const double len = norm(v);
    if (len > 1e-9) {
      for (double& x : v) x /= len;
      return v;
    }
  }
  throw std::logic_error("pca: no orthonormal fallback direction");
}

// Dominant eigenpair of the symmetric matrix c, re-orthogonalized against
// `previous` every sweep when given.
std::pair<std::vector<double>, double> dominant_eigenpair(
    const std::vector<double>& c, std::size_t n, const std::vector<double>* previous) {
  std::mt19937_64 rng(0x70ca0001u);
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * uniform_double(rng) - 1.0;
  if (previous) {
    const double proj = dot(v, *previous);
    for (std::size_t i = 0; i < n; ++i) v[i] -= proj * (*previous)[i];
  }
  double len = norm(v);
  if (len < 1e-12) {
    v = orthonormal_fallback(n, previous);
  } else {
    for (double& x : v) x /= len;
  }

  std::vector<double> next(n);
  double eigenvalue = 0.0;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    matvec(c, n, v, next);
    if (previous) {
      const double proj = dot(next, *previous);
      for (std::size_t i = 0; i < n; ++i) next[i] -= proj * (*previous)[i];
    }
    len = norm(next);
    if (len < 1e-300) {
      return {orthonormal_fallback(n, previous), 0.0};
    }
    for (double& x : next) x /= len;
    // Vector movement, insensitive to a sign flip of the iterate.
    double move_plus = 0.0, move_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      move_plus = std::max(move_plus, std::abs(next[i] - v[i]));
      move_minus = std::max(move_minus, std::abs(next[i] + v[i]));
    }
    const double vec_change = std::min(move_plus, move_minus);
    v.swap(next);
    matvec(c, n, v, next);
    const double lambda = dot(v, next);
    // The Rayleigh quotient settles quadratically faster than the vector, so
    // the eigenvalue test alone would stop while the component is still off.
    if (std::abs(lambda - eigenvalue) <= kEigenTolerance && vec_change <= 1e-9) {
      eigenvalue = lambda;
      break;
    }
    eigenvalue = lambda;
  }
  return {std::move(v), eigenvalue};
}

}  // namespace

Projection2D pca_project(const Dataset& data) {
  const std::size_t n = data.size();
  const std::size_t f = data.feature_count;
  if (n < 2 || f < 2) {
    throw std::invalid_argument("pca_project: need at least 2 samples and 2 features");
  }

  std::vector<double> mean(f, 0.0);
  for (const auto& s : data.samples) {
    for (std::size_t j = 0; j < f; ++j) mean[j] += s.features[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<double> centered(n * f);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j) {
      centered[i * f + j] = data.samples[i].features[j] - mean[j];
    }
  }

  // Sample covariance, upper triangle mirrored.
  std::vector<double> cov(f * f, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = centered.data() + i * f;
    for (std::size_t a = 0; a < f; ++a) {
      for (std::size_t b = a; b < f; ++b) {
        cov[a * f + b] += row[a] * row[b];
      }
    }
  }
  for (std::size_t a = 0; a < f; ++a) {
    for (std::size_t b = a; b < f; ++b) {
      cov[a * f + b] /= static_cast<double>(n - 1);
      cov[b * f + a] = cov[a * f + b];
    }
  }

  double total_variance = 0.0;
  for (std::size_t a = 0; a < f; ++a) total_variance += cov[a * f + a];
  if (total_variance <= 0.0) {
    throw DataError("pca_project: degenerate input, all points identical");
  }

  Projection2D out;
  auto [first, lambda1] = dominant_eigenpair(cov, f, nullptr);

  // Deflate and extract the second direction.
  std::vector<double> deflated = cov;
  for (std::size_t a = 0; a < f; ++a) {
    for (std::size_t b = 0; b < f; ++b) {
      deflated[a * f + b] -= lambda1 * first[a] * first[b];
    }
  }
  auto [second, lambda2] = dominant_eigenpair(deflated, f, &first);

  if (lambda2 > lambda1) {
    std::swap(first, second);
    std::swap(lambda1, lambda2);
  }
  fix_sign(first);
  fix_sign(second);

  out.components[0] = std::move(first);
  out.components[1] = std::move(second);
  out.explained_variance[0] = std::max(lambda1, 0.0);
  out.explained_variance[1] = std::max(lambda2, 0.0);

  out.points.reserve(n);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = centered.data() + i * f;
    std::array<double, 2> p{};
    for (std::size_t j = 0; j < f; ++j) {
      p[0] += row[j] * out.components[0][j];
      p[1] += row[j] * out.components[1][j];
    }
    out.points.push_back(p);
    out.labels.push_back(data.samples[i].label);
  }
  return out;
}

void write_projection_csv(const Projection2D& projection,
                          const std::vector<int>& labels,
                          const std::filesystem::path& path) {
  if (labels.size() != projection.points.size()) {
    throw std::invalid_argument("write_projection_csv: label count mismatch");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out.is_open()) {
    throw DataError("cannot write projection file: " + path.string());
  }
  out << "x,y,label\n";
  char buf[32];
  for (std::size_t i = 0; i < projection.points.size(); ++i) {
    auto [p1, e1] = std::to_chars(buf, buf + sizeof(buf), projection.points[i][0]);
    out.write(buf, p1 - buf);
    out.put(',');
    auto [p2, e2] = std::to_chars(buf, buf + sizeof(buf), projection.points[i][1]);
    out.write(buf, p2 - buf);
    out.put(',');
    out << labels[i] << '\n';
  }
  if (!out) {
    throw DataError("projection write failed: " + path.string());
  }
}

}  // namespace dqlap
