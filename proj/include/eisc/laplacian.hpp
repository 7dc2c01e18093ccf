#pragma once

// Combinatorial and normalized graph Laplacians and their eigenvalue spectra.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eisc/corpus.hpp"
#include "eisc/error.hpp"
#include "eisc/io.hpp"

namespace eisc {

enum class LaplacianKind { combinatorial, normalized };

inline std::string_view to_string(LaplacianKind kind) {
  return kind == LaplacianKind::combinatorial ? "combinatorial" : "normalized";
}

inline LaplacianKind parse_laplacian_kind(std::string_view name) {
  if (name == "combinatorial") return LaplacianKind::combinatorial;
  if (name == "normalized") return LaplacianKind::normalized;
  throw InvalidArgument("unknown Laplacian kind '" + std::string(name) + "'");
}

/// Degrees at or below this are treated as isolated nodes.
inline constexpr double kDegreeEpsilon = 1e-12;

struct Laplacian {
  LaplacianKind kind = LaplacianKind::combinatorial;
  Eigen::MatrixXd values;
  Eigen::VectorXd degrees;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

inline Eigen::VectorXd degrees_of(const SimilarityMatrix& s) {
  return s.values().rowwise().sum();
}

/// L = T - S with T the diagonal degree matrix.
inline Laplacian combinatorial_laplacian(const SimilarityMatrix& s) {
  Laplacian lap;
  lap.kind = LaplacianKind::combinatorial;
  lap.degrees = degrees_of(s);
  lap.values = -s.values();
  lap.values.diagonal() += lap.degrees;
  return lap;
}

/// I - T^(-1/2) S T^(-1/2). Rows and columns of isolated nodes are zero,
/// including the diagonal entry.
inline Laplacian normalized_laplacian(const SimilarityMatrix& s) {
  Laplacian lap;
  lap.kind = LaplacianKind::normalized;
  lap.degrees = degrees_of(s);
  const Eigen::Index n = s.values().rows();
  const auto& t = lap.degrees;
  lap.values = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (t(j) <= kDegreeEpsilon) continue;
    lap.values(j, j) = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == j || t(k) <= kDegreeEpsilon) continue;
      lap.values(j, k) = -s.values()(j, k) / std::sqrt(t(j) * t(k));
    }
  }
  return lap;
}

inline Laplacian laplacian_of(const SimilarityMatrix& s, LaplacianKind kind) {
  return kind == LaplacianKind::combinatorial ? combinatorial_laplacian(s)
                                              : normalized_laplacian(s);
}

/// Eigenvalues of a Laplacian in non-decreasing order.
class Spectrum {
 public:
  Spectrum() = default;

  /// Validates ordering; does not clamp.
  Spectrum(std::vector<double> eigenvalues, LaplacianKind kind)
      : eigenvalues_(std::move(eigenvalues)), kind_(kind) {
    if (!std::is_sorted(eigenvalues_.begin(), eigenvalues_.end())) {
      throw InvalidArgument("spectrum must be non-decreasing");
    }
    for (double v : eigenvalues_) {
      if (!std::isfinite(v)) throw InvalidArgument("spectrum must be finite");
    }
  }

  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  std::size_t size() const { return eigenvalues_.size(); }
  LaplacianKind kind() const { return kind_; }
  double largest() const { return eigenvalues_.empty() ? 0.0 : eigenvalues_.back(); }

 private:
  std::vector<double> eigenvalues_;
  LaplacianKind kind_ = LaplacianKind::combinatorial;
};

/// Scale-aware tolerance for treating an eigenvalue as zero.
inline double eigen_tolerance(double largest) {
  return 1e-8 * std::max(1.0, largest);
}

inline Spectrum spectrum(const Laplacian& lap) {
  if (lap.values.rows() == 0) return Spectrum({}, lap.kind);
  const Eigen::MatrixXd sym = 0.5 * (lap.values + lap.values.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw EigensolverFailure("symmetric eigendecomposition did not converge");
  }
  std::vector<double> ev(solver.eigenvalues().data(),
                         solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(ev.begin(), ev.end());
  const double tol = eigen_tolerance(ev.back());
  for (double& v : ev) {
    if (v < 0.0 && v > -tol) v = 0.0;
  }
  return Spectrum(std::move(ev), lap.kind);
}

/// Number of eigenvalues within the zero tolerance.
inline std::size_t zero_multiplicity(const Spectrum& e) {
  const double tol = eigen_tolerance(e.largest());
  return static_cast<std::size_t>(std::count_if(
      e.eigenvalues().begin(), e.eigenvalues().end(),
      [tol](double v) { return std::abs(v) <= tol; }));
}

inline std::string spectrum_to_csv(const Spectrum& e) {
  std::string out = "index,eigenvalue\n";
  for (std::size_t i = 0; i < e.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += io::format_real(e.eigenvalues()[i]);
    out += '\n';
  }
  return out;
}

}  // namespace eisc
