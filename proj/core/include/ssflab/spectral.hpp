#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ssflab/lattice.hpp"

namespace ssflab {

/// Real symmetric or complex Hermitian dense matrix.
using DenseMatrix = std::variant<Eigen::MatrixXd, Eigen::MatrixXcd>;

inline constexpr std::size_t kDefaultDenseCap = 4096;

/// Eigenvalues ascending (with multiplicity) and, optionally, the unitary
/// eigenvector matrix whose columns match them.
struct SpectralData {
  Eigen::VectorXd eigenvalues;
  std::optional<DenseMatrix> transform;

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  bool has_vectors() const noexcept { return transform.has_value(); }

  /// Spectrum-only data, for counting and trace formulas. Sorts its input.
  static SpectralData from_eigenvalues(std::vector<double> values);
};

Eigen::Index rows(const DenseMatrix& m);

/// Dense operator matrix (real unless the operator carries Peierls phases).
DenseMatrix operator_matrix(const LatticeOperator& op);

SpectralData eigen_decompose(const LatticeOperator& op, std::size_t dense_cap = kDefaultDenseCap);
SpectralData eigen_decompose(const DenseMatrix& h, std::size_t dense_cap = kDefaultDenseCap);
/// Eigenvalues only; several times cheaper than a full decomposition.
SpectralData spectrum(const LatticeOperator& op, std::size_t dense_cap = kDefaultDenseCap);
SpectralData spectrum(const DenseMatrix& h, std::size_t dense_cap = kDefaultDenseCap);

/// max |H - U diag(lambda) U^*|, entrywise.
double reconstruction_residual(const SpectralData& spec, const DenseMatrix& h);
/// max |U^* U - I|, entrywise.
double orthonormality_defect(const SpectralData& spec);

/// exp(-t H) = U exp(-t Lambda) U^*.
DenseMatrix semigroup(const SpectralData& spec, double t);

/// Arbitrary spectral function U f(Lambda) U^*.
DenseMatrix apply_function(const SpectralData& spec, const std::function<double(double)>& f);

DenseMatrix difference(const DenseMatrix& a, const DenseMatrix& b);

/// Zero-extends an operator on a restricted domain to the parent index set.
DenseMatrix embed(const DenseMatrix& m, std::span<const std::size_t> parent_index,
                  std::size_t parent_size);

/// Singular values, nonincreasing.
struct SingularValueList {
  std::vector<double> values;
};

SingularValueList singular_values(const DenseMatrix& m);

/// #{n : lambda_n <= E}.
std::size_t counting_function(const SpectralData& spec, double energy);

/// sum_n f(lambda_n) with compensated summation; throws on non-finite f.
double trace_function(const SpectralData& spec, const std::function<double(double)>& f);

/// Least-squares line log mu_n = log C - c n^alpha.
struct DecayFit {
  double alpha = 0.0;
  double rate = 0.0;        // c
  double prefactor = 0.0;   // C
  double r_squared = 0.0;
  std::size_t n_min = 0;    // 1-based, inclusive
  std::size_t n_max = 0;
  std::size_t points = 0;
  double floor = 0.0;
};

inline constexpr double kDefaultDecayFloor = 1e-12;
inline constexpr std::size_t kDefaultDecaySkip = 0;
inline constexpr std::size_t kMinDecayPoints = 5;

/// Fits over {n > skip_leading : mu_n > floor}. Throws NumericError with fewer
/// than kMinDecayPoints usable values.
DecayFit fit_decay(const SingularValueList& sv, double alpha, double floor = kDefaultDecayFloor,
                   std::size_t skip_leading = kDefaultDecaySkip);

}  // namespace ssflab
