#include "ssflab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "ssflab/errors.hpp"
#include "ssflab/numerics.hpp"
#include "ssflab/summation.hpp"

namespace ssflab {
namespace {

void check_cap(Eigen::Index n, std::size_t cap) {
  if (static_cast<std::size_t>(n) > cap) {
    throw NumericError("dimension " + std::to_string(n) + " exceeds dense cap " +
                       std::to_string(cap));
  }
}

template <class Matrix>
void check_hermitian(const Matrix& h) {
  if (h.rows() != h.cols()) throw NumericError("matrix is not square");
  if (!h.allFinite()) throw NumericError("matrix has non-finite entries");
  const double scale = 1.0 + h.cwiseAbs().maxCoeff();
  const double asym = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw NumericError("matrix is not Hermitian (max |H - H^*| = " + std::to_string(asym) + ")");
  }
}

template <class Matrix>
SpectralData decompose(const Matrix& h, std::size_t cap, bool vectors) {
  check_cap(h.rows(), cap);
  check_hermitian(h);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(
      h, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
  SpectralData out;
  out.eigenvalues = solver.eigenvalues();  // ascending
  if (vectors) out.transform = DenseMatrix(solver.eigenvectors());
  return out;
}

template <class Matrix>
Matrix spectral_map(const Matrix& u, const Eigen::VectorXd& values) {
  return u * values.asDiagonal() * u.adjoint();
}

}  // namespace

SpectralData SpectralData::from_eigenvalues(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  SpectralData s;
  s.eigenvalues = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                    static_cast<Eigen::Index>(values.size()));
  return s;
}

Eigen::Index rows(const DenseMatrix& m) {
  return std::visit([](const auto& x) { return x.rows(); }, m);
}

DenseMatrix operator_matrix(const LatticeOperator& op) {
  if (op.is_magnetic()) return op.complex_matrix();
  return op.real_matrix();
}

SpectralData eigen_decompose(const DenseMatrix& h, std::size_t dense_cap) {
  return std::visit([&](const auto& m) { return decompose(m, dense_cap, true); }, h);
}

SpectralData eigen_decompose(const LatticeOperator& op, std::size_t dense_cap) {
  check_cap(static_cast<Eigen::Index>(op.size()), dense_cap);
  return eigen_decompose(operator_matrix(op), dense_cap);
}

SpectralData spectrum(const DenseMatrix& h, std::size_t dense_cap) {
  return std::visit([&](const auto& m) { return decompose(m, dense_cap, false); }, h);
}

SpectralData spectrum(const LatticeOperator& op, std::size_t dense_cap) {
  check_cap(static_cast<Eigen::Index>(op.size()), dense_cap);
  return spectrum(operator_matrix(op), dense_cap);
}

double reconstruction_residual(const SpectralData& spec, const DenseMatrix& h) {
  if (!spec.transform) throw NumericError("spectral data carries no eigenvectors");
  return std::visit(
      [&](const auto& u, const auto& m) -> double {
        using U = std::decay_t<decltype(u)>;
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<U, M>) {
          return (m - spectral_map(u, spec.eigenvalues)).cwiseAbs().maxCoeff();
        } else {
          const Eigen::MatrixXcd uc = u.template cast<std::complex<double>>();
          const Eigen::MatrixXcd mc = m.template cast<std::complex<double>>();
          return (mc - spectral_map(uc, spec.eigenvalues)).cwiseAbs().maxCoeff();
        }
      },
      *spec.transform, h);
}

double orthonormality_defect(const SpectralData& spec) {
  if (!spec.transform) throw NumericError("spectral data carries no eigenvectors");
  return std::visit(
      [](const auto& u) {
        using U = std::decay_t<decltype(u)>;
        const U gram = u.adjoint() * u;
        return (gram - U::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
      },
      *spec.transform);
}

DenseMatrix apply_function(const SpectralData& spec, const std::function<double(double)>& f) {
  if (!spec.transform) throw NumericError("spectral data carries no eigenvectors");
  const Eigen::VectorXd mapped = spec.eigenvalues.unaryExpr(f);
  return std::visit([&](const auto& u) -> DenseMatrix { return spectral_map(u, mapped); },
                    *spec.transform);
}

DenseMatrix semigroup(const SpectralData& spec, double t) {
  if (!(t > 0.0)) throw ValidationError("semigroup time must be positive");
  return apply_function(spec, [t](double x) { return std::exp(-t * x); });
}

DenseMatrix difference(const DenseMatrix& a, const DenseMatrix& b) {
  if (rows(a) != rows(b)) throw ValidationError("matrix dimensions differ");
  return std::visit(
      [](const auto& x, const auto& y) -> DenseMatrix {
        using X = std::decay_t<decltype(x)>;
        using Y = std::decay_t<decltype(y)>;
        if constexpr (std::is_same_v<X, Y>) {
          return X(x - y);
        } else {
          return Eigen::MatrixXcd(x.template cast<std::complex<double>>() -
                                  y.template cast<std::complex<double>>());
        }
      },
      a, b);
}

DenseMatrix embed(const DenseMatrix& m, std::span<const std::size_t> parent_index,
                  std::size_t parent_size) {
  if (static_cast<std::size_t>(rows(m)) != parent_index.size()) {
    throw ValidationError("index map does not match matrix dimension");
  }
  return std::visit(
      [&](const auto& x) -> DenseMatrix {
        using X = std::decay_t<decltype(x)>;
        const auto n = static_cast<Eigen::Index>(parent_size);
        X out = X::Zero(n, n);
        for (std::size_t i = 0; i < parent_index.size(); ++i) {
          for (std::size_t j = 0; j < parent_index.size(); ++j) {
            out(static_cast<Eigen::Index>(parent_index[i]),
                static_cast<Eigen::Index>(parent_index[j])) =
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          }
        }
        return out;
      },
      m);
}

SingularValueList singular_values(const DenseMatrix& m) {
  return std::visit(
      [](const auto& x) {
        using X = std::decay_t<decltype(x)>;
        if (!x.allFinite()) throw ValidationError("matrix has non-finite entries");
        SingularValueList out;
        if (x.size() == 0) return out;
        Eigen::BDCSVD<X> svd(x);
        const Eigen::VectorXd s = svd.singularValues();  // nonincreasing
        out.values.assign(s.data(), s.data() + s.size());
        return out;
      },
      m);
}

std::size_t counting_function(const SpectralData& spec, double energy) {
  const auto* begin = spec.eigenvalues.data();
  const auto* end = begin + spec.eigenvalues.size();
  return static_cast<std::size_t>(std::upper_bound(begin, end, energy) - begin);
}

double trace_function(const SpectralData& spec, const std::function<double(double)>& f) {
  CompensatedSum sum;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
    const double v = f(spec.eigenvalues[i]);
    if (!std::isfinite(v)) throw NumericError("trace function is not finite on the spectrum");
    sum += v;
  }
  return sum.value();
}

DecayFit fit_decay(const SingularValueList& sv, double alpha, double floor,
                   std::size_t skip_leading) {
  if (!(alpha > 0.0)) throw ValidationError("decay exponent must be positive");
  std::vector<double> xs;
  std::vector<double> ys;
  DecayFit fit;
  fit.alpha = alpha;
  fit.floor = floor;
  for (std::size_t i = 0; i < sv.values.size(); ++i) {
    const std::size_t n = i + 1;
    if (n <= skip_leading || !(sv.values[i] > floor)) continue;
    if (xs.empty()) fit.n_min = n;
    fit.n_max = n;
    xs.push_back(std::pow(static_cast<double>(n), alpha));
    ys.push_back(std::log(sv.values[i]));
  }
  if (xs.size() < kMinDecayPoints) {
    throw NumericError("too few singular values above floor for a decay fit (" +
                       std::to_string(xs.size()) + " < " + std::to_string(kMinDecayPoints) + ")");
  }
  const LineFit line = fit_line(xs, ys);
  fit.rate = -line.slope;
  fit.prefactor = std::exp(line.intercept);
  fit.r_squared = line.r_squared;
  fit.points = xs.size();
  return fit;
}

}  // namespace ssflab
