#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "ssflab/rng.hpp"
#include "ssflab/spectral.hpp"

namespace testing {

inline std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

inline std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline Eigen::MatrixXd random_symmetric(int n, ssflab::StreamRng& rng) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = 2.0 * rng.uniform01() - 1.0;
  return m;
}

inline ssflab::SpectralData spec_of(const Eigen::MatrixXd& m) {
  return ssflab::eigen_decompose(ssflab::DenseMatrix(m));
}

inline ssflab::SpectralData diag_spec(std::vector<double> v) {
  return ssflab::SpectralData::from_eigenvalues(std::move(v));
}

}  // namespace testing
