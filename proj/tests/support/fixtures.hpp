#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace comboreg::testing {

/// Sylvester Hadamard matrix; columns are orthogonal with norm sqrt(n).
inline Eigen::MatrixXd hadamard(Eigen::Index n) {
  if (n < 1 || (n & (n - 1)) != 0) throw std::invalid_argument("hadamard: n must be a power of two");
  Eigen::MatrixXd H(1, 1);
  H(0, 0) = 1;
  while (H.rows() < n) {
    const Eigen::Index k = H.rows();
    Eigen::MatrixXd next(2 * k, 2 * k);
    next << H, H, H, -H;
    H = next;
  }
  return H;
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = z(rng);
  return M;
}

inline Eigen::VectorXd gaussian_vector(Eigen::Index n, std::uint64_t seed) {
  return gaussian_matrix(n, 1, seed).col(0);
}

}  // namespace comboreg::testing
