#pragma once

#include "gapscope/linalg.hpp"

#include <random>

namespace testing {

inline gapscope::Matrix random_sym(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  gapscope::Matrix M(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) M(i, j) = M(j, i) = g(rng);
  return M;
}

inline gapscope::Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  gapscope::Matrix M(r, c);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
  return M;
}

inline gapscope::Matrix random_pd(std::mt19937_64& rng, Eigen::Index n, double shift = 0.1) {
  const gapscope::Matrix B = random_matrix(rng, n, n);
  return B * B.transpose() + shift * gapscope::Matrix::Identity(n, n);
}

}  // namespace testing
