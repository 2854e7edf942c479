#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/errors.hpp"

// Sobol sequence with Joe-Kuo direction numbers for up to 10 dimensions,
// generated in Gray-code order. The all-zeros point (index 0) is skipped, so
// every returned coordinate lies strictly inside (0,1).

namespace pceuq {

class SobolSequence {
public:
  static constexpr int max_dimension = 10;

  explicit SobolSequence(int dim) : dim_(dim), index_(0), state_(dim, 0) {
    if (dim < 1 || dim > max_dimension)
      throw DimensionUnsupported("Sobol direction numbers embedded for d <= 10");
    // Per-dimension primitive polynomial degree s, coefficient bits a and
    // initial direction integers m (Joe-Kuo new-joe-kuo-6 table).
    struct Row { int s; std::uint32_t a; std::uint32_t m[5]; };
    static const Row table[9] = {
        {1, 0, {1, 0, 0, 0, 0}},
        {2, 1, {1, 3, 0, 0, 0}},
        {3, 1, {1, 3, 1, 0, 0}},
        {3, 2, {1, 1, 1, 0, 0}},
        {4, 1, {1, 1, 3, 3, 0}},
        {4, 4, {1, 3, 5, 13, 0}},
        {5, 2, {1, 1, 5, 5, 17}},
        {5, 4, {1, 1, 5, 5, 5}},
        {5, 7, {1, 1, 7, 11, 19}},
    };
    v_.assign(dim, std::vector<std::uint32_t>(n_bits));
    // First dimension: van der Corput, v_k = 2^(32-k).
    for (int k = 0; k < n_bits; ++k) v_[0][k] = 1u << (31 - k);
    for (int j = 1; j < dim; ++j) {
      const Row& row = table[j - 1];
      std::vector<std::uint32_t> m(n_bits);
      for (int k = 0; k < row.s; ++k) m[k] = row.m[k];
      for (int k = row.s; k < n_bits; ++k) {
        std::uint32_t mk = m[k - row.s] ^ (m[k - row.s] << row.s);
        for (int i = 1; i < row.s; ++i)
          if ((row.a >> (row.s - 1 - i)) & 1u) mk ^= m[k - i] << i;
        m[k] = mk;
      }
      for (int k = 0; k < n_bits; ++k) v_[j][k] = m[k] << (31 - k);
    }
  }

  // Next point (Gray-code order); the first call returns the point of index 1.
  void next(double* out) {
    std::uint64_t n = ++index_;
    int c = 0;
    while (!(n & 1)) {
      n >>= 1;
      ++c;
    }
    for (int j = 0; j < dim_; ++j) {
      state_[j] ^= v_[j][c];
      out[j] = state_[j] * 0x1.0p-32;
    }
  }

private:
  static constexpr int n_bits = 32;
  int dim_;
  std::uint64_t index_;
  std::vector<std::uint32_t> state_;
  std::vector<std::vector<std::uint32_t>> v_;
};

inline Eigen::MatrixXd sobol_points(int d, std::int64_t n) {
  if (n < 0 || n > (std::int64_t(1) << 31))
    throw OutOfRange("sobol_points: n must lie in [0, 2^31]");
  SobolSequence seq(d);
  Eigen::MatrixXd pts(n, d);
  std::vector<double> row(d);
  for (std::int64_t i = 0; i < n; ++i) {
    seq.next(row.data());
    for (int j = 0; j < d; ++j) pts(i, j) = row[j];
  }
  return pts;
}

}  // namespace pceuq
