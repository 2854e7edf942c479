#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/errors.hpp"

// Kendall's tau-a: (concordant - discordant) / C(n,2), tied pairs counted as
// neither. Computed in O(n log n) with Knight's merge-sort method.

namespace pceuq {

namespace detail {

// Counts strict inversions (a[i] > a[j] for i < j) by merge sort.
inline std::uint64_t count_inversions(std::vector<double>& a, std::vector<double>& buf) {
  std::uint64_t swaps = 0;
  std::size_t n = a.size();
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      std::size_t mid = lo + width;
      std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (a[j] < a[i]) {
          swaps += mid - i;
          buf[k++] = a[j++];
        } else {
          buf[k++] = a[i++];
        }
      }
      while (i < mid) buf[k++] = a[i++];
      while (j < hi) buf[k++] = a[j++];
      std::copy(buf.begin() + lo, buf.begin() + hi, a.begin() + lo);
    }
  }
  return swaps;
}

inline std::uint64_t tie_pair_count(const std::vector<double>& sorted) {
  std::uint64_t total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    std::uint64_t t = j - i;
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

}  // namespace detail

inline double kendall_tau(const double* x, const double* y, std::size_t n) {
  if (n < 2) throw InputError("kendall_tau: need at least 2 observations");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  std::uint64_t n0 = std::uint64_t(n) * (n - 1) / 2;
  std::uint64_t n1 = 0, n3 = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i + 1;
      while (j < n && x[order[j]] == x[order[i]]) ++j;
      std::uint64_t t = j - i;
      n1 += t * (t - 1) / 2;
      std::size_t a = i;
      while (a < j) {
        std::size_t b = a + 1;
        while (b < j && y[order[b]] == y[order[a]]) ++b;
        std::uint64_t u = b - a;
        n3 += u * (u - 1) / 2;
        a = b;
      }
      i = j;
    }
  }

  std::vector<double> ys(n), buf(n), ysorted(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  ysorted = ys;
  std::sort(ysorted.begin(), ysorted.end());
  std::uint64_t n2 = detail::tie_pair_count(ysorted);
  std::uint64_t swaps = detail::count_inversions(ys, buf);

  // concordant - discordant; x-tied and y-tied pairs are neither
  double num = double(n0) - double(n1) - double(n2) + double(n3) - 2.0 * double(swaps);
  return num / double(n0);
}

inline double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw LengthMismatch("kendall_tau: unequal lengths");
  return kendall_tau(x.data(), y.data(), x.size());
}

inline double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw LengthMismatch("kendall_tau: unequal lengths");
  return kendall_tau(x.data(), y.data(), static_cast<std::size_t>(x.size()));
}

// Matrix of pairwise taus between columns.
inline Eigen::MatrixXd kendall_tau_matrix(const Eigen::MatrixXd& data) {
  int d = static_cast<int>(data.cols());
  Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double t = kendall_tau(data.col(i).eval(), data.col(j).eval());
      tau(i, j) = tau(j, i) = t;
    }
  return tau;
}

}  // namespace pceuq
