#ifndef OMNIBUS_DESIGN_HPP
#define OMNIBUS_DESIGN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

namespace omnibus {

// Balanced orthogonal designs for K binary 0/1 covariates. Columns are
// pairwise balanced (each of the four level pairs appears equally often),
// which keeps the sample variance of X*beta at sum(beta_j^2)/4 exactly.
//
// Building blocks stacked to reach the requested size:
//   K = 1        : the 2-run {0, 1} block
//   K = 2        : the 4-run full factorial
//   K = 3        : the 4-run half fraction (c = a xor b)
//   K in 4..7    : 8-run Hadamard-derived runs, plus one 12-run
//                  Plackett-Burman block when N = 4 mod 8
// Rows not fitting a whole block are dropped, so the effective N is the
// largest multiple of the block granularity not exceeding the request.

namespace detail {

// 12-run Plackett-Burman design, 11 factors, strength 2.
inline constexpr std::uint8_t kPb12[12][11] = {
    {1, 1, 0, 1, 1, 1, 0, 0, 0, 1, 0}, {0, 1, 1, 0, 1, 1, 1, 0, 0, 0, 1},
    {1, 0, 1, 1, 0, 1, 1, 1, 0, 0, 0}, {0, 1, 0, 1, 1, 0, 1, 1, 1, 0, 0},
    {0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 0}, {0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1},
    {1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1}, {1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1},
    {1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 0}, {0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1},
    {1, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}};

// 8-run block: full factorial on (a, b, c) extended with interaction
// columns, ordered so the first four give a resolution-IV fraction.
inline int oa8_column(int run, int col) {
  const int a = run & 1;
  const int b = (run >> 1) & 1;
  const int c = (run >> 2) & 1;
  switch (col) {
    case 0: return a;
    case 1: return b;
    case 2: return c;
    case 3: return a ^ b ^ c;
    case 4: return a ^ b;
    case 5: return a ^ c;
    default: return b ^ c;
  }
}

}  // namespace detail

/// Block granularity of the balanced design for K covariates.
inline std::int64_t design_granularity(std::int64_t k) {
  if (k == 1) return 2;
  if (k == 2 || k == 3) return 4;
  if (k >= 4 && k <= 7) return 4;  // mixed 8/12-run blocks
  throw std::invalid_argument("design: K must be between 1 and 7");
}

/// Largest N' <= n_requested the design can realize exactly.
inline std::int64_t design_effective_n(std::int64_t n_requested, std::int64_t k) {
  const std::int64_t gran = design_granularity(k);
  std::int64_t n = (n_requested / gran) * gran;
  if (k >= 4) {
    // 8a + 12b with b in {0, 1} covers every multiple of 4 from 8 up
    if (n % 8 == 4 && n < 12) n -= 4;
    if (n < 8) n = 0;
  }
  if (n < k + 2) {
    throw std::invalid_argument("design: N too small for a balanced design with this K");
  }
  return n;
}

/// The fixed design matrix (0/1 entries, no intercept column).
inline Eigen::MatrixXd design_matrix(std::int64_t n_requested, std::int64_t k) {
  const std::int64_t n = design_effective_n(n_requested, k);
  Eigen::MatrixXd x(n, k);
  std::int64_t row = 0;
  if (k == 1) {
    for (; row < n; ++row) x(row, 0) = static_cast<double>(row & 1);
    return x;
  }
  if (k == 2 || k == 3) {
    for (; row < n; ++row) {
      const int cell = static_cast<int>(row & 3);
      const int a = cell & 1;
      const int b = (cell >> 1) & 1;
      x(row, 0) = a;
      x(row, 1) = b;
      if (k == 3) x(row, 2) = a ^ b;
    }
    return x;
  }
  const std::int64_t pb_blocks = (n % 8 == 4) ? 1 : 0;
  const std::int64_t oa8_blocks = (n - 12 * pb_blocks) / 8;
  for (std::int64_t blk = 0; blk < oa8_blocks; ++blk) {
    for (int run = 0; run < 8; ++run, ++row) {
      for (int col = 0; col < k; ++col) {
        x(row, col) = detail::oa8_column(run, col);
      }
    }
  }
  for (std::int64_t blk = 0; blk < pb_blocks; ++blk) {
    for (int run = 0; run < 12; ++run, ++row) {
      for (int col = 0; col < k; ++col) {
        x(row, col) = detail::kPb12[run][col];
      }
    }
  }
  return x;
}

}  // namespace omnibus

#endif  // OMNIBUS_DESIGN_HPP
