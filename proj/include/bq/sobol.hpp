#ifndef BQ_SOBOL_HPP
#define BQ_SOBOL_HPP

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace bq {

// Sobol low-discrepancy sequence in Gray-code order, up to 16 dimensions.
// An optional per-dimension digital shift (XOR with a random bit pattern)
// randomizes the sequence while preserving its equidistribution, which is
// what the QMC error estimation relies on.
class SobolSequence {
 public:
  static constexpr int kMaxDim = 16;
  static constexpr int kBits = 52;

  explicit SobolSequence(int dim, std::uint64_t scramble_seed = 0);

  // Next point in [0,1)^dim; the all-zero index-0 point is skipped.
  Eigen::VectorXd next();

  // dim x n matrix of the next n points, one per column.
  Eigen::MatrixXd take(int n);

 private:
  int dim_;
  std::uint64_t index_ = 0;
  std::vector<std::uint64_t> state_;
  std::vector<std::uint64_t> shift_;
  std::vector<std::array<std::uint64_t, kBits>> dirs_;
};

}  // namespace bq

#endif  // BQ_SOBOL_HPP
