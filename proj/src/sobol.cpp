#include "bq/sobol.hpp"

#include "bq/rng.hpp"

#include <bit>
#include <stdexcept>

namespace bq {

namespace {

struct PolySpec {
  int degree;
  std::uint64_t coeff;  // interior coefficients of the primitive polynomial
};

// Primitive polynomials over GF(2), one per dimension. The first six rows
// (with the m-initializers below) are the classic Bratley-Fox values; the
// remaining rows are the degree-5/6 primitive polynomials from the same
// catalogue.
constexpr PolySpec kPolys[SobolSequence::kMaxDim] = {
    {1, 0},  {2, 1},  {3, 1},  {3, 2},  {4, 1},  {4, 4},
    {5, 2},  {5, 4},  {5, 7},  {5, 11}, {5, 13}, {5, 14},
    {6, 1},  {6, 13}, {6, 16}, {6, 19},
};

constexpr std::uint64_t kInitM[6][4] = {
    {1, 0, 0, 0}, {1, 3, 0, 0}, {1, 3, 7, 0},
    {1, 3, 3, 0}, {1, 1, 3, 13}, {1, 1, 5, 9},
};

// Initial direction integers for dimension `dim` (0-based), 1-based index j.
// Beyond the tabulated dimensions any odd value below 2^j is admissible; a
// deterministic hash keeps the construction reproducible.
std::uint64_t initial_m(int dim, int j) {
  if (dim < 6 && j <= 4) return kInitM[dim][j - 1];
  const std::uint64_t h = mix64(0x50b01ULL + 64 * static_cast<std::uint64_t>(dim) + j);
  return (h % (1ULL << j)) | 1ULL;
}

}  // namespace

SobolSequence::SobolSequence(int dim, std::uint64_t scramble_seed)
    : dim_(dim), state_(dim, 0), shift_(dim, 0), dirs_(dim) {
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("SobolSequence: dimension out of range");
  for (int k = 0; k < dim_; ++k) {
    const auto& poly = kPolys[k];
    const int s = poly.degree;
    std::vector<std::uint64_t> m(kBits + 1, 0);
    for (int j = 1; j <= s && j <= kBits; ++j) m[j] = initial_m(k, j);
    for (int j = s + 1; j <= kBits; ++j) {
      std::uint64_t v = m[j - s] ^ (m[j - s] << s);
      std::uint64_t a = poly.coeff;
      for (int i = s - 1; i >= 1; --i) {
        if (a & 1) v ^= m[j - i] << i;
        a >>= 1;
      }
      m[j] = v;
    }
    for (int j = 1; j <= kBits; ++j) dirs_[k][j - 1] = m[j] << (kBits - j);
  }
  if (scramble_seed != 0) {
    Rng rng(scramble_seed);
    for (int k = 0; k < dim_; ++k) shift_[k] = rng.next_u64() >> (64 - kBits);
  }
}

Eigen::VectorXd SobolSequence::next() {
  // Antonov-Saleev: flip the direction of the lowest zero bit of the index.
  const int c = std::countr_one(index_);
  if (c >= kBits) throw std::runtime_error("SobolSequence: sequence exhausted");
  ++index_;
  Eigen::VectorXd x(dim_);
  constexpr double fac = 1.0 / static_cast<double>(1ULL << kBits);
  for (int k = 0; k < dim_; ++k) {
    state_[k] ^= dirs_[k][c];
    x[k] = static_cast<double>(state_[k] ^ shift_[k]) * fac;
  }
  return x;
}

Eigen::MatrixXd SobolSequence::take(int n) {
  Eigen::MatrixXd pts(dim_, n);
  for (int i = 0; i < n; ++i) pts.col(i) = next();
  return pts;
}

}  // namespace bq
