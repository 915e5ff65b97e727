#include "statrom/sobol.hpp"

#include <array>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/normal.hpp>

namespace statrom {

namespace detail {
extern const int kSobolTableDims;
extern const std::uint32_t kSobolPoly[];
extern const std::uint32_t kSobolMinit[];
extern const int kSobolMinitCount;
}  // namespace detail

namespace {

constexpr int kBits = 32;

// direction integers V[d][k], k = 0..31, built lazily from the table
std::vector<std::array<std::uint32_t, kBits>> g_directions;
std::once_flag g_dir_once;

void build_directions() {
  const int ndim = detail::kSobolTableDims;
  g_directions.resize(ndim);
  // dimension 0: van der Corput, m_k = 1 for all k
  for (int k = 0; k < kBits; ++k) g_directions[0][k] = 1u << (31 - k);
  std::size_t off = 0;
  for (int d = 1; d < ndim; ++d) {
    const std::uint32_t p = detail::kSobolPoly[d - 1];
    int s = 0;
    while ((p >> (s + 1)) != 0u) ++s;  // degree = bit length - 1
    auto& V = g_directions[d];
    for (int k = 0; k < s; ++k) V[k] = detail::kSobolMinit[off + k] << (31 - k);
    for (int k = s; k < kBits; ++k) {
      std::uint32_t v = V[k - s] ^ (V[k - s] >> s);
      for (int j = 1; j < s; ++j)
        if ((p >> (s - j)) & 1u) v ^= V[k - j];
      V[k] = v;
    }
    off += static_cast<std::size_t>(s);
  }
}

// splitmix-style stateless mix; gives each dimension its own shift word
std::uint32_t shift_word(std::uint64_t seed, int dim) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(dim + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return static_cast<std::uint32_t>(z >> 32);
}

int rightmost_zero_bit(std::uint32_t i) {
  int c = 0;
  while (i & 1u) {
    i >>= 1;
    ++c;
  }
  return c;
}

}  // namespace

int sobol_table_dims() { return detail::kSobolTableDims; }

Matrix sobol_uniform(int dim, int n, std::optional<std::uint64_t> shift_seed) {
  if (dim < 1) throw std::invalid_argument("sobol_uniform: dim must be >= 1");
  if (dim > detail::kSobolTableDims)
    throw std::invalid_argument("sobol_uniform: dimension exceeds embedded direction table");
  if (n < 0) throw std::invalid_argument("sobol_uniform: n must be >= 0");
  std::call_once(g_dir_once, build_directions);

  std::vector<std::uint32_t> shift(dim, 0u);
  if (shift_seed)
    for (int d = 0; d < dim; ++d) shift[d] = shift_word(*shift_seed, d);

  Matrix pts(n, dim);
  std::vector<std::uint32_t> state(dim, 0u);
  const double scale = 1.0 / 4294967296.0;  // 2^-32
  for (int i = 0; i < n; ++i) {
    if (i > 0) {
      const int c = rightmost_zero_bit(static_cast<std::uint32_t>(i - 1));
      for (int d = 0; d < dim; ++d) state[d] ^= g_directions[d][c];
    }
    for (int d = 0; d < dim; ++d) pts(i, d) = static_cast<double>(state[d] ^ shift[d]) * scale;
  }
  return pts;
}

Matrix sobol_gaussian(int dim, int n, std::uint64_t seed) {
  Matrix u = sobol_uniform(dim, n, seed);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d) u(i, d) = normal_quantile(u(i, d));
  return u;
}

double normal_quantile(double p) {
  if (p < 1e-12) p = 1e-12;
  if (p > 1.0 - 1e-12) p = 1.0 - 1e-12;
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return boost::math::quantile(dist, p);
}

}  // namespace statrom
