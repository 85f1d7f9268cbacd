#include "fracback/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>

namespace fracback {

namespace {

constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  const unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(prod >> 64);
  lo = static_cast<std::uint64_t>(prod);
}

}  // namespace

std::array<std::uint64_t, 4> CounterRng::block(
    const std::array<std::uint64_t, 4>& counter) const {
  std::array<std::uint64_t, 4> ctr = counter;
  std::uint64_t k0 = seed_;
  std::uint64_t k1 = 0;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMult0, ctr[0], hi0, lo0);
    mulhilo(kMult1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
  }
  return ctr;
}

double CounterRng::uniform(StreamPurpose purpose, std::uint64_t trial,
                           std::uint64_t node, std::uint64_t step) const {
  const auto out =
      block({static_cast<std::uint64_t>(purpose), trial, node, step});
  // Top 53 bits, offset to the bin center: strictly inside (0, 1) so the
  // inverse CDF below never sees 0 or 1.
  return (static_cast<double>(out[0] >> 11) + 0.5) * 0x1p-53;
}

double CounterRng::normal(StreamPurpose purpose, std::uint64_t trial,
                          std::uint64_t node, std::uint64_t step) const {
  const double u = uniform(purpose, trial, node, step);
  return std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
}

}  // namespace fracback
