#include "pm/rng.hpp"

#include <gmp.h>

#include <vector>

namespace pm {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t avalanche(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t stream, std::uint64_t ctr) {
  std::uint64_t key = avalanche(seed + kGolden) ^ avalanche(stream * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull);
  return avalanche(avalanche(key + ctr * kGolden) ^ (ctr + kGolden));
}

}  // namespace

std::pair<std::uint64_t, RngStream> RngStream::next_u64() const {
  RngStream ns = *this;
  ns.counter = counter + 1;
  return {hash3(seed, stream_id, counter), ns};
}

std::pair<double, RngStream> RngStream::next_double() const {
  auto [w, ns] = next_u64();
  // 53 high bits, shifted into (0,1); offset by half an ulp to exclude 0.
  double d = (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
  return {d, ns};
}

std::pair<Real, RngStream> RngStream::next_real(long prec) const {
  long words = (prec + 63) / 64;
  std::vector<std::uint64_t> buf(static_cast<size_t>(words));
  RngStream s = *this;
  for (auto& w : buf) w = draw_u64(s);
  mpz_t z;
  mpz_init(z);
  mpz_import(z, buf.size(), 1, sizeof(std::uint64_t), 0, 0, buf.data());
  Real wide(words * 64);
  mpfr_set_z_2exp(wide.raw(), z, -64 * words, MPFR_RNDN);  // exact
  mpz_clear(z);
  Real r(prec);
  mpfr_set(r.raw(), wide.raw(), MPFR_RNDD);  // round down: stays < 1
  if (r.sign() == 0) {
    mpfr_set_ui_2exp(r.raw(), 1, -prec, MPFR_RNDN);  // avoid exact zero
  }
  return {r, s};
}

}  // namespace pm
