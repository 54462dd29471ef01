#pragma once
#include <cstdint>
#include <utility>

#include "pm/real.hpp"

namespace pm {

// Counter-based generator: each output is a keyed hash of (seed, stream_id,
// counter), so draws are reproducible independent of scheduling. The stream is
// a value type; next() returns the advanced state instead of mutating.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t counter = 0;

  RngStream() = default;
  RngStream(std::uint64_t s, std::uint64_t id) : seed(s), stream_id(id) {}

  std::pair<std::uint64_t, RngStream> next_u64() const;
  // Uniform in (0,1) with 53 random bits.
  std::pair<double, RngStream> next_double() const;
  // Uniform in (0,1) with `prec` random mantissa bits.
  std::pair<Real, RngStream> next_real(long prec) const;
};

// Convenience: draw and advance the local copy in place.
inline std::uint64_t draw_u64(RngStream& s) {
  auto [v, ns] = s.next_u64();
  s = ns;
  return v;
}
inline double draw_double(RngStream& s) {
  auto [v, ns] = s.next_double();
  s = ns;
  return v;
}
inline Real draw_real(RngStream& s, long prec) {
  auto [v, ns] = s.next_real(prec);
  s = ns;
  return v;
}

}  // namespace pm
