#pragma once
#include "pm/simulate.hpp"

namespace pm::detail {

// Shared stepping loop behind run_session and run_mismatch: `actual` is the
// channel the outputs are drawn from (nullptr = the pair's own channel);
// everything else (kernel, normalization, recorded state) follows the pair.
Transcript run_session_over(PairPtr pair, std::optional<Upf> mu,
                            const std::optional<UnitValue>& theta0, int n, std::uint64_t seed,
                            std::uint64_t stream_id, const SessionOptions& opt,
                            const MemorylessChannel* actual);

}  // namespace pm::detail
