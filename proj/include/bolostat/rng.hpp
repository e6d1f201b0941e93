#pragma once

#include <cstdint>
#include <random>

namespace bolostat {

/// Engine for substream `stream` of a run seeded with `seed`. Substreams are
/// independent so that results do not depend on how work is scheduled.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(sseq);
}

} // namespace bolostat
