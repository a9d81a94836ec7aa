#pragma once

#include <cstdint>
#include <random>

namespace ntnpos {

/// Independent generator for (seed, stream, index). Drop i of a study always sees the same draws
/// no matter how many drops are run or which worker evaluates it.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace ntnpos
