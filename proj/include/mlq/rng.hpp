#pragma once

#include <cstdint>
#include <limits>

namespace mlq {

/// Counter-based 64-bit generator: the i-th output is a fixed bijective mix of
/// (key, i), so a stream is fully described by its key and position.
/// Satisfies UniformRandomBitGenerator and works with <random> distributions.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream() = default;
    explicit Stream(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix(key_ + kGolden * ++counter_); }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t position() const noexcept { return counter_; }

    /// Uniform double in the open interval (0, 1).
    double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

/// Stream roles; each (replication, role) pair gets an independent key.
enum class Source : std::uint64_t {
    arrivals = 1,
    services = 2,
    sde_projected = 3,
    sde_mirror = 4,
    generic = 5,
};

inline Stream derive_stream(std::uint64_t master_seed, std::uint64_t replication, Source source) noexcept {
    std::uint64_t k = Stream::mix(master_seed ^ 0x6a09e667f3bcc908ULL);
    k = Stream::mix(k + replication * 0xd1b54a32d192ed03ULL);
    k = Stream::mix(k ^ (static_cast<std::uint64_t>(source) * 0x8cb92ba72f3d8dd7ULL));
    return Stream(k);
}

}  // namespace mlq
