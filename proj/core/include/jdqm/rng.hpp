#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace jdqm {

/// Philox4x32-10 block cipher (Salmon et al., SC 2011). Pure function of
/// (key, counter); used as the project-wide counter-mode generator.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::uint32_t key0, std::uint32_t key1,
                                              std::array<std::uint32_t, 4> ctr) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key0,
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key1,
                   static_cast<std::uint32_t>(p0)};
            key0 += kWeyl0;
            key1 += kWeyl1;
        }
        return ctr;
    }
};

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

/// SplitMix64 finalizer; bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Substream tag for sample `sample_index` of an experiment, per purpose
/// string. This is the reproducibility contract: sample i of experiment
/// seed s draws from substreams keyed (s, stream_tag(i, "jumps")) and
/// (s, stream_tag(i, "brownian")). Runs are identical across machines for
/// a given seed because every draw is a pure function of these inputs.
constexpr std::uint64_t stream_tag(std::uint64_t sample_index, std::string_view purpose) {
    return mix64(fnv1a64(purpose) + 0x9E3779B97F4A7C15ull * sample_index);
}

/// One logical random substream. Every variate is a pure function
/// F(seed, tag, counter): no mutable state, so values never depend on the
/// order in which counters are consumed.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t tag)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          tag_lo_(static_cast<std::uint32_t>(tag)),
          tag_hi_(static_cast<std::uint32_t>(tag >> 32)) {}

    std::uint64_t bits(std::uint64_t counter) const {
        const auto w = Philox4x32::block(
            key0_, key1_,
            {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
             tag_lo_, tag_hi_});
        return (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
    }

    /// Uniform on the open interval (0,1), 53-bit resolution.
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1p-53;
    }

    /// Standard normal via the inverse CDF (exact quantile coupling).
    double normal(std::uint64_t counter) const;

    /// Unit-rate exponential.
    double exponential(std::uint64_t counter) const;

private:
    std::uint32_t key0_, key1_;
    std::uint32_t tag_lo_, tag_hi_;
};

} // namespace jdqm
