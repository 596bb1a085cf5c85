#pragma once

#include <cstdint>

namespace trimatch {

namespace detail {

// splitmix64 step: advances the state and returns a mixed output.
// Used as a hash to decorrelate seed/stream inputs before they reach PCG.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// PCG32 (XSH RR 64/32), M.E. O'Neill's minimal generator.
// Distinct odd increments select distinct, independent sequences.
struct Pcg32 {
    std::uint64_t state = 0;
    std::uint64_t inc = 1;

    void init(std::uint64_t initstate, std::uint64_t initseq) {
        state = 0;
        inc = (initseq << 1u) | 1u;
        next();
        state += initstate;
        next();
    }

    std::uint32_t next() {
        const std::uint64_t old = state;
        state = old * 6364136223846793005ull + inc;
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
    }
};

} // namespace detail

// Reproducible random stream: the sequence is a pure function of
// (seed, stream_id), and distinct stream_ids give statistically
// independent streams.  Copying is cheap and copies the full state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id) {
        gen_.init(detail::mix64(seed ^ detail::mix64(stream_id)),
                  detail::mix64(seed) ^ stream_id);
    }

    std::uint32_t next_u32() { return gen_.next(); }

    std::uint64_t next_u64() {
        const std::uint64_t hi = gen_.next();
        return (hi << 32) | gen_.next();
    }

    // Uniform on the open interval (0, 1); never returns an endpoint,
    // so log(u) and log(1-u) are always finite.
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Deterministic child stream; children with distinct tags are
    // independent of each other and of the parent.
    RngStream substream(std::uint64_t tag) const {
        return RngStream(seed_, detail::mix64(stream_id_ ^ detail::mix64(tag)));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    detail::Pcg32 gen_;
};

} // namespace trimatch
