#pragma once

#include <cstdint>

namespace subsat {

// Deterministic 64-bit generator (splitmix64). All randomized code in this
// library draws from this engine only, so a run is reproducible from its
// seed alone. Substreams derived via `stream` are independent for distinct
// stream ids, which gives per-trial reproducibility without sharing state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    bool coin() { return (next() >> 63) != 0; }

    // Uniform in [0, bound). bound == 0 is a caller error; returns 0.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        // rejection sampling to avoid modulo bias
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % bound;
    }

    // Independent generator for substream `id` of this seed.
    Rng stream(std::uint64_t id) const {
        Rng mix(state_ ^ (0x2545f4914f6cdd1dULL * (id + 1)));
        mix.next();
        return mix;
    }

    std::uint64_t seed_state() const { return state_; }

private:
    std::uint64_t state_;
};

} // namespace subsat
