#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace timelyrec {

// Error taxonomy shared by every module. The C API maps these to codes,
// the CLI maps the codes to exit statuses.
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;

// All randomness flows through mt19937_64 engines derived from explicit
// integer streams, with hand-rolled draw helpers so results do not depend
// on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    Rng(std::initializer_list<std::uint64_t> stream) {
        std::seed_seq seq(stream.begin(), stream.end());
        engine_.seed(seq);
    }

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, n) via rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw ContractError("Rng::next_below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    std::int64_t next_in(std::int64_t lo, std::int64_t hi_inclusive) {
        if (lo > hi_inclusive) throw ContractError("Rng::next_in: empty range");
        const std::uint64_t span =
            static_cast<std::uint64_t>(hi_inclusive - lo) + 1;
        return lo + static_cast<std::int64_t>(next_below(span));
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double next_in_unit_symmetric(double scale) {
        return (2.0 * next_unit() - 1.0) * scale;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace timelyrec
