#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace equitop {

// All randomness in the toolkit flows from explicit 64-bit seeds. Streams for
// subtasks are derived by keyed hashing so results do not depend on scheduling
// or input order, and sampling uses fixed algorithms (not the
// implementation-defined std distributions) so identical seeds give identical
// bytes across platforms.

uint64_t splitmix64(uint64_t x);
uint64_t fnv1a64(std::string_view bytes);

/// Order-independent tie-break key for ranking: a keyed hash of
/// (seed, entity_id).
uint64_t tie_hash(uint64_t seed, std::string_view entity_id);

/// Derives a child stream seed from a parent seed and a context label,
/// e.g. derive_seed(seed, "cohort", date_str).
uint64_t derive_seed(uint64_t parent, std::string_view label);
uint64_t derive_seed(uint64_t parent, std::string_view label, std::string_view label2);
uint64_t derive_seed(uint64_t parent, std::string_view label, uint64_t index);

/// Deterministic sampler over mt19937_64 with hand-rolled distribution
/// algorithms (53-bit uniform, Box-Muller normal, Marsaglia-Tsang gamma).
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform01();

    /// Uniform on {0, 1, ..., n-1}; unbiased via rejection.
    uint64_t uniform_index(uint64_t n);

    bool bernoulli(double p) { return uniform01() < p; }

    double normal();

    /// Gamma(shape, 1), shape > 0.
    double gamma(double shape);

    /// Beta(alpha, beta), both > 0.
    double beta(double alpha, double beta);

private:
    std::mt19937_64 engine_;
};

}  // namespace equitop
