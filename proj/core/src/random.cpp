#include "equitop/random.hpp"

#include <cmath>

namespace equitop {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t tie_hash(uint64_t seed, std::string_view entity_id) {
    return splitmix64(splitmix64(seed) ^ fnv1a64(entity_id));
}

uint64_t derive_seed(uint64_t parent, std::string_view label) {
    return splitmix64(splitmix64(parent) ^ fnv1a64(label));
}

uint64_t derive_seed(uint64_t parent, std::string_view label, std::string_view label2) {
    return derive_seed(derive_seed(parent, label), label2);
}

uint64_t derive_seed(uint64_t parent, std::string_view label, uint64_t index) {
    return splitmix64(derive_seed(parent, label) ^ splitmix64(index));
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

uint64_t Rng::uniform_index(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    // Box-Muller; two fresh uniforms per draw keeps the stream position a
    // pure function of the number of calls.
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

double Rng::gamma(double shape) {
    if (shape < 1.0) {
        // Boost to shape+1, then scale back (Marsaglia & Tsang sec. 6).
        const double u = uniform01();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::beta(double alpha, double beta) {
    const double x = gamma(alpha);
    const double y = gamma(beta);
    return x / (x + y);
}

}  // namespace equitop
