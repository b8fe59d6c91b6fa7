#include "rng.hpp"

#include <cmath>

namespace relufd {

namespace {

uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

}  // namespace

uint64_t Rng::derive_key(uint64_t seed, std::string_view tag, uint64_t index) {
    uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ull);
    for (unsigned char c : tag) {
        h = mix64(h ^ c);
    }
    h = mix64(h ^ mix64(index + 0x632be59bd9b4e019ull));
    return h;
}

uint64_t Rng::next_u64() {
    uint64_t x = key_ ^ (0x9e3779b97f4a7c15ull * ++ctr_);
    return mix64(mix64(x));
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 shifted away from 0 so log is finite.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

}  // namespace relufd
