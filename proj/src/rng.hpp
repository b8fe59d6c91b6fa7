#pragma once

#include <cstdint>
#include <string_view>

namespace relufd {

// Counter-based splittable generator.  Every draw is a pure function of
// (key, counter), and substreams are derived by hashing a tag and index into
// the key, so results are independent of evaluation order and thread count.
class Rng {
public:
    explicit Rng(uint64_t key) : key_(key) {}

    static uint64_t derive_key(uint64_t seed, std::string_view tag, uint64_t index = 0);

    Rng split(std::string_view tag, uint64_t index = 0) const {
        return Rng(derive_key(key_, tag, index));
    }

    uint64_t next_u64();
    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);
    double normal();                        // N(0, 1)

    uint64_t key() const { return key_; }

private:
    uint64_t key_ = 0;
    uint64_t ctr_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace relufd
