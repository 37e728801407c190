#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace sciforge::rng {

// Portable seeded randomness. std::shuffle and the std distributions are
// implementation-defined, so outputs would differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    // Uniform real in [0, 1) with 53 bits of randomness.
    double unit();

    template <typename T>
    void shuffle(std::vector<T>& items) {
        // Fisher-Yates, high index downwards.
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace sciforge::rng
