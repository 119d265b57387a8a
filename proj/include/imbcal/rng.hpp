#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace imbcal {

// Deterministic random stream keyed by (master seed, path). The key is a
// SplitMix64 hash chain over the path; the engine is std::mt19937_64, whose
// output sequence is fixed by the standard. Distributions are implemented
// here rather than taken from <random>, whose algorithms vary by vendor.
class RngStream
{
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path);

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    const std::vector<std::uint64_t>& path() const noexcept { return path_; }
    std::uint64_t key() const noexcept { return key_; }

    // Stream at path + {component}.
    RngStream child(std::uint64_t component) const;

    std::uint64_t next_u64() { return engine_(); }
    // Uniform on the open interval (0,1) with 52 random bits.
    double uniform();
    double normal();
    // Uniform integer in [0, n); n > 0. Unbiased (rejection).
    std::uint64_t uniform_index(std::uint64_t n);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }
    result_type operator()() { return next_u64(); }

private:
    std::uint64_t master_seed_;
    std::vector<std::uint64_t> path_;
    std::uint64_t key_;
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

RngStream derive_stream(std::uint64_t master_seed, std::vector<std::uint64_t> path);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Fisher-Yates shuffle with this stream, so orderings are portable.
template <class RandomIt>
void shuffle(RandomIt first, RandomIt last, RngStream& rng)
{
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
        const auto j = static_cast<decltype(i)>(rng.uniform_index(std::uint64_t(i) + 1));
        std::iter_swap(first + i, first + j);
    }
}

} // namespace imbcal
