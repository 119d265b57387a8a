#include <imbcal/errors.hpp>
#include <imbcal/rng.hpp>

#include <cmath>
#include <numbers>

namespace imbcal {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path)
{
    std::uint64_t h = splitmix64(seed ^ 0x6A09E667F3BCC908ULL);
    for (std::size_t i = 0; i < path.size(); ++i) {
        h = splitmix64(h ^ splitmix64(path[i] + 0x9E3779B97F4A7C15ULL * (i + 1)));
    }
    // length tag: {1} and {1,0} must not collide
    return splitmix64(h ^ path.size());
}

} // namespace

RngStream::RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
    : master_seed_(master_seed),
      path_(std::move(path)),
      key_(derive_key(master_seed_, path_)),
      engine_(key_)
{
    if (path_.empty()) {
        throw DomainError("RngStream: path must be non-empty");
    }
}

RngStream RngStream::child(std::uint64_t component) const
{
    auto p = path_;
    p.push_back(component);
    return RngStream(master_seed_, std::move(p));
}

double RngStream::uniform()
{
    // (k + 0.5) / 2^52 is exact and never hits 0 or 1
    const std::uint64_t k = engine_() >> 12;
    return (double(k) + 0.5) * 0x1.0p-52;
}

double RngStream::normal()
{
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

std::uint64_t RngStream::uniform_index(std::uint64_t n)
{
    if (n == 0) {
        throw DomainError("uniform_index: n must be positive");
    }
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

RngStream derive_stream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
{
    return RngStream(master_seed, std::move(path));
}

} // namespace imbcal
