#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace akmc {

/// SplitMix64 finalizer. Used to turn structured seeds (root ^ index) into
/// well-mixed engine seeds.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Sub-seed for a named component (e.g. "verify.poisson") of a run.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(root ^ h);
}

/// One independent random stream. Replica r of a run uses
/// `RandomStream(seed, r)`, i.e. the engine is keyed on seed ^ r.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_index = 0)
        : engine_(splitmix64(seed ^ stream_index)) {}

    [[nodiscard]] double normal() { return normal_(engine_); }

    /// Uniform on [0, 1).
    [[nodiscard]] double uniform() { return std::generate_canonical<double, 53>(engine_); }

    [[nodiscard]] double exponential(double rate) {
        return std::exponential_distribution<double>(rate)(engine_);
    }

    [[nodiscard]] long long poisson(double mean) {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<long long>(mean)(engine_);
    }

    [[nodiscard]] bool bernoulli(double p) { return uniform() < p; }

    engine_type& engine() noexcept { return engine_; }

private:
    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace akmc
