#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vtlab {

// Directed node pairs are indexed source-major: the block for source i
// holds its destinations in ascending order, skipping i itself.
inline int pair_count(int n) { return n * (n - 1); }

inline int pair_index(int src, int dst, int n) {
    return src * (n - 1) + (dst < src ? dst : dst - 1);
}

inline std::pair<int, int> pair_nodes(int index, int n) {
    const int src = index / (n - 1);
    const int off = index % (n - 1);
    return {src, off < src ? off : off + 1};
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Standard normal CDF, accurate in both tails.
inline double norm_cdf(double z) {
    return 0.5 * std::erfc(-z / 1.4142135623730951);
}

// Standard normal quantile: Acklam's rational approximation polished with
// one Halley step against the erfc-based CDF (absolute error ~1e-15).
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("norm_quantile: p must lie in (0,1)");
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = norm_cdf(x) - p;
    const double u = e * 2.5066282746310002 * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent substream seeds for (base, stream, index) triples, so runs
// stay reproducible no matter how many draws each consumer makes.
inline uint64_t derive_seed(uint64_t base, uint64_t stream, uint64_t index = 0) {
    uint64_t s = base ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    uint64_t h = splitmix64(s);
    s ^= (index + 1) * 0xd1342543de82ef95ULL;
    h ^= splitmix64(s);
    return splitmix64(h);
}

namespace stream {
constexpr uint64_t kTopology = 1;
constexpr uint64_t kTraffic = 2;
constexpr uint64_t kInit = 3;
constexpr uint64_t kNoise = 4;
constexpr uint64_t kHlda = 5;
constexpr uint64_t kReferenceVt = 6;
}  // namespace stream

// All randomness flows through this wrapper so results are identical
// across platforms: mt19937_64 output is fully specified by the standard,
// and the samplers below avoid the implementation-defined std distributions.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in (0,1), symmetric, never hits an endpoint.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // Standard normal via the inverse CDF.
    double next_normal() { return norm_quantile(next_unit()); }

    // Unbiased integer in [0, bound) by rejection.
    uint64_t next_below(uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
        const uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const uint64_t x = next_u64();
            if (x >= threshold) return x % bound;
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace vtlab
