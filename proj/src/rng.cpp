#include "bergomi/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace bergomi {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
    return mix64(mix64(mix64(seed) ^ stream) ^ (substream * 0xD1B54A32D192ED03ull));
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
    return Rng(stream_seed(seed, stream, substream));
}

double uniform(Rng& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

double std_normal(Rng& rng) {
    boost::random::normal_distribution<double> n;
    return n(rng);
}

} // namespace bergomi
