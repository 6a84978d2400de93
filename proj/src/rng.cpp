#include "linkcorr/rng.hpp"

namespace linkcorr {

namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    return mix64(state);
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix_next(sm);
}

Rng Rng::substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t p : path) key = mix64(key ^ mix64(p + 0x3c6ef372fe94f82bULL));
    return Rng(key);
}

Rng::result_type Rng::operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::normal() { return normal_(*this); }

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Rng::chi_squared(double dof) {
    std::gamma_distribution<double> gamma(0.5 * dof, 2.0);
    return gamma(*this);
}

}  // namespace linkcorr
