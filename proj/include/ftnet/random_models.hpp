#pragma once

#include <cstdint>
#include <random>

#include "ftnet/models.hpp"

namespace ftnet {

using Rng = std::mt19937_64;

// Independent stream seed for trial `index` of a run seeded with `base` (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

double uniform(Rng& rng, double lo, double hi);
std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi);  // inclusive
Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale);
Vector random_vector(Rng& rng, std::size_t n, double scale);
Sequence random_sequence(Rng& rng, std::size_t T, std::size_t I, double scale = 1.0);

FNNParams random_fnn(Rng& rng, std::size_t I, std::size_t H, const RealActivation& sigma);
RNNParams random_rnn(Rng& rng, std::size_t I, std::size_t H, const RealActivation& sigma);
CRNetParams random_crnet(Rng& rng, std::size_t I, std::size_t H,
                         const ActivationKind& kind = ActivationKind::zrelu());
// sigma1/sigma2 are the Re/Im restrictions sigma(c + x i) of `base`.
AdditiveFTNetParams random_additive(Rng& rng, std::size_t I, std::size_t H,
                                    const ActivationKind& base, double c);
FFTNetParams random_fftnet(Rng& rng, std::size_t I, std::size_t H, const ActivationKind& kind,
                           double scale);
RFTNetParams random_rftnet(Rng& rng, std::size_t I, std::size_t H, const ActivationKind& kind,
                           double scale);

}  // namespace ftnet
