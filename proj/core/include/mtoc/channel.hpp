#pragma once

#include <cstdint>

#include "mtoc/rng.hpp"
#include "mtoc/tensor.hpp"

namespace mtoc {

enum class FadingModel : std::uint8_t { Rayleigh, Fixed };

struct ChannelConfig {
    double snr_db = 3.0;  // +inf disables noise
    FadingModel fading = FadingModel::Rayleigh;
    double fixed_gain = 1.0;    // used when fading == Fixed
    bool block_fading = true;   // one gain per sample vs per symbol
    std::uint64_t seed = 0;     // callers derive their Rng stream from this

    void validate() const;
};

/// Frozen randomness of one forward pass, kept so the backward pass sees the
/// exact same h (gains and noise are constants w.r.t. parameters).
struct ChannelRealization {
    Tensor h;      // {B} under block fading, {B,n_c} per-symbol
    Tensor noise;  // {B,n_c}; all-zero when noise is disabled
};

struct ChannelOutput {
    Tensor y;
    ChannelRealization realization;
};

/// sigma = sqrt(signal_power · 10^(−snr_db/10)); exactly 0 at snr_db = +inf.
double snr_to_noise_sigma(double snr_db, double signal_power);

/// i.i.d. Rayleigh magnitudes with scale 1/√2, so E[h²] = 1.
Tensor rayleigh_sample(Rng& rng, std::int64_t count);

/// y = h ⊙ z + n. Gains are drawn first (none for Fixed), then noise,
/// row-major, so the draw order is reproducible.
ChannelOutput channel_forward(const Tensor& z, const ChannelConfig& cfg, Rng& rng);

/// dL/dz = h ⊙ upstream for the paired forward's realization.
Tensor channel_backward(const Tensor& upstream, const ChannelRealization& realization);

}  // namespace mtoc
