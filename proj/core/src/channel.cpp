#include "mtoc/channel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mtoc/errors.hpp"

namespace mtoc {

namespace {
constexpr double kRayleighScale = 0.7071067811865476;  // 1/sqrt(2) -> E[h^2]=1
}

void ChannelConfig::validate() const {
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw ConfigError("ChannelConfig: snr_db must be finite or +inf");
    if (fading == FadingModel::Fixed && !(fixed_gain >= 0.0))
        throw ConfigError("ChannelConfig: fixed gain must be >= 0");
}

double snr_to_noise_sigma(double snr_db, double signal_power) {
    if (!(signal_power > 0.0))
        throw ConfigError("snr_to_noise_sigma: signal power must be > 0, got " +
                          std::to_string(signal_power));
    return std::sqrt(signal_power * std::pow(10.0, -snr_db / 10.0));
}

Tensor rayleigh_sample(Rng& rng, std::int64_t count) {
    if (count < 1) throw ValueError("rayleigh_sample: count must be >= 1");
    Tensor out({static_cast<int>(count)});
    double* v = out.data();
    for (std::int64_t i = 0; i < count; ++i) v[i] = rng.rayleigh(kRayleighScale);
    return out;
}

ChannelOutput channel_forward(const Tensor& z, const ChannelConfig& cfg, Rng& rng) {
    if (z.rank() != 2) throw ShapeError("channel_forward: z must be B×n_c, got " + shape_string(z.shape()));
    if (!z.all_finite()) throw ValueError("channel_forward: non-finite transmit signal");
    cfg.validate();
    const int B = z.dim(0), nc = z.dim(1);

    ChannelOutput out;
    if (cfg.fading == FadingModel::Fixed) {
        out.realization.h = Tensor::full(cfg.block_fading ? std::vector<int>{B}
                                                          : std::vector<int>{B, nc},
                                         cfg.fixed_gain);
    } else if (cfg.block_fading) {
        out.realization.h = rayleigh_sample(rng, B);
    } else {
        out.realization.h = rayleigh_sample(rng, static_cast<std::int64_t>(B) * nc);
        out.realization.h.reshape({B, nc});
    }

    const double sigma = snr_to_noise_sigma(cfg.snr_db, 1.0);
    out.realization.noise = Tensor({B, nc});
    if (sigma > 0.0) {
        double* n = out.realization.noise.data();
        const std::int64_t total = static_cast<std::int64_t>(B) * nc;
        for (std::int64_t i = 0; i < total; ++i) n[i] = sigma * rng.normal();
    }

    out.y = Tensor({B, nc});
    const double* zv = z.data();
    const double* hv = out.realization.h.data();
    const double* nv = out.realization.noise.data();
    double* yv = out.y.data();
    const bool per_sample = out.realization.h.rank() == 1;
    for (int b = 0; b < B; ++b) {
        for (int j = 0; j < nc; ++j) {
            const std::size_t idx = static_cast<std::size_t>(b) * nc + j;
            const double h = per_sample ? hv[b] : hv[idx];
            yv[idx] = h * zv[idx] + nv[idx];
        }
    }
    return out;
}

Tensor channel_backward(const Tensor& upstream, const ChannelRealization& realization) {
    if (upstream.rank() != 2)
        throw ShapeError("channel_backward: upstream must be B×n_c");
    if (!upstream.same_shape(realization.noise))
        throw StateError("channel_backward: realization does not match upstream " +
                         shape_string(upstream.shape()));
    const int B = upstream.dim(0), nc = upstream.dim(1);
    const bool per_sample = realization.h.rank() == 1;
    if ((per_sample && realization.h.dim(0) != B) ||
        (!per_sample && !realization.h.same_shape(upstream)))
        throw StateError("channel_backward: gain tensor does not match upstream");

    Tensor out({B, nc});
    const double* g = upstream.data();
    const double* hv = realization.h.data();
    double* o = out.data();
    for (int b = 0; b < B; ++b) {
        for (int j = 0; j < nc; ++j) {
            const std::size_t idx = static_cast<std::size_t>(b) * nc + j;
            o[idx] = (per_sample ? hv[b] : hv[idx]) * g[idx];
        }
    }
    return out;
}

}  // namespace mtoc
