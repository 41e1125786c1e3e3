#include "mtoc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mtoc/errors.hpp"

namespace mtoc {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

std::vector<int> with_batch(int batch, const std::vector<int>& per_sample) {
    std::vector<int> s;
    s.reserve(per_sample.size() + 1);
    s.push_back(batch);
    s.insert(s.end(), per_sample.begin(), per_sample.end());
    return s;
}

}  // namespace

std::string layer_name(const LayerKind& kind) {
    switch (kind.index()) {
        case 0: return "Dense";
        case 1: return "Conv2D";
        case 2: return "MaxPool2D";
        case 3: return "Flatten";
        case 4: return "Dropout";
        default: return "ChannelStub";
    }
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    require(input.rank() == 2, "dense_forward: input must be B×d, got " + shape_string(input.shape()));
    require(weights.rank() == 2, "dense_forward: weights must be d_in×d_out");
    require(bias.rank() == 1, "dense_forward: bias must be 1-D");
    const int B = input.dim(0), din = input.dim(1);
    const int dout = weights.dim(1);
    require(weights.dim(0) == din,
            "dense_forward: input width " + std::to_string(din) + " vs weights " +
                shape_string(weights.shape()));
    require(bias.dim(0) == dout, "dense_forward: bias width mismatch");

    Tensor out({B, dout});
    const double* in = input.data();
    const double* w = weights.data();
    const double* bv = bias.data();
    double* o = out.data();
    for (int b = 0; b < B; ++b) {
        double* orow = o + static_cast<std::size_t>(b) * dout;
        std::memcpy(orow, bv, sizeof(double) * static_cast<std::size_t>(dout));
        const double* irow = in + static_cast<std::size_t>(b) * din;
        for (int k = 0; k < din; ++k) {
            const double a = irow[k];
            const double* wrow = w + static_cast<std::size_t>(k) * dout;
            for (int j = 0; j < dout; ++j) orow[j] += a * wrow[j];
        }
    }
    return out;
}

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
    require(input.rank() == 4, "conv2d_forward: input must be B×H×W×C");
    require(kernels.rank() == 4, "conv2d_forward: kernels must be kh×kw×C×F");
    const int B = input.dim(0), H = input.dim(1), W = input.dim(2), C = input.dim(3);
    const int kh = kernels.dim(0), kw = kernels.dim(1), F = kernels.dim(3);
    require(kernels.dim(2) == C, "conv2d_forward: channel count mismatch");
    require(bias.rank() == 1 && bias.dim(0) == F, "conv2d_forward: bias width mismatch");
    if (kh > H || kw > W)
        throw ShapeError("conv2d_forward: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                         " larger than input " + std::to_string(H) + "x" + std::to_string(W));
    const int OH = H - kh + 1, OW = W - kw + 1;

    Tensor out({B, OH, OW, F});
    const double* kv = kernels.data();
    for (int b = 0; b < B; ++b) {
        for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
                double* orow = &out.at(b, oy, ox, 0);
                for (int f = 0; f < F; ++f) orow[f] = bias[f];
                for (int dy = 0; dy < kh; ++dy) {
                    for (int dx = 0; dx < kw; ++dx) {
                        const double* irow = &input.at(b, oy + dy, ox + dx, 0);
                        const double* krow = kv + (static_cast<std::size_t>(dy) * kw + dx) * C * F;
                        for (int c = 0; c < C; ++c) {
                            const double a = irow[c];
                            const double* kf = krow + static_cast<std::size_t>(c) * F;
                            for (int f = 0; f < F; ++f) orow[f] += a * kf[f];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor maxpool2d_forward(const Tensor& input, int pool_h, int pool_w, Tensor* argmax) {
    require(input.rank() == 4, "maxpool2d_forward: input must be B×H×W×C");
    if (pool_h < 1 || pool_w < 1) throw ConfigError("maxpool2d_forward: pool size must be >= 1");
    const int B = input.dim(0), H = input.dim(1), W = input.dim(2), C = input.dim(3);
    if (pool_h > H || pool_w > W)
        throw ShapeError("maxpool2d_forward: pool exceeds input " + shape_string(input.shape()));
    const int OH = H / pool_h, OW = W / pool_w;

    Tensor out({B, OH, OW, C});
    if (argmax) *argmax = Tensor({B, OH, OW, C});
    for (int b = 0; b < B; ++b) {
        for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
                for (int c = 0; c < C; ++c) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::int64_t best_idx = -1;
                    for (int dy = 0; dy < pool_h; ++dy) {
                        for (int dx = 0; dx < pool_w; ++dx) {
                            const int iy = oy * pool_h + dy, ix = ox * pool_w + dx;
                            const std::int64_t idx =
                                ((static_cast<std::int64_t>(b) * H + iy) * W + ix) * C + c;
                            const double v = input[idx];
                            if (v > best) {
                                best = v;
                                best_idx = idx;
                            }
                        }
                    }
                    out.at(b, oy, ox, c) = best;
                    if (argmax) argmax->at(b, oy, ox, c) = static_cast<double>(best_idx);
                }
            }
        }
    }
    return out;
}

Tensor dropout_forward(const Tensor& input, double rate, bool training, Rng* rng, Tensor* mask) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(rate));
    if (!training || rate == 0.0) {
        if (mask) *mask = Tensor::full(input.shape(), 1.0);
        return input;
    }
    if (!rng) throw StateError("dropout_forward: training mode needs an RNG");
    const double scale = 1.0 / (1.0 - rate);
    Tensor out(input.shape());
    Tensor m(input.shape());
    const double* in = input.data();
    double* o = out.data();
    double* mv = m.data();
    const std::int64_t n = input.size();
    for (std::int64_t i = 0; i < n; ++i) {
        const double keep = (rng->uniform() < rate) ? 0.0 : scale;
        mv[i] = keep;
        o[i] = in[i] * keep;
    }
    if (mask) *mask = std::move(m);
    return out;
}

void apply_activation(Tensor& t, Activation act) {
    switch (act) {
        case Activation::Linear:
            return;
        case Activation::ReLU: {
            double* v = t.data();
            const std::int64_t n = t.size();
            for (std::int64_t i = 0; i < n; ++i) v[i] = v[i] > 0.0 ? v[i] : 0.0;
            return;
        }
        case Activation::Softmax: {
            t = softmax(t);
            return;
        }
    }
}

Tensor softmax(const Tensor& logits) {
    require(logits.rank() == 2, "softmax: logits must be B×K");
    const int B = logits.dim(0), K = logits.dim(1);
    Tensor probs({B, K});
    for (int b = 0; b < B; ++b) {
        const double* row = logits.data() + static_cast<std::size_t>(b) * K;
        double* prow = probs.data() + static_cast<std::size_t>(b) * K;
        double mx = row[0];
        for (int k = 1; k < K; ++k) mx = std::max(mx, row[k]);
        double sum = 0.0;
        for (int k = 0; k < K; ++k) {
            prow[k] = std::exp(row[k] - mx);
            sum += prow[k];
        }
        for (int k = 0; k < K; ++k) prow[k] /= sum;
    }
    return probs;
}

CrossEntropyResult softmax_cross_entropy(const Tensor& logits,
                                         std::span<const std::uint8_t> labels) {
    require(logits.rank() == 2, "softmax_cross_entropy: logits must be B×K");
    const int B = logits.dim(0), K = logits.dim(1);
    require(K >= 2, "softmax_cross_entropy: need at least 2 classes");
    if (static_cast<int>(labels.size()) != B)
        throw ShapeError("softmax_cross_entropy: batch " + std::to_string(B) + " vs " +
                         std::to_string(labels.size()) + " labels");

    CrossEntropyResult r{0.0, Tensor({B, K}), Tensor({B, K})};
    double loss_sum = 0.0;
    for (int b = 0; b < B; ++b) {
        const int label = labels[static_cast<std::size_t>(b)];
        if (label < 0 || label >= K)
            throw ValueError("softmax_cross_entropy: label " + std::to_string(label) +
                             " out of range [0," + std::to_string(K) + ")");
        const double* row = logits.data() + static_cast<std::size_t>(b) * K;
        double* prow = r.probs.data() + static_cast<std::size_t>(b) * K;
        double* grow = r.grad.data() + static_cast<std::size_t>(b) * K;
        double mx = row[0];
        for (int k = 1; k < K; ++k) mx = std::max(mx, row[k]);
        double sum = 0.0;
        for (int k = 0; k < K; ++k) {
            prow[k] = std::exp(row[k] - mx);
            sum += prow[k];
        }
        for (int k = 0; k < K; ++k) prow[k] /= sum;
        loss_sum -= (row[label] - mx) - std::log(sum);
        for (int k = 0; k < K; ++k) grow[k] = (prow[k] - (k == label ? 1.0 : 0.0)) / B;
    }
    r.loss = loss_sum / B;
    return r;
}

// ---- Network ----

Network::Network(std::vector<int> input_shape, std::vector<LayerKind> kinds)
    : input_shape_(std::move(input_shape)) {
    if (input_shape_.empty()) throw ConfigError("Network: empty input shape");
    shape_product(input_shape_);  // validates positivity

    std::vector<int> shape = input_shape_;
    layers_.reserve(kinds.size());
    for (auto& kind : kinds) {
        Layer layer;
        layer.kind = kind;
        layer.in_shape = shape;
        if (auto* d = std::get_if<DenseSpec>(&kind)) {
            if (d->out_size < 1) throw ConfigError("Dense: out_size must be >= 1");
            if (shape.size() != 1)
                throw ShapeError("Dense expects flattened input, got " + shape_string(shape));
            layer.weights = Tensor({shape[0], d->out_size});
            layer.bias = Tensor({d->out_size});
            shape = {d->out_size};
        } else if (auto* c = std::get_if<Conv2DSpec>(&kind)) {
            if (c->filters < 1 || c->kernel_h < 1 || c->kernel_w < 1)
                throw ConfigError("Conv2D: filters and kernel sizes must be >= 1");
            if (shape.size() != 3)
                throw ShapeError("Conv2D expects H×W×C input, got " + shape_string(shape));
            if (c->kernel_h > shape[0] || c->kernel_w > shape[1])
                throw ShapeError("Conv2D kernel exceeds input " + shape_string(shape));
            layer.weights = Tensor({c->kernel_h, c->kernel_w, shape[2], c->filters});
            layer.bias = Tensor({c->filters});
            shape = {shape[0] - c->kernel_h + 1, shape[1] - c->kernel_w + 1, c->filters};
        } else if (auto* p = std::get_if<MaxPool2DSpec>(&kind)) {
            if (p->pool_h < 1 || p->pool_w < 1) throw ConfigError("MaxPool2D: pool size must be >= 1");
            if (shape.size() != 3)
                throw ShapeError("MaxPool2D expects H×W×C input, got " + shape_string(shape));
            if (p->pool_h > shape[0] || p->pool_w > shape[1])
                throw ShapeError("MaxPool2D pool exceeds input " + shape_string(shape));
            shape = {shape[0] / p->pool_h, shape[1] / p->pool_w, shape[2]};
        } else if (std::holds_alternative<FlattenSpec>(kind)) {
            shape = {static_cast<int>(shape_product(shape))};
        } else if (auto* dr = std::get_if<DropoutSpec>(&kind)) {
            if (dr->rate < 0.0 || dr->rate >= 1.0)
                throw ConfigError("Dropout rate must be in [0,1)");
        }  // ChannelStub: shape unchanged
        layer.out_shape = shape;
        if (layer.weights.size() > 0) {
            layer.grad_w = Tensor(layer.weights.shape());
            layer.grad_b = Tensor(layer.bias.shape());
        }
        layers_.push_back(std::move(layer));
    }
    output_shape_ = shape;
}

int Network::output_width() const {
    return static_cast<int>(shape_product(output_shape_));
}

void Network::init_params(Rng& rng) {
    for (auto& layer : layers_) {
        if (layer.weights.size() == 0) continue;
        double fan_in = 0, fan_out = 0;
        if (auto* d = std::get_if<DenseSpec>(&layer.kind)) {
            fan_in = layer.in_shape[0];
            fan_out = d->out_size;
        } else if (auto* c = std::get_if<Conv2DSpec>(&layer.kind)) {
            fan_in = static_cast<double>(c->kernel_h) * c->kernel_w * layer.in_shape[2];
            fan_out = static_cast<double>(c->kernel_h) * c->kernel_w * c->filters;
        }
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        double* w = layer.weights.data();
        const std::int64_t n = layer.weights.size();
        for (std::int64_t i = 0; i < n; ++i) w[i] = rng.uniform(-limit, limit);
        layer.bias.fill(0.0);
    }
    has_cache_ = false;
}

Tensor Network::forward(const Tensor& batch, Rng* dropout_rng) {
    if (batch.rank() < 1 || std::vector<int>(batch.shape().begin() + 1, batch.shape().end()) != input_shape_)
        throw ShapeError("Network::forward: batch shape " + shape_string(batch.shape()) +
                         " does not match input " + shape_string(input_shape_));
    const int B = batch.dim(0);
    Tensor cur = batch;
    for (auto& layer : layers_) {
        if (auto* d = std::get_if<DenseSpec>(&layer.kind)) {
            layer.cache_in = cur;
            Tensor pre = dense_forward(cur, layer.weights, layer.bias);
            layer.cache_preact = pre;
            if (d->act == Activation::ReLU) apply_activation(pre, Activation::ReLU);
            cur = std::move(pre);  // Softmax left to the fused loss
        } else if (auto* c = std::get_if<Conv2DSpec>(&layer.kind)) {
            layer.cache_in = cur;
            Tensor pre = conv2d_forward(cur, layer.weights, layer.bias);
            layer.cache_preact = pre;
            if (c->act == Activation::ReLU) apply_activation(pre, Activation::ReLU);
            cur = std::move(pre);
        } else if (auto* p = std::get_if<MaxPool2DSpec>(&layer.kind)) {
            cur = maxpool2d_forward(cur, p->pool_h, p->pool_w, &layer.cache_mask);
        } else if (std::holds_alternative<FlattenSpec>(layer.kind)) {
            cur.reshape(with_batch(B, layer.out_shape));
        } else if (auto* dr = std::get_if<DropoutSpec>(&layer.kind)) {
            cur = dropout_forward(cur, dr->rate, /*training=*/true, dropout_rng, &layer.cache_mask);
        }  // ChannelStub: identity
    }
    has_cache_ = true;
    cached_batch_ = B;
    return cur;
}

Tensor Network::run_forward(const Tensor& batch, bool materialize_softmax) const {
    const int B = batch.dim(0);
    Tensor cur = batch;
    for (const auto& layer : layers_) {
        if (auto* d = std::get_if<DenseSpec>(&layer.kind)) {
            cur = dense_forward(cur, layer.weights, layer.bias);
            if (d->act == Activation::ReLU) apply_activation(cur, Activation::ReLU);
            else if (d->act == Activation::Softmax && materialize_softmax)
                apply_activation(cur, Activation::Softmax);
        } else if (auto* c = std::get_if<Conv2DSpec>(&layer.kind)) {
            cur = conv2d_forward(cur, layer.weights, layer.bias);
            if (c->act == Activation::ReLU) apply_activation(cur, Activation::ReLU);
            else if (c->act == Activation::Softmax && materialize_softmax)
                apply_activation(cur, Activation::Softmax);
        } else if (auto* p = std::get_if<MaxPool2DSpec>(&layer.kind)) {
            cur = maxpool2d_forward(cur, p->pool_h, p->pool_w);
        } else if (std::holds_alternative<FlattenSpec>(layer.kind)) {
            cur.reshape(with_batch(B, layer.out_shape));
        }  // Dropout, ChannelStub: identity at inference
    }
    return cur;
}

Tensor Network::infer(const Tensor& batch) const {
    if (std::vector<int>(batch.shape().begin() + 1, batch.shape().end()) != input_shape_)
        throw ShapeError("Network::infer: batch shape " + shape_string(batch.shape()) +
                         " does not match input " + shape_string(input_shape_));
    return run_forward(batch, /*materialize_softmax=*/true);
}

Tensor Network::infer_logits(const Tensor& batch) const {
    if (std::vector<int>(batch.shape().begin() + 1, batch.shape().end()) != input_shape_)
        throw ShapeError("Network::infer_logits: batch shape mismatch");
    return run_forward(batch, /*materialize_softmax=*/false);
}

namespace {

// dZ = upstream ⊙ act'(preact); ReLU only, Linear and fused Softmax pass through.
Tensor activation_backward(const Tensor& upstream, const Tensor& preact, Activation act) {
    if (act != Activation::ReLU) return upstream;
    Tensor dz = upstream;
    double* d = dz.data();
    const double* p = preact.data();
    const std::int64_t n = dz.size();
    for (std::int64_t i = 0; i < n; ++i)
        if (p[i] <= 0.0) d[i] = 0.0;
    return dz;
}

}  // namespace

Tensor Network::backward(const Tensor& upstream) {
    if (!has_cache_) throw StateError("Network::backward without a preceding training forward");
    if (upstream.shape() != with_batch(cached_batch_, output_shape_))
        throw ShapeError("Network::backward: upstream shape " + shape_string(upstream.shape()) +
                         " does not match output " + shape_string(output_shape_));

    Tensor grad = upstream;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        Layer& layer = *it;
        const int B = cached_batch_;
        if (auto* d = std::get_if<DenseSpec>(&layer.kind)) {
            Tensor dz = activation_backward(grad, layer.cache_preact, d->act);
            const int din = layer.in_shape[0], dout = d->out_size;
            layer.grad_w.fill(0.0);
            layer.grad_b.fill(0.0);
            const double* in = layer.cache_in.data();
            const double* dzv = dz.data();
            double* gw = layer.grad_w.data();
            double* gb = layer.grad_b.data();
            for (int b = 0; b < B; ++b) {
                const double* irow = in + static_cast<std::size_t>(b) * din;
                const double* zrow = dzv + static_cast<std::size_t>(b) * dout;
                for (int j = 0; j < dout; ++j) gb[j] += zrow[j];
                for (int k = 0; k < din; ++k) {
                    const double a = irow[k];
                    double* gwrow = gw + static_cast<std::size_t>(k) * dout;
                    for (int j = 0; j < dout; ++j) gwrow[j] += a * zrow[j];
                }
            }
            Tensor dx({B, din});
            const double* w = layer.weights.data();
            double* dxv = dx.data();
            for (int b = 0; b < B; ++b) {
                const double* zrow = dzv + static_cast<std::size_t>(b) * dout;
                double* xrow = dxv + static_cast<std::size_t>(b) * din;
                for (int k = 0; k < din; ++k) {
                    const double* wrow = w + static_cast<std::size_t>(k) * dout;
                    double acc = 0.0;
                    for (int j = 0; j < dout; ++j) acc += zrow[j] * wrow[j];
                    xrow[k] = acc;
                }
            }
            grad = std::move(dx);
        } else if (auto* c = std::get_if<Conv2DSpec>(&layer.kind)) {
            Tensor dz = activation_backward(grad, layer.cache_preact, c->act);
            const int H = layer.in_shape[0], W = layer.in_shape[1], C = layer.in_shape[2];
            const int kh = c->kernel_h, kw = c->kernel_w, F = c->filters;
            const int OH = layer.out_shape[0], OW = layer.out_shape[1];
            layer.grad_w.fill(0.0);
            layer.grad_b.fill(0.0);
            Tensor dx(with_batch(B, layer.in_shape));
            double* gw = layer.grad_w.data();
            double* gb = layer.grad_b.data();
            const double* kv = layer.weights.data();
            for (int b = 0; b < B; ++b) {
                for (int oy = 0; oy < OH; ++oy) {
                    for (int ox = 0; ox < OW; ++ox) {
                        const double* zrow = &dz.at(b, oy, ox, 0);
                        for (int f = 0; f < F; ++f) gb[f] += zrow[f];
                        for (int dy = 0; dy < kh; ++dy) {
                            for (int dxp = 0; dxp < kw; ++dxp) {
                                const double* irow = &layer.cache_in.at(b, oy + dy, ox + dxp, 0);
                                double* xrow = &dx.at(b, oy + dy, ox + dxp, 0);
                                const std::size_t koff =
                                    (static_cast<std::size_t>(dy) * kw + dxp) * C * F;
                                for (int ch = 0; ch < C; ++ch) {
                                    const double a = irow[ch];
                                    double* gwrow = gw + koff + static_cast<std::size_t>(ch) * F;
                                    const double* krow = kv + koff + static_cast<std::size_t>(ch) * F;
                                    double acc = 0.0;
                                    for (int f = 0; f < F; ++f) {
                                        gwrow[f] += a * zrow[f];
                                        acc += krow[f] * zrow[f];
                                    }
                                    xrow[ch] += acc;
                                }
                            }
                        }
                    }
                }
            }
            grad = std::move(dx);
        } else if (std::holds_alternative<MaxPool2DSpec>(layer.kind)) {
            Tensor dx(with_batch(B, layer.in_shape));
            const double* g = grad.data();
            const double* am = layer.cache_mask.data();
            double* dxv = dx.data();
            const std::int64_t n = grad.size();
            for (std::int64_t i = 0; i < n; ++i)
                dxv[static_cast<std::int64_t>(am[i])] += g[i];
            grad = std::move(dx);
        } else if (std::holds_alternative<FlattenSpec>(layer.kind)) {
            grad.reshape(with_batch(B, layer.in_shape));
        } else if (std::holds_alternative<DropoutSpec>(layer.kind)) {
            if (!layer.cache_mask.same_shape(grad))
                throw StateError("Network::backward: dropout mask missing");
            double* g = grad.data();
            const double* m = layer.cache_mask.data();
            const std::int64_t n = grad.size();
            for (std::int64_t i = 0; i < n; ++i) g[i] *= m[i];
        }  // ChannelStub: identity
    }
    return grad;
}

void Network::zero_grads() {
    for (auto& layer : layers_) {
        if (layer.weights.size() == 0) continue;
        layer.grad_w.fill(0.0);
        layer.grad_b.fill(0.0);
    }
}

std::vector<Tensor> Network::snapshot_params() const {
    std::vector<Tensor> out;
    for (const auto& layer : layers_) {
        if (layer.weights.size() == 0) continue;
        out.push_back(layer.weights);
        out.push_back(layer.bias);
    }
    return out;
}

void Network::restore_params(const std::vector<Tensor>& params) {
    std::size_t i = 0;
    for (auto& layer : layers_) {
        if (layer.weights.size() == 0) continue;
        if (i + 2 > params.size()) throw StateError("restore_params: too few tensors");
        if (!params[i].same_shape(layer.weights) || !params[i + 1].same_shape(layer.bias))
            throw ShapeError("restore_params: shape mismatch");
        layer.weights = params[i];
        layer.bias = params[i + 1];
        i += 2;
    }
    if (i != params.size()) throw StateError("restore_params: tensor count mismatch");
    has_cache_ = false;
}

std::int64_t Network::param_count() const {
    std::int64_t n = 0;
    for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
    return n;
}

// ---- Adam ----

void adam_step(Tensor& params, const Tensor& grads, Tensor& m, Tensor& v, long step,
               const AdamConfig& cfg) {
    if (!params.same_shape(grads) || !params.same_shape(m) || !params.same_shape(v))
        throw ShapeError("adam_step: params/grads/moments must be shape-congruent");
    if (step < 1) throw StateError("adam_step: step must be >= 1");
    const double b1 = cfg.beta1, b2 = cfg.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));
    double* p = params.data();
    const double* g = grads.data();
    double* mv = m.data();
    double* vv = v.data();
    const std::int64_t n = params.size();
    for (std::int64_t i = 0; i < n; ++i) {
        mv[i] = b1 * mv[i] + (1.0 - b1) * g[i];
        vv[i] = b2 * vv[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = mv[i] / bc1;
        const double vhat = vv[i] / bc2;
        p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

AdamState::AdamState(Network& net, AdamConfig cfg) : cfg_(cfg) {
    net.for_each_param([this](Tensor& p, Tensor&) {
        m_.push_back(Tensor(p.shape()));
        v_.push_back(Tensor(p.shape()));
    });
}

void AdamState::step(Network& net) {
    ++step_;
    std::size_t i = 0;
    net.for_each_param([&](Tensor& p, Tensor& g) {
        if (i >= m_.size()) throw StateError("AdamState: parameter count changed");
        adam_step(p, g, m_[i], v_[i], step_, cfg_);
        ++i;
    });
    if (i != m_.size()) throw StateError("AdamState: parameter count changed");
}

}  // namespace mtoc
