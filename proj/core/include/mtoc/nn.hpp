#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mtoc/rng.hpp"
#include "mtoc/tensor.hpp"

namespace mtoc {

enum class Activation : std::uint8_t { ReLU, Linear, Softmax };

struct DenseSpec {
    int out_size;
    Activation act = Activation::ReLU;
};
struct Conv2DSpec {
    int filters;
    int kernel_h;
    int kernel_w;
    Activation act = Activation::ReLU;
};
struct MaxPool2DSpec {
    int pool_h;
    int pool_w;
};
struct FlattenSpec {};
struct DropoutSpec {
    double rate;
};
/// Marker for the position of the wireless channel when a layer list is
/// serialized; forward/backward are the identity inside a Network.
struct ChannelStubSpec {};

using LayerKind = std::variant<DenseSpec, Conv2DSpec, MaxPool2DSpec, FlattenSpec,
                               DropoutSpec, ChannelStubSpec>;

std::string layer_name(const LayerKind& kind);

// ---- layer primitives (batch-first tensors) ----

/// Affine map: out[b,j] = sum_k input[b,k]*weights[k,j] + bias[j].
/// Activation is the caller's job.
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

/// Valid (no padding), stride-1 cross-correlation.
/// input B×H×W×C, kernels kh×kw×C×F, bias F -> B×(H-kh+1)×(W-kw+1)×F.
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias);

/// Non-overlapping windowed max, stride = pool size; partial windows dropped.
/// If argmax is non-null it receives the flat input index of each winner
/// (needed to route gradients).
Tensor maxpool2d_forward(const Tensor& input, int pool_h, int pool_w,
                         Tensor* argmax = nullptr);

/// Inverted dropout: training mode zeroes elements with probability `rate`
/// and scales survivors by 1/(1-rate); inference mode is the identity.
/// `mask` (when non-null) receives the per-element multiplier.
Tensor dropout_forward(const Tensor& input, double rate, bool training, Rng* rng,
                       Tensor* mask = nullptr);

void apply_activation(Tensor& t, Activation act);

/// Row-wise numerically stabilized softmax.
Tensor softmax(const Tensor& logits);

struct CrossEntropyResult {
    double loss;   // mean over the batch
    Tensor probs;  // B×K
    Tensor grad;   // dLoss/dlogits = (probs - onehot)/B
};

/// Fused softmax + categorical cross-entropy over integer class labels.
CrossEntropyResult softmax_cross_entropy(const Tensor& logits,
                                         std::span<const std::uint8_t> labels);

// ---- network ----

/// Ordered layer stack with parameters, gradients, and the forward cache
/// needed for reverse-mode differentiation. Single-writer during training;
/// `infer` is const and safe to call concurrently on a frozen network.
class Network {
public:
    Network() = default;
    Network(std::vector<int> input_shape, std::vector<LayerKind> kinds);

    /// Glorot-uniform weights, zero biases, drawn in layer order.
    void init_params(Rng& rng);

    const std::vector<int>& input_shape() const { return input_shape_; }
    const std::vector<int>& output_shape() const { return output_shape_; }
    int output_width() const;

    /// Training-mode forward: caches activations for backward, applies
    /// dropout, and leaves a final Softmax activation to the fused loss
    /// (the returned tensor holds logits in that case).
    Tensor forward(const Tensor& batch, Rng* dropout_rng = nullptr);

    /// Inference-mode forward: pure function of (params, batch). Dropout is
    /// the identity and a final Softmax is materialized.
    Tensor infer(const Tensor& batch) const;

    /// Like infer but leaves a final Softmax unapplied; used when the caller
    /// wants stable log-probabilities.
    Tensor infer_logits(const Tensor& batch) const;

    /// Reverse pass from dLoss/dOutput; overwrites parameter gradients and
    /// returns dLoss/dInput. Requires a preceding training-mode forward.
    Tensor backward(const Tensor& upstream);

    void zero_grads();

    int num_layers() const { return static_cast<int>(layers_.size()); }
    const LayerKind& kind(int i) const { return layers_[static_cast<std::size_t>(i)].kind; }
    bool has_params(int i) const { return layers_[static_cast<std::size_t>(i)].weights.size() > 0; }
    const Tensor& weights(int i) const { return layers_[static_cast<std::size_t>(i)].weights; }
    const Tensor& bias(int i) const { return layers_[static_cast<std::size_t>(i)].bias; }
    Tensor& mutable_weights(int i) { return layers_[static_cast<std::size_t>(i)].weights; }
    Tensor& mutable_bias(int i) { return layers_[static_cast<std::size_t>(i)].bias; }

    /// f(Tensor& param, Tensor& grad) over every parameter tensor, in a
    /// fixed order (layer by layer, weights then bias).
    template <class F>
    void for_each_param(F&& f) {
        for (auto& layer : layers_) {
            if (layer.weights.size() > 0) {
                f(layer.weights, layer.grad_w);
                f(layer.bias, layer.grad_b);
            }
        }
    }

    std::vector<Tensor> snapshot_params() const;
    void restore_params(const std::vector<Tensor>& params);
    std::int64_t param_count() const;

private:
    struct Layer {
        LayerKind kind;
        std::vector<int> in_shape;   // per-sample
        std::vector<int> out_shape;  // per-sample
        Tensor weights, bias;
        Tensor grad_w, grad_b;
        // training cache
        Tensor cache_in;
        Tensor cache_preact;
        Tensor cache_mask;  // dropout multipliers or pooling argmax indices
    };

    Tensor run_forward(const Tensor& batch, bool materialize_softmax) const;

    std::vector<int> input_shape_;
    std::vector<int> output_shape_;
    std::vector<Layer> layers_;
    bool has_cache_ = false;
    int cached_batch_ = 0;
};

// ---- Adam ----

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
};

/// One bias-corrected Adam update on a single parameter tensor.
/// `step` is 1-based and must already be incremented for this update.
void adam_step(Tensor& params, const Tensor& grads, Tensor& m, Tensor& v,
               long step, const AdamConfig& cfg);

/// Adam moments for every parameter of one network.
class AdamState {
public:
    AdamState() = default;
    AdamState(Network& net, AdamConfig cfg);

    /// Applies one update from the gradients currently stored in the network.
    void step(Network& net);

    long step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_{};
    long step_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace mtoc
