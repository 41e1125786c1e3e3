#include "mtoc/model.hpp"

#include <cmath>

#include "mtoc/checkpoint.hpp"
#include "mtoc/errors.hpp"

namespace mtoc {

namespace {
constexpr double kNormFloor = 1e-12;  // under ‖z‖², keeps 0-vectors finite
}

std::string config_name(ConfigId cfg) {
    switch (cfg) {
        case ConfigId::MNIST_FNN: return "MNIST_FNN";
        case ConfigId::FASHION_CNN: return "FASHION_CNN";
        case ConfigId::CIFAR_CNN: return "CIFAR_CNN";
    }
    throw ValueError("unknown config id");
}

ConfigId config_for(DatasetId dataset) {
    switch (dataset) {
        case DatasetId::MNIST: return ConfigId::MNIST_FNN;
        case DatasetId::FashionMNIST: return ConfigId::FASHION_CNN;
        case DatasetId::CIFAR10: return ConfigId::CIFAR_CNN;
    }
    throw ValueError("unknown dataset id");
}

DatasetId dataset_for(ConfigId cfg) {
    switch (cfg) {
        case ConfigId::MNIST_FNN: return DatasetId::MNIST;
        case ConfigId::FASHION_CNN: return DatasetId::FashionMNIST;
        case ConfigId::CIFAR_CNN: return DatasetId::CIFAR10;
    }
    throw ValueError("unknown config id");
}

std::vector<int> input_shape(ConfigId cfg) {
    return cfg == ConfigId::CIFAR_CNN ? std::vector<int>{32, 32, 3}
                                      : std::vector<int>{28, 28, 1};
}

Network build_encoder(ConfigId cfg, int n_c) {
    if (n_c < 2) throw ConfigError("build_encoder: n_c must be >= 2, got " + std::to_string(n_c));
    std::vector<LayerKind> layers;
    switch (cfg) {
        case ConfigId::MNIST_FNN:
            layers = {FlattenSpec{},
                      DenseSpec{256, Activation::ReLU},
                      DenseSpec{128, Activation::ReLU},
                      DenseSpec{n_c, Activation::Linear}};
            break;
        case ConfigId::FASHION_CNN:
            layers = {Conv2DSpec{32, 3, 3, Activation::ReLU},
                      MaxPool2DSpec{2, 2},
                      Conv2DSpec{32, 3, 3, Activation::ReLU},
                      MaxPool2DSpec{2, 2},
                      FlattenSpec{},
                      DropoutSpec{0.5},
                      DenseSpec{128, Activation::ReLU},
                      DenseSpec{n_c, Activation::Linear}};
            break;
        case ConfigId::CIFAR_CNN:
            layers = {Conv2DSpec{8, 3, 3, Activation::ReLU},
                      Conv2DSpec{4, 3, 3, Activation::ReLU},
                      MaxPool2DSpec{2, 2},
                      DropoutSpec{0.1},
                      Conv2DSpec{4, 3, 3, Activation::ReLU},
                      MaxPool2DSpec{2, 2},
                      DropoutSpec{0.1},
                      FlattenSpec{},
                      DenseSpec{128, Activation::ReLU},
                      DenseSpec{n_c, Activation::Linear}};
            break;
    }
    return Network(input_shape(cfg), std::move(layers));
}

Network build_decoder(int n_c) {
    if (n_c < 2) throw ConfigError("build_decoder: n_c must be >= 2, got " + std::to_string(n_c));
    return Network({n_c}, {DenseSpec{n_c, Activation::ReLU},
                           DenseSpec{n_c / 2, Activation::ReLU},
                           DenseSpec{2, Activation::Softmax}});
}

Tensor power_normalize(const Tensor& z) {
    if (z.rank() != 2) throw ShapeError("power_normalize: z must be B×n_c");
    const int B = z.dim(0), nc = z.dim(1);
    const double c = std::sqrt(static_cast<double>(nc));
    Tensor out({B, nc});
    const double* zv = z.data();
    double* o = out.data();
    for (int b = 0; b < B; ++b) {
        const double* row = zv + static_cast<std::size_t>(b) * nc;
        double s2 = kNormFloor;
        for (int j = 0; j < nc; ++j) s2 += row[j] * row[j];
        const double scale = c / std::sqrt(s2);
        double* orow = o + static_cast<std::size_t>(b) * nc;
        for (int j = 0; j < nc; ++j) orow[j] = scale * row[j];
    }
    return out;
}

Tensor power_normalize_backward(const Tensor& upstream, const Tensor& z) {
    if (!upstream.same_shape(z) || z.rank() != 2)
        throw ShapeError("power_normalize_backward: upstream/z must both be B×n_c");
    const int B = z.dim(0), nc = z.dim(1);
    const double c = std::sqrt(static_cast<double>(nc));
    Tensor out({B, nc});
    for (int b = 0; b < B; ++b) {
        const double* row = z.data() + static_cast<std::size_t>(b) * nc;
        const double* u = upstream.data() + static_cast<std::size_t>(b) * nc;
        double* o = out.data() + static_cast<std::size_t>(b) * nc;
        double s2 = kNormFloor, dot = 0.0;
        for (int j = 0; j < nc; ++j) {
            s2 += row[j] * row[j];
            dot += row[j] * u[j];
        }
        const double inv_s = 1.0 / std::sqrt(s2);
        // d/dz of c·z/√(‖z‖²+ε): c(u/s − z(z·u)/s³)
        for (int j = 0; j < nc; ++j)
            o[j] = c * inv_s * (u[j] - row[j] * dot * inv_s * inv_s);
    }
    return out;
}

MtocSystem assemble(ConfigId cfg, int n_c, const std::vector<ReceiverSpec>& receivers,
                    std::uint64_t seed) {
    if (receivers.empty()) throw ConfigError("assemble: need at least one receiver");
    MtocSystem sys;
    sys.config = cfg;
    sys.n_c = n_c;
    sys.encoder = build_encoder(cfg, n_c);
    {
        Rng rng(derive_seed(seed, "encoder"));
        sys.encoder.init_params(rng);
    }
    sys.receivers.reserve(receivers.size());
    for (std::size_t i = 0; i < receivers.size(); ++i) {
        const auto& spec = receivers[i];
        if (!(spec.weight >= 0.0 && spec.weight <= 1.0))
            throw ConfigError("assemble: receiver " + std::to_string(i) + " weight " +
                              std::to_string(spec.weight) + " outside [0,1]");
        spec.channel.validate();
        spec.task.validate();
        Receiver r;
        r.channel = spec.channel;
        r.channel.seed = derive_seed(seed, "channel", i);
        r.task = spec.task;
        r.weight = spec.weight;
        r.decoder = build_decoder(n_c);
        Rng rng(derive_seed(seed, "decoder", i));
        r.decoder.init_params(rng);
        if (r.decoder.input_shape() != std::vector<int>{sys.encoder.output_width()})
            throw ConfigError("assemble: decoder input width does not match encoder output");
        sys.receivers.push_back(std::move(r));
    }
    return sys;
}

void save_system(const MtocSystem& sys, const std::filesystem::path& file) {
    std::vector<std::pair<std::string, const Network*>> sections;
    sections.emplace_back("encoder", &sys.encoder);
    for (int i = 0; i < sys.n(); ++i)
        sections.emplace_back("decoder." + std::to_string(i), &sys.receivers[i].decoder);
    save_networks(file, sections);
}

void load_system_params(MtocSystem& sys, const std::filesystem::path& file) {
    Network enc = load_network(file, "encoder");
    sys.encoder.restore_params(enc.snapshot_params());
    for (int i = 0; i < sys.n(); ++i) {
        Network dec = load_network(file, "decoder." + std::to_string(i));
        sys.receivers[i].decoder.restore_params(dec.snapshot_params());
    }
}

}  // namespace mtoc
