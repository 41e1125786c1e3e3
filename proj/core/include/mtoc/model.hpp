#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtoc/channel.hpp"
#include "mtoc/data.hpp"
#include "mtoc/nn.hpp"
#include "mtoc/tasks.hpp"

namespace mtoc {

enum class ConfigId : std::uint8_t { MNIST_FNN, FASHION_CNN, CIFAR_CNN };

std::string config_name(ConfigId cfg);
ConfigId config_for(DatasetId dataset);
DatasetId dataset_for(ConfigId cfg);
std::vector<int> input_shape(ConfigId cfg);

/// Encoder stacks (ending in Dense n_c, Linear):
///   MNIST_FNN:   flatten → 256 ReLU → 128 ReLU → n_c
///   FASHION_CNN: Conv32 3×3 → Pool2 → Conv32 3×3 → Pool2 → flatten
///                → Dropout .5 → 128 ReLU → n_c
///   CIFAR_CNN:   Conv8 3×3 → Conv4 3×3 → Pool2 → Dropout .1 → Conv4 3×3
///                → Pool2 → Dropout .1 → flatten → 128 ReLU → n_c
Network build_encoder(ConfigId cfg, int n_c);

/// n_c → n_c ReLU → ⌊n_c/2⌋ ReLU → 2 Softmax.
Network build_decoder(int n_c);

/// Per-sample transmit-power constraint: y = √n_c · z/‖z‖, giving each row
/// average symbol power 1 (a 1e-12 floor under the norm keeps it smooth).
Tensor power_normalize(const Tensor& z);
/// dL/dz for the pair (z, upstream) of the matching forward.
Tensor power_normalize_backward(const Tensor& upstream, const Tensor& z);

struct ReceiverSpec {
    ChannelConfig channel;
    TaskSpec task;
    double weight = 1.0;
};

struct Receiver {
    ChannelConfig channel;
    Network decoder;
    TaskSpec task;
    double weight = 1.0;
};

/// One shared encoder, n independent (channel, decoder, task, weight) paths.
struct MtocSystem {
    ConfigId config{};
    int n_c = 0;
    Network encoder;
    std::vector<Receiver> receivers;

    int n() const { return static_cast<int>(receivers.size()); }
};

/// Builds and initializes the whole system. Parameter and channel streams
/// are derived per slot ("encoder", "decoder"/i, "channel"/i) so that
/// systems sharing a base seed share slot-wise randomness regardless of how
/// many receivers they carry.
MtocSystem assemble(ConfigId cfg, int n_c, const std::vector<ReceiverSpec>& receivers,
                    std::uint64_t seed);

/// Checkpoint sections: "encoder", "decoder.0", "decoder.1", …
void save_system(const MtocSystem& sys, const std::filesystem::path& file);
/// Restores parameters into an assembled system of the same architecture.
void load_system_params(MtocSystem& sys, const std::filesystem::path& file);

}  // namespace mtoc
