#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtoc/tensor.hpp"

namespace mtoc {

enum class DatasetId : std::uint8_t { MNIST, FashionMNIST, CIFAR10 };

std::string dataset_name(DatasetId id);
DatasetId parse_dataset(std::string_view name);  // "mnist" | "fashion" | "cifar10"

const std::array<std::string, 10>& class_names(DatasetId id);

struct Dataset {
    DatasetId id{};
    Tensor train_images;  // N×H×W×C in [0,1]
    Tensor test_images;
    std::vector<std::uint8_t> train_labels;
    std::vector<std::uint8_t> test_labels;

    std::int64_t train_count() const { return static_cast<std::int64_t>(train_labels.size()); }
    std::int64_t test_count() const { return static_cast<std::int64_t>(test_labels.size()); }
};

/// IDX pair (big-endian, magic 0x803/0x801), gzip accepted transparently.
/// Images come back as N×rows×cols×1 raw bytes (0..255, as doubles).
std::pair<Tensor, std::vector<std::uint8_t>> load_idx(const std::filesystem::path& image_path,
                                                      const std::filesystem::path& label_path);

/// CIFAR-10 binary batches (3073-byte records); channel-planar pixels are
/// rearranged to interleaved N×32×32×3 raw bytes.
std::pair<Tensor, std::vector<std::uint8_t>> load_cifar10(
    const std::vector<std::filesystem::path>& batch_paths);

/// Maps raw bytes to [0,1] by /255; rejects out-of-range input.
Tensor normalize(const Tensor& raw);

/// Loads + normalizes one dataset from `dir` using the conventional file
/// names (IDX under mnist/fashion, data_batch_*.bin + test_batch.bin under
/// cifar10). When dir contains manifest.json, every file consumed is
/// CRC-checked against it first.
Dataset load_dataset(DatasetId id, const std::filesystem::path& dir);

/// CRC-32 (zlib polynomial) of a whole file, for manifests.
std::uint32_t file_crc32(const std::filesystem::path& path);

/// Seed-determined epoch permutations split into batches; the final short
/// batch is kept.
class Batcher {
public:
    Batcher(std::int64_t num_samples, int batch_size, std::uint64_t seed);

    std::int64_t num_samples() const { return num_samples_; }
    int batch_size() const { return batch_size_; }
    int num_batches() const;

    /// Regenerates this epoch's permutation (epochs are 0-based and may be
    /// revisited in any order — the permutation depends only on seed+epoch).
    void begin_epoch(int epoch);
    std::span<const int> batch(int i) const;

private:
    std::int64_t num_samples_;
    int batch_size_;
    std::uint64_t seed_;
    std::vector<int> order_;
};

}  // namespace mtoc
