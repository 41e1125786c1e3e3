#include "mtoc/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "mtoc/errors.hpp"
#include "mtoc/rng.hpp"

namespace mtoc {

namespace fs = std::filesystem;

namespace {

// gzread handles plain files too, so .gz and raw IDX share one path.
std::vector<std::uint8_t> read_all(const fs::path& path) {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (!f) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> out;
    std::uint8_t buf[1 << 16];
    for (;;) {
        const int n = gzread(f, buf, sizeof(buf));
        if (n < 0) {
            gzclose(f);
            throw IoError("read error in " + path.string());
        }
        if (n == 0) break;
        out.insert(out.end(), buf, buf + n);
    }
    gzclose(f);
    return out;
}

std::uint32_t be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

fs::path resolve_maybe_gz(const fs::path& base) {
    if (fs::exists(base)) return base;
    fs::path gz = base;
    gz += ".gz";
    if (fs::exists(gz)) return gz;
    throw IoError("missing dataset file " + base.string() + " (also looked for .gz)");
}

void verify_manifest_entry(const fs::path& dir, const fs::path& file) {
    const fs::path manifest = dir / "manifest.json";
    if (!fs::exists(manifest)) return;
    std::ifstream is(manifest);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("unparseable manifest " + manifest.string() + ": " + e.what());
    }
    const std::string key = file.filename().string();
    if (!j.contains(key)) return;  // unlisted files are not vouched for either way
    const auto& entry = j.at(key);
    const auto want_crc = entry.at("crc32").get<std::uint32_t>();
    const auto want_bytes = entry.at("bytes").get<std::uint64_t>();
    if (fs::file_size(file) != want_bytes || file_crc32(file) != want_crc)
        throw IoError("dataset file " + file.string() + " does not match manifest " +
                      manifest.string() + " (corrupted or wrong version)");
}

}  // namespace

std::uint32_t file_crc32(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::vector<char> buf(1 << 16);
    uLong crc = crc32(0L, Z_NULL, 0);
    while (is) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto n = is.gcount();
        if (n > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf.data()),
                               static_cast<uInt>(n));
    }
    return static_cast<std::uint32_t>(crc);
}

std::string dataset_name(DatasetId id) {
    switch (id) {
        case DatasetId::MNIST: return "mnist";
        case DatasetId::FashionMNIST: return "fashion";
        case DatasetId::CIFAR10: return "cifar10";
    }
    throw ValueError("unknown dataset id");
}

DatasetId parse_dataset(std::string_view name) {
    if (name == "mnist") return DatasetId::MNIST;
    if (name == "fashion" || name == "fashion-mnist") return DatasetId::FashionMNIST;
    if (name == "cifar10" || name == "cifar-10") return DatasetId::CIFAR10;
    throw ConfigError("unknown dataset '" + std::string(name) +
                      "' (expected mnist|fashion|cifar10)");
}

const std::array<std::string, 10>& class_names(DatasetId id) {
    static const std::array<std::string, 10> mnist = {"0", "1", "2", "3", "4",
                                                      "5", "6", "7", "8", "9"};
    static const std::array<std::string, 10> fashion = {
        "T-shirt/top", "Trouser", "Pullover", "Dress", "Coat",
        "Sandal",      "Shirt",   "Sneaker",  "Bag",   "Ankle boot"};
    static const std::array<std::string, 10> cifar = {"airplane", "automobile", "bird",
                                                      "cat",      "deer",       "dog",
                                                      "frog",     "horse",      "ship",
                                                      "truck"};
    switch (id) {
        case DatasetId::MNIST: return mnist;
        case DatasetId::FashionMNIST: return fashion;
        case DatasetId::CIFAR10: return cifar;
    }
    throw ValueError("unknown dataset id");
}

std::pair<Tensor, std::vector<std::uint8_t>> load_idx(const fs::path& image_path,
                                                      const fs::path& label_path) {
    const auto ibytes = read_all(image_path);
    if (ibytes.size() < 16 || be32(ibytes.data()) != 0x00000803u)
        throw FormatError(image_path.string() + ": bad IDX image magic");
    const std::int64_t n = be32(ibytes.data() + 4);
    const std::int64_t rows = be32(ibytes.data() + 8);
    const std::int64_t cols = be32(ibytes.data() + 12);
    const std::int64_t want = 16 + n * rows * cols;
    if (static_cast<std::int64_t>(ibytes.size()) != want)
        throw FormatError(image_path.string() + ": payload is " +
                          std::to_string(ibytes.size()) + " bytes, header implies " +
                          std::to_string(want));

    const auto lbytes = read_all(label_path);
    if (lbytes.size() < 8 || be32(lbytes.data()) != 0x00000801u)
        throw FormatError(label_path.string() + ": bad IDX label magic");
    const std::int64_t ln = be32(lbytes.data() + 4);
    if (static_cast<std::int64_t>(lbytes.size()) != 8 + ln)
        throw FormatError(label_path.string() + ": truncated label payload");
    if (ln != n)
        throw FormatError(image_path.string() + " has " + std::to_string(n) + " images but " +
                          label_path.string() + " has " + std::to_string(ln) + " labels");

    Tensor images({static_cast<int>(n), static_cast<int>(rows), static_cast<int>(cols), 1});
    double* dst = images.data();
    const std::uint8_t* src = ibytes.data() + 16;
    const std::int64_t total = n * rows * cols;
    for (std::int64_t i = 0; i < total; ++i) dst[i] = static_cast<double>(src[i]);

    std::vector<std::uint8_t> labels(lbytes.begin() + 8, lbytes.end());
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] > 9)
            throw ValueError(label_path.string() + ": label " + std::to_string(labels[i]) +
                             " at index " + std::to_string(i) + " out of range");
    return {std::move(images), std::move(labels)};
}

std::pair<Tensor, std::vector<std::uint8_t>> load_cifar10(
    const std::vector<fs::path>& batch_paths) {
    constexpr std::int64_t kRecord = 3073;
    constexpr int kSide = 32, kChannels = 3;
    constexpr std::int64_t kPlane = kSide * kSide;

    std::int64_t total = 0;
    std::vector<std::vector<std::uint8_t>> files;
    files.reserve(batch_paths.size());
    for (const auto& p : batch_paths) {
        files.push_back(read_all(p));
        if (files.back().empty() || files.back().size() % kRecord != 0)
            throw FormatError(p.string() + ": size " + std::to_string(files.back().size()) +
                              " is not a multiple of 3073");
        total += static_cast<std::int64_t>(files.back().size()) / kRecord;
    }

    Tensor images({static_cast<int>(total), kSide, kSide, kChannels});
    std::vector<std::uint8_t> labels;
    labels.reserve(static_cast<std::size_t>(total));
    std::int64_t sample = 0;
    for (std::size_t f = 0; f < files.size(); ++f) {
        const auto& bytes = files[f];
        const std::int64_t records = static_cast<std::int64_t>(bytes.size()) / kRecord;
        for (std::int64_t r = 0; r < records; ++r, ++sample) {
            const std::uint8_t* rec = bytes.data() + r * kRecord;
            if (rec[0] > 9)
                throw ValueError(batch_paths[f].string() + ": label byte " +
                                 std::to_string(rec[0]) + " in record " + std::to_string(r));
            labels.push_back(rec[0]);
            const std::uint8_t* planes = rec + 1;
            double* img = images.data() +
                          static_cast<std::size_t>(sample) * kPlane * kChannels;
            for (std::int64_t px = 0; px < kPlane; ++px)
                for (int c = 0; c < kChannels; ++c)
                    img[px * kChannels + c] = static_cast<double>(planes[c * kPlane + px]);
        }
    }
    return {std::move(images), std::move(labels)};
}

Tensor normalize(const Tensor& raw) {
    Tensor out(raw.shape());
    const double* in = raw.data();
    double* o = out.data();
    const std::int64_t n = raw.size();
    for (std::int64_t i = 0; i < n; ++i) {
        if (!(in[i] >= 0.0 && in[i] <= 255.0))
            throw ValueError("normalize: value " + std::to_string(in[i]) +
                             " outside byte range");
        o[i] = in[i] / 255.0;
    }
    return out;
}

Dataset load_dataset(DatasetId id, const fs::path& dir) {
    Dataset ds;
    ds.id = id;
    Tensor train_raw, test_raw;

    if (id == DatasetId::CIFAR10) {
        std::vector<fs::path> train_files;
        for (int i = 1; i <= 5; ++i)
            train_files.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
        const fs::path test_file = dir / "test_batch.bin";
        for (const auto& p : train_files) {
            if (!fs::exists(p)) throw IoError("missing dataset file " + p.string());
            verify_manifest_entry(dir, p);
        }
        if (!fs::exists(test_file)) throw IoError("missing dataset file " + test_file.string());
        verify_manifest_entry(dir, test_file);
        std::tie(train_raw, ds.train_labels) = load_cifar10(train_files);
        std::tie(test_raw, ds.test_labels) = load_cifar10({test_file});
    } else {
        const fs::path ti = resolve_maybe_gz(dir / "train-images-idx3-ubyte");
        const fs::path tl = resolve_maybe_gz(dir / "train-labels-idx1-ubyte");
        const fs::path vi = resolve_maybe_gz(dir / "t10k-images-idx3-ubyte");
        const fs::path vl = resolve_maybe_gz(dir / "t10k-labels-idx1-ubyte");
        for (const auto& p : {ti, tl, vi, vl}) verify_manifest_entry(dir, p);
        std::tie(train_raw, ds.train_labels) = load_idx(ti, tl);
        std::tie(test_raw, ds.test_labels) = load_idx(vi, vl);
    }

    const std::int64_t want_train = (id == DatasetId::CIFAR10) ? 50000 : 60000;
    if (ds.train_count() != want_train || ds.test_count() != 10000)
        throw FormatError(dataset_name(id) + ": got " + std::to_string(ds.train_count()) +
                          "/" + std::to_string(ds.test_count()) +
                          " train/test samples, expected " + std::to_string(want_train) +
                          "/10000");

    ds.train_images = normalize(train_raw);
    ds.test_images = normalize(test_raw);
    return ds;
}

Batcher::Batcher(std::int64_t num_samples, int batch_size, std::uint64_t seed)
    : num_samples_(num_samples), batch_size_(batch_size), seed_(seed) {
    if (num_samples < 1) throw StateError("Batcher: empty dataset");
    if (batch_size < 1) throw ConfigError("Batcher: batch_size must be >= 1");
}

int Batcher::num_batches() const {
    return static_cast<int>((num_samples_ + batch_size_ - 1) / batch_size_);
}

void Batcher::begin_epoch(int epoch) {
    if (epoch < 0) throw ValueError("Batcher: epoch must be >= 0");
    order_.resize(static_cast<std::size_t>(num_samples_));
    std::iota(order_.begin(), order_.end(), 0);
    Rng rng(derive_seed(seed_, "epoch", static_cast<std::uint64_t>(epoch)));
    for (std::int64_t i = num_samples_ - 1; i > 0; --i) {
        const auto j = rng.below(static_cast<std::uint64_t>(i) + 1);
        std::swap(order_[static_cast<std::size_t>(i)], order_[static_cast<std::size_t>(j)]);
    }
}

std::span<const int> Batcher::batch(int i) const {
    if (order_.empty()) throw StateError("Batcher: begin_epoch was never called");
    if (i < 0 || i >= num_batches()) throw ValueError("Batcher: batch index out of range");
    const std::int64_t start = static_cast<std::int64_t>(i) * batch_size_;
    const std::int64_t len = std::min<std::int64_t>(batch_size_, num_samples_ - start);
    return {order_.data() + start, static_cast<std::size_t>(len)};
}

}  // namespace mtoc
