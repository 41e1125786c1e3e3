#include "mtoc/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "mtoc/errors.hpp"

namespace mtoc {

namespace {

constexpr char kMagic[8] = {'M', 'T', 'O', 'C', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kEndianTag = 0x01020304u;

void write_bytes(std::ofstream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <class T>
void write_pod(std::ofstream& os, T v) {
    write_bytes(os, &v, sizeof(T));
}

void write_string(std::ofstream& os, const std::string& s) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    write_bytes(os, s.data(), s.size());
}

void write_shape(std::ofstream& os, const std::vector<int>& shape) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(shape.size()));
    for (int d : shape) write_pod<std::int32_t>(os, d);
}

void write_tensor(std::ofstream& os, const Tensor& t) {
    write_shape(os, t.shape());
    write_bytes(os, t.data(), static_cast<std::size_t>(t.size()) * sizeof(double));
}

void read_bytes(std::ifstream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw FormatError("checkpoint: truncated file");
}

template <class T>
T read_pod(std::ifstream& is) {
    T v;
    read_bytes(is, &v, sizeof(T));
    return v;
}

std::string read_string(std::ifstream& is) {
    const auto n = read_pod<std::uint32_t>(is);
    if (n > (1u << 20)) throw FormatError("checkpoint: implausible string length");
    std::string s(n, '\0');
    if (n) read_bytes(is, s.data(), n);
    return s;
}

std::vector<int> read_shape(std::ifstream& is) {
    const auto rank = read_pod<std::uint32_t>(is);
    if (rank > 8) throw FormatError("checkpoint: implausible tensor rank");
    std::vector<int> shape(rank);
    for (auto& d : shape) d = read_pod<std::int32_t>(is);
    return shape;
}

Tensor read_tensor(std::ifstream& is) {
    auto shape = read_shape(is);
    Tensor t(shape);
    read_bytes(is, t.data(), static_cast<std::size_t>(t.size()) * sizeof(double));
    return t;
}

void write_kind(std::ofstream& os, const LayerKind& kind) {
    write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(kind.index()));
    if (auto* d = std::get_if<DenseSpec>(&kind)) {
        write_pod<std::int32_t>(os, d->out_size);
        write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(d->act));
    } else if (auto* c = std::get_if<Conv2DSpec>(&kind)) {
        write_pod<std::int32_t>(os, c->filters);
        write_pod<std::int32_t>(os, c->kernel_h);
        write_pod<std::int32_t>(os, c->kernel_w);
        write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(c->act));
    } else if (auto* p = std::get_if<MaxPool2DSpec>(&kind)) {
        write_pod<std::int32_t>(os, p->pool_h);
        write_pod<std::int32_t>(os, p->pool_w);
    } else if (auto* dr = std::get_if<DropoutSpec>(&kind)) {
        write_pod<double>(os, dr->rate);
    }  // Flatten, ChannelStub: no payload
}

Activation read_activation(std::ifstream& is) {
    const auto a = read_pod<std::uint8_t>(is);
    if (a > 2) throw FormatError("checkpoint: unknown activation id " + std::to_string(a));
    return static_cast<Activation>(a);
}

LayerKind read_kind(std::ifstream& is) {
    const auto id = read_pod<std::uint8_t>(is);
    switch (id) {
        case 0: {
            DenseSpec d;
            d.out_size = read_pod<std::int32_t>(is);
            d.act = read_activation(is);
            return d;
        }
        case 1: {
            Conv2DSpec c;
            c.filters = read_pod<std::int32_t>(is);
            c.kernel_h = read_pod<std::int32_t>(is);
            c.kernel_w = read_pod<std::int32_t>(is);
            c.act = read_activation(is);
            return c;
        }
        case 2: {
            MaxPool2DSpec p;
            p.pool_h = read_pod<std::int32_t>(is);
            p.pool_w = read_pod<std::int32_t>(is);
            return p;
        }
        case 3: return FlattenSpec{};
        case 4: {
            DropoutSpec dr;
            dr.rate = read_pod<double>(is);
            return dr;
        }
        case 5: return ChannelStubSpec{};
        default: throw FormatError("checkpoint: unknown layer id " + std::to_string(id));
    }
}

std::ifstream open_and_check_header(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint " + file.string());
    char magic[8];
    read_bytes(is, magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("not a checkpoint file: " + file.string());
    const auto tag = read_pod<std::uint32_t>(is);
    if (tag != kEndianTag)
        throw FormatError("checkpoint " + file.string() + " has incompatible byte order");
    return is;
}

}  // namespace

void save_networks(const std::filesystem::path& file,
                   const std::vector<std::pair<std::string, const Network*>>& sections) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write checkpoint " + file.string());
    write_bytes(os, kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(os, kEndianTag);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(sections.size()));
    for (const auto& [name, net] : sections) {
        if (!net) throw ValueError("save_networks: null network for section " + name);
        write_string(os, name);
        write_shape(os, net->input_shape());
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net->num_layers()));
        for (int i = 0; i < net->num_layers(); ++i) {
            write_kind(os, net->kind(i));
            if (net->has_params(i)) {
                write_tensor(os, net->weights(i));
                write_tensor(os, net->bias(i));
            }
        }
    }
    if (!os) throw IoError("write failed for checkpoint " + file.string());
}

std::vector<std::string> checkpoint_sections(const std::filesystem::path& file) {
    auto is = open_and_check_header(file);
    const auto count = read_pod<std::uint32_t>(is);
    std::vector<std::string> names;
    names.reserve(count);
    for (std::uint32_t s = 0; s < count; ++s) {
        names.push_back(read_string(is));
        read_shape(is);
        const auto layers = read_pod<std::uint32_t>(is);
        for (std::uint32_t i = 0; i < layers; ++i) {
            const LayerKind kind = read_kind(is);
            if (std::holds_alternative<DenseSpec>(kind) ||
                std::holds_alternative<Conv2DSpec>(kind)) {
                read_tensor(is);
                read_tensor(is);
            }
        }
    }
    return names;
}

Network load_network(const std::filesystem::path& file, const std::string& section) {
    auto is = open_and_check_header(file);
    const auto count = read_pod<std::uint32_t>(is);
    for (std::uint32_t s = 0; s < count; ++s) {
        const std::string name = read_string(is);
        const auto input_shape = read_shape(is);
        const auto layer_count = read_pod<std::uint32_t>(is);
        std::vector<LayerKind> kinds;
        std::vector<Tensor> params;
        kinds.reserve(layer_count);
        for (std::uint32_t i = 0; i < layer_count; ++i) {
            kinds.push_back(read_kind(is));
            if (std::holds_alternative<DenseSpec>(kinds.back()) ||
                std::holds_alternative<Conv2DSpec>(kinds.back())) {
                params.push_back(read_tensor(is));
                params.push_back(read_tensor(is));
            }
        }
        if (name != section) continue;
        Network net(input_shape, std::move(kinds));
        net.restore_params(params);
        return net;
    }
    throw ValueError("checkpoint " + file.string() + " has no section '" + section + "'");
}

}  // namespace mtoc
