#include "sonn/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "sonn/errors.hpp"

namespace sonn {

namespace {

constexpr char kMagic[4] = {'S', 'O', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("checkpoint: truncated file");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw FormatError("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

// JSON has no Inf/NaN literals, so non-finite values travel as string tokens.
nlohmann::json encode_real(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double decode_real(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw FormatError("checkpoint: malformed real in metadata");
}

nlohmann::json config_to_json(const NetworkConfig& config) {
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerSpec& s : config.layers) {
        layers.push_back({{"in", s.in_channels},
                          {"out", s.out_channels},
                          {"k", s.kernel_size},
                          {"q", s.q},
                          {"gamma", s.gamma},
                          {"activation", s.activation == Activation::Tanh ? "tanh" : "linear"}});
    }
    return {{"name", config.name}, {"layers", layers}};
}

NetworkConfig config_from_json(const nlohmann::json& j) {
    NetworkConfig config;
    config.name = j.at("name").get<std::string>();
    for (const auto& lj : j.at("layers")) {
        LayerSpec s;
        s.in_channels = lj.at("in").get<int>();
        s.out_channels = lj.at("out").get<int>();
        s.kernel_size = lj.at("k").get<int>();
        s.q = lj.at("q").get<int>();
        s.gamma = lj.at("gamma").get<double>();
        const std::string act = lj.at("activation").get<std::string>();
        if (act == "tanh")
            s.activation = Activation::Tanh;
        else if (act == "linear")
            s.activation = Activation::Linear;
        else
            throw FormatError("checkpoint: unknown activation '" + act + "'");
        config.layers.push_back(s);
    }
    return config;
}

}  // namespace

Checkpoint make_checkpoint(const NetworkConfig& config, const NetworkState& state, int epoch,
                           double validation_psnr) {
    if (state.size() != config.layers.size())
        throw DimensionError("make_checkpoint: state/config layer count mismatch");
    Checkpoint ckpt;
    ckpt.meta = {config, epoch, validation_psnr};
    for (std::size_t l = 0; l < state.size(); ++l) {
        const std::string prefix = "layer" + std::to_string(l) + "/";
        ckpt.entries.emplace_back(prefix + "weight", state[l].weight);
        ckpt.entries.emplace_back(prefix + "bias", state[l].bias);
        Tensor shifts({state[l].shifts.size(), 2});
        for (std::size_t c = 0; c < state[l].shifts.size(); ++c) {
            shifts(c, 0) = state[l].shifts[c].alpha;
            shifts(c, 1) = state[l].shifts[c].beta;
        }
        ckpt.entries.emplace_back(prefix + "shifts", std::move(shifts));
    }
    return ckpt;
}

NetworkState state_from_checkpoint(const Checkpoint& checkpoint) {
    const std::size_t layers = checkpoint.meta.config.layers.size();
    if (checkpoint.entries.size() != 3 * layers)
        throw FormatError("checkpoint: entry count does not match the config");
    NetworkState state(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::string prefix = "layer" + std::to_string(l) + "/";
        for (const char* part : {"weight", "bias", "shifts"}) {
            const std::string want = prefix + part;
            const auto it = std::find_if(checkpoint.entries.begin(), checkpoint.entries.end(),
                                         [&](const auto& e) { return e.first == want; });
            if (it == checkpoint.entries.end())
                throw FormatError("checkpoint: missing entry '" + want + "'");
            if (want.ends_with("weight"))
                state[l].weight = it->second;
            else if (want.ends_with("bias"))
                state[l].bias = it->second;
            else {
                const Tensor& t = it->second;
                if (t.rank() != 2 || t.extent(1) != 2)
                    throw FormatError("checkpoint: shift entry must have shape [C,2]");
                state[l].shifts.resize(t.extent(0));
                for (std::size_t c = 0; c < t.extent(0); ++c)
                    state[l].shifts[c] = {t(c, 0), t(c, 1)};
            }
        }
    }
    return state;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(checkpoint.entries.size()));
    for (const auto& [name, tensor] : checkpoint.entries) {
        put_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t axis = 0; axis < tensor.rank(); ++axis)
            put_u64(os, tensor.extent(axis));
        for (std::size_t i = 0; i < tensor.size(); ++i) put_f64(os, tensor[i]);
    }
    const nlohmann::json meta = {{"config", config_to_json(checkpoint.meta.config)},
                                 {"epoch", checkpoint.meta.epoch},
                                 {"validation_psnr", encode_real(checkpoint.meta.validation_psnr)}};
    const std::string meta_str = meta.dump();
    put_u32(os, static_cast<std::uint32_t>(meta_str.size()));
    os.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
    char magic[4];
    if (!is.read(magic, 4)) throw FormatError("checkpoint: truncated file");
    if (!std::equal(magic, magic + 4, kMagic))
        throw FormatError("checkpoint: bad magic bytes in '" + path.string() + "'");
    const std::uint32_t version = get_u32(is);
    if (version != kVersion)
        throw FormatError("checkpoint: unsupported format version " + std::to_string(version));

    Checkpoint ckpt;
    const std::uint32_t count = get_u32(is);
    for (std::uint32_t e = 0; e < count; ++e) {
        const std::uint32_t name_len = get_u32(is);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw FormatError("checkpoint: truncated file");
        const std::uint32_t rank = get_u32(is);
        std::vector<std::size_t> shape(rank);
        for (std::uint32_t axis = 0; axis < rank; ++axis)
            shape[axis] = static_cast<std::size_t>(get_u64(is));
        Tensor tensor(std::move(shape));
        for (std::size_t i = 0; i < tensor.size(); ++i) tensor[i] = get_f64(is);
        ckpt.entries.emplace_back(std::move(name), std::move(tensor));
    }

    const std::uint32_t meta_len = get_u32(is);
    std::string meta_str(meta_len, '\0');
    if (!is.read(meta_str.data(), meta_len)) throw FormatError("checkpoint: truncated file");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(meta_str);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: malformed metadata JSON: ") + e.what());
    }
    try {
        ckpt.meta.config = config_from_json(meta.at("config"));
        ckpt.meta.epoch = meta.at("epoch").get<int>();
        ckpt.meta.validation_psnr = decode_real(meta.at("validation_psnr"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: incomplete metadata: ") + e.what());
    }
    return ckpt;
}

}  // namespace sonn
