#include "sonn/layers.hpp"

#include <charconv>
#include <cmath>
#include <cstddef>

#include "sonn/errors.hpp"
#include "sonn/rng.hpp"

namespace sonn {

namespace {

Tensor apply_activation(Tensor z, Activation act) {
    if (act == Activation::Tanh)
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::tanh(z[i]);
    return z;
}

// dL/dz from dL/dy given y = act(z); tanh' = 1 - y^2.
Tensor activation_backward(const Tensor& grad_out, const Tensor& output, Activation act) {
    if (act == Activation::Linear) return grad_out;
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - output[i] * output[i];
    return g;
}

bool parse_int(std::string_view s, int& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Tensor layer_forward(const LayerSpec& spec, const LayerState& state, const Tensor& input,
                     LayerCache* cache) {
    if (input.rank() != 4 || input.extent(1) != static_cast<std::size_t>(spec.in_channels))
        throw DimensionError("layer_forward: input channels do not match the layer spec");
    Tensor shifted = bilinear_shift(input, state.shifts);
    Tensor expanded = power_expand(shifted, spec.q);
    Tensor out = apply_activation(conv2d(expanded, state.weight, state.bias), spec.activation);
    if (cache) {
        cache->shifted = std::move(shifted);
        cache->expanded = std::move(expanded);
        cache->output = out;
    }
    return out;
}

LayerGrads layer_backward(const LayerSpec& spec, const LayerState& state,
                          const LayerCache& cache, const Tensor& grad_out) {
    if (!grad_out.same_shape(cache.output))
        throw DimensionError("layer_backward: grad_out shape mismatch");
    const Tensor gz = activation_backward(grad_out, cache.output, spec.activation);
    Conv2dGrads cg = conv2d_backward(gz, cache.expanded, state.weight);
    Tensor gshift = power_expand_backward(cg.input, cache.shifted, spec.q);
    LayerGrads grads;
    grads.input = bilinear_shift_backward(gshift, state.shifts);
    grads.weight = std::move(cg.weight);
    grads.bias = std::move(cg.bias);
    return grads;
}

LayerGrads layer_backward(const LayerSpec& spec, const LayerState& state, const Tensor& input,
                          const Tensor& grad_out) {
    LayerCache cache;
    layer_forward(spec, state, input, &cache);
    return layer_backward(spec, state, cache, grad_out);
}

Tensor network_forward(const NetworkConfig& config, const NetworkState& state,
                       const Tensor& input, std::vector<LayerCache>* caches) {
    if (state.size() != config.layers.size())
        throw DimensionError("network_forward: state/config layer count mismatch");
    if (caches) caches->assign(config.layers.size(), LayerCache{});
    Tensor x = input;
    for (std::size_t l = 0; l < config.layers.size(); ++l)
        x = layer_forward(config.layers[l], state[l], x, caches ? &(*caches)[l] : nullptr);
    return x;
}

std::vector<LayerGrads> network_backward(const NetworkConfig& config, const NetworkState& state,
                                         const std::vector<LayerCache>& caches,
                                         const Tensor& grad_out) {
    if (caches.size() != config.layers.size())
        throw DimensionError("network_backward: cache/config layer count mismatch");
    std::vector<LayerGrads> grads(config.layers.size());
    Tensor g = grad_out;
    for (std::size_t l = config.layers.size(); l-- > 0;) {
        grads[l] = layer_backward(config.layers[l], state[l], caches[l], g);
        g = grads[l].input;
    }
    return grads;
}

NetworkConfig build_network(const std::string& name, int channels) {
    if (channels < 1) throw ParameterError("build_network: channels must be >= 1");

    int q = 1, width = 0;
    bool super = false;
    bool ok = false;
    if (name.rfind("CNN-", 0) == 0) {
        ok = parse_int(std::string_view(name).substr(4), width);
    } else {
        const bool self = name.rfind("Self-ONN-", 0) == 0;
        super = name.rfind("Super-ONN-", 0) == 0;
        if (self || super) {
            const std::string_view rest = std::string_view(name).substr(self ? 9 : 10);
            const std::size_t dash = rest.find('-');
            ok = dash != std::string_view::npos && parse_int(rest.substr(0, dash), q) &&
                 parse_int(rest.substr(dash + 1), width);
            ok = ok && (q == 3 || q == 5 || q == 7);
        }
    }
    if (!ok || width < 1)
        throw ParameterError("build_network: unrecognized model name '" + name +
                             "' (expected CNN-W, Self-ONN-Q-W or Super-ONN-Q-W, Q in {3,5,7})");

    const double hidden_gamma = super ? 5.0 : 0.0;
    NetworkConfig config;
    config.name = name;
    config.layers = {
        {channels, width, 3, q, 0.0, Activation::Tanh},
        {width, width, 3, q, hidden_gamma, Activation::Tanh},
        {width, width, 3, q, hidden_gamma, Activation::Tanh},
        {width, channels, 3, q, 0.0, Activation::Linear},
    };
    return config;
}

NetworkConfig with_hidden_gamma(NetworkConfig config, double gamma) {
    if (gamma < 0.0) throw ParameterError("with_hidden_gamma: gamma must be >= 0");
    for (std::size_t l = 1; l + 1 < config.layers.size(); ++l) config.layers[l].gamma = gamma;
    return config;
}

void validate_config(const NetworkConfig& config) {
    if (config.layers.empty()) throw ParameterError("network config has no layers");
    for (std::size_t l = 0; l < config.layers.size(); ++l) {
        const LayerSpec& s = config.layers[l];
        if (s.in_channels < 1 || s.out_channels < 1)
            throw ParameterError("layer " + std::to_string(l) + ": channel counts must be >= 1");
        if (s.kernel_size < 1 || s.kernel_size % 2 == 0)
            throw ParameterError("layer " + std::to_string(l) + ": kernel size must be odd");
        if (s.q < 1) throw ParameterError("layer " + std::to_string(l) + ": q must be >= 1");
        if (s.gamma < 0.0)
            throw ParameterError("layer " + std::to_string(l) + ": gamma must be >= 0");
        if (l > 0 && config.layers[l - 1].out_channels != s.in_channels)
            throw ParameterError("layer " + std::to_string(l) +
                                 ": input channels do not match the previous layer");
    }
    if (config.layers.front().gamma != 0.0 || config.layers.back().gamma != 0.0)
        throw ParameterError("input and output layers must have gamma = 0");
}

NetworkState init_network(const NetworkConfig& config, std::uint64_t seed) {
    validate_config(config);
    NetworkState state;
    state.reserve(config.layers.size());
    for (std::size_t l = 0; l < config.layers.size(); ++l) {
        const LayerSpec& spec = config.layers[l];
        const std::size_t out = spec.out_channels, in = spec.in_channels;
        const std::size_t k = spec.kernel_size, q = spec.q;
        LayerState st;
        st.weight = Tensor({out, in * q, k, k});
        const double bound = 1.0 / std::sqrt(static_cast<double>(in * q * k * k));
        Rng wrng(mix_seed(seed, l, 0));
        for (std::size_t i = 0; i < st.weight.size(); ++i)
            st.weight[i] = wrng.uniform(-bound, bound);
        st.bias = Tensor({out});
        st.shifts.assign(in, ShiftPair{});
        if (spec.gamma > 0.0) {
            Rng srng(mix_seed(seed, l, 1));
            for (ShiftPair& s : st.shifts) {
                s.alpha = srng.uniform(-spec.gamma, spec.gamma);
                s.beta = srng.uniform(-spec.gamma, spec.gamma);
            }
        }
        state.push_back(std::move(st));
    }
    return state;
}

std::uint64_t count_params(const NetworkConfig& config) {
    std::uint64_t n = 0;
    for (const LayerSpec& s : config.layers) {
        n += static_cast<std::uint64_t>(s.out_channels) * s.in_channels * s.q * s.kernel_size *
             s.kernel_size;
        n += s.out_channels;
    }
    return n;
}

}  // namespace sonn
