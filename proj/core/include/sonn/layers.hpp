#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sonn/kernels.hpp"
#include "sonn/tensor.hpp"

namespace sonn {

enum class Activation { Tanh, Linear };

/// One layer of a compact denoising network. q = 1 and gamma = 0 is a plain
/// convolutional layer; q > 1 a generative-neuron layer; gamma > 0 adds the
/// frozen per-channel kernel shifts of a super-neuron layer.
struct LayerSpec {
    int in_channels = 0;
    int out_channels = 0;
    int kernel_size = 3;
    int q = 1;             // Maclaurin degree of the kernel transformation
    double gamma = 0.0;    // shift bound; |alpha|,|beta| <= gamma
    Activation activation = Activation::Tanh;
};

struct NetworkConfig {
    std::string name;
    std::vector<LayerSpec> layers;
};

/// Trainable state of one layer. The weight holds the q power banks
/// concatenated along the input-channel axis: [out, in*q, k, k]. Shifts are
/// drawn once at initialization and never trained.
struct LayerState {
    Tensor weight;
    Tensor bias;
    std::vector<ShiftPair> shifts;  // one per input channel; all zero when gamma = 0
};

using NetworkState = std::vector<LayerState>;

/// Intermediates retained by a forward pass for the exact backward pass.
struct LayerCache {
    Tensor shifted;   // after bilinear_shift
    Tensor expanded;  // after power_expand
    Tensor output;    // after activation
};

/// activation(conv2d(power_expand(bilinear_shift(input, shifts), q), weight, bias)).
/// With gamma = 0 this is a generative-neuron layer; with q = 1 as well, a
/// convolution. Pass a cache to retain the intermediates for layer_backward.
Tensor layer_forward(const LayerSpec& spec, const LayerState& state, const Tensor& input,
                     LayerCache* cache = nullptr);

struct LayerGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
};

/// Chain-rule composition of the kernel adjoints. Shifts receive no gradient.
LayerGrads layer_backward(const LayerSpec& spec, const LayerState& state,
                          const LayerCache& cache, const Tensor& grad_out);

/// Convenience overload that reruns the forward pass to build the cache.
LayerGrads layer_backward(const LayerSpec& spec, const LayerState& state, const Tensor& input,
                          const Tensor& grad_out);

Tensor network_forward(const NetworkConfig& config, const NetworkState& state,
                       const Tensor& input, std::vector<LayerCache>* caches = nullptr);

/// Backpropagates grad_out through every layer; result[l] carries the
/// parameter gradients of layer l and result[0].input the gradient with
/// respect to the network input.
std::vector<LayerGrads> network_backward(const NetworkConfig& config, const NetworkState& state,
                                         const std::vector<LayerCache>& caches,
                                         const Tensor& grad_out);

/// Builds the 4-layer compact architecture (two hidden layers) for a model
/// name of the form CNN-W, Self-ONN-Q-W or Super-ONN-Q-W with Q in {3,5,7}.
/// Super models get shift bound 5 on the two hidden layers, zero on the input
/// and output layers. Hidden activation tanh, output linear.
NetworkConfig build_network(const std::string& name, int channels = 1);

/// Copy of config with the shift bound of every interior layer replaced.
NetworkConfig with_hidden_gamma(NetworkConfig config, double gamma);

/// Throws if adjacent channel extents disagree or a boundary layer has a
/// nonzero shift bound.
void validate_config(const NetworkConfig& config);

/// Fan-in-scaled uniform weights (bound (in*q*k^2)^-1/2), zero biases, and for
/// gamma > 0 one (alpha, beta) pair per input channel drawn uniformly from
/// (-gamma, gamma). Weight and shift draws use separate substreams, so states
/// with different gamma share identical weights for the same seed.
NetworkState init_network(const NetworkConfig& config, std::uint64_t seed);

/// Trainable parameter count: sum over layers of out*in*q*k^2 + out.
/// Shifts are frozen and not counted.
std::uint64_t count_params(const NetworkConfig& config);

}  // namespace sonn
