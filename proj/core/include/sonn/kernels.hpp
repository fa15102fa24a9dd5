#pragma once

#include <vector>

#include "sonn/tensor.hpp"

namespace sonn {

/// Fractional feature-map displacement in pixels: alpha moves rows, beta
/// moves columns. Sampling at (m + alpha, n + beta) with positive values
/// pulls content up and to the left.
struct ShiftPair {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Same-resolution 2-D correlation (no kernel flip) with zero padding of
/// (K-1)/2 on each side:
///   out[b,o,m,n] = bias[o] + sum_{c,r,t} weight[o,c,r,t] * in[b,c,m+r-p,n+t-p]
/// input [B,Cin,H,W], weight [Cout,Cin,K,K] with K odd, bias [Cout].
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias);

struct Conv2dGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
};

/// Exact adjoint of conv2d with respect to all three arguments.
Conv2dGrads conv2d_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weight);

/// Concatenates elementwise powers 1..degree along the channel axis,
/// power-major: output channel (q-1)*C + c holds input channel c raised to q.
/// [B,C,H,W] -> [B,C*degree,H,W].
Tensor power_expand(const Tensor& input, int degree);

/// Adjoint of power_expand: grad_in[c] = sum_q q * in[c]^(q-1) * grad_out[(q-1)*C + c],
/// with 0^0 taken as 1 so the q = 1 term stays exact at zero inputs.
Tensor power_expand_backward(const Tensor& grad_out, const Tensor& input, int degree);

/// Resamples every channel at (m + alpha_c, n + beta_c) by bilinear
/// interpolation; samples outside [0,H-1]x[0,W-1] contribute zero. One
/// ShiftPair per channel. Integer shifts are exact translations.
Tensor bilinear_shift(const Tensor& input, const std::vector<ShiftPair>& shifts);

/// Adjoint of bilinear_shift: scatters each output gradient to its four
/// source pixels with the forward interpolation weights.
Tensor bilinear_shift_backward(const Tensor& grad_out, const std::vector<ShiftPair>& shifts);

}  // namespace sonn
