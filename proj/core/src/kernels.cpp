#include "sonn/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "sonn/errors.hpp"
#include "sonn/parallel.hpp"

namespace sonn {

namespace {

void check_map4(const Tensor& t, const char* who) {
    if (t.rank() != 4)
        throw DimensionError(std::string(who) + ": expected a 4-D [B,C,H,W] tensor");
}

// [B,C,H,W] -> [B,C,H+2p,W+2p] with a zero border.
Tensor zero_pad(const Tensor& input, std::size_t pad) {
    const std::size_t b = input.extent(0), c = input.extent(1);
    const std::size_t h = input.extent(2), w = input.extent(3);
    Tensor out({b, c, h + 2 * pad, w + 2 * pad});
    const std::size_t wp = w + 2 * pad;
    const double* src = input.data();
    double* dst = out.data();
    for (std::size_t bc = 0; bc < b * c; ++bc) {
        const double* s = src + bc * h * w;
        double* d = dst + bc * (h + 2 * pad) * wp + pad * wp + pad;
        for (std::size_t m = 0; m < h; ++m)
            for (std::size_t n = 0; n < w; ++n) d[m * wp + n] = s[m * w + n];
    }
    return out;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    check_map4(input, "conv2d");
    if (weight.rank() != 4 || weight.extent(2) != weight.extent(3))
        throw DimensionError("conv2d: weight must be [Cout,Cin,K,K]");
    const std::size_t batch = input.extent(0), cin = input.extent(1);
    const std::size_t h = input.extent(2), w = input.extent(3);
    const std::size_t cout = weight.extent(0), k = weight.extent(2);
    if (weight.extent(1) != cin)
        throw DimensionError("conv2d: weight expects " + std::to_string(weight.extent(1)) +
                             " input channels, got " + std::to_string(cin));
    if (k % 2 == 0) throw ParameterError("conv2d: kernel size must be odd");
    if (bias.rank() != 1 || bias.extent(0) != cout)
        throw DimensionError("conv2d: bias must be [Cout]");

    const std::size_t pad = (k - 1) / 2;
    const Tensor padded = zero_pad(input, pad);
    const std::size_t hp = h + 2 * pad, wp = w + 2 * pad;

    Tensor out({batch, cout, h, w});
    // One (b,o) plane per item; the c,r,t accumulation order is fixed, so
    // results are identical at every thread count.
    parallel_for(batch * cout, cin * k * k * h * w, [&](std::size_t begin, std::size_t end) {
        for (std::size_t bo = begin; bo < end; ++bo) {
            const std::size_t b = bo / cout, o = bo % cout;
            double* dst = out.data() + (b * cout + o) * h * w;
            const double bv = bias[o];
            for (std::size_t i = 0; i < h * w; ++i) dst[i] = bv;
            for (std::size_t c = 0; c < cin; ++c) {
                const double* src = padded.data() + (b * cin + c) * hp * wp;
                const double* wk = weight.data() + (o * cin + c) * k * k;
                for (std::size_t r = 0; r < k; ++r) {
                    for (std::size_t t = 0; t < k; ++t) {
                        const double wv = wk[r * k + t];
                        for (std::size_t m = 0; m < h; ++m) {
                            const double* srow = src + (m + r) * wp + t;
                            double* drow = dst + m * w;
                            for (std::size_t n = 0; n < w; ++n) drow[n] += wv * srow[n];
                        }
                    }
                }
            }
        }
    });
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weight) {
    check_map4(grad_out, "conv2d_backward");
    check_map4(input, "conv2d_backward");
    const std::size_t batch = input.extent(0), cin = input.extent(1);
    const std::size_t h = input.extent(2), w = input.extent(3);
    const std::size_t cout = weight.extent(0), k = weight.extent(2);
    if (weight.rank() != 4 || weight.extent(1) != cin || weight.extent(2) != weight.extent(3))
        throw DimensionError("conv2d_backward: weight/input channel mismatch");
    if (k % 2 == 0) throw ParameterError("conv2d_backward: kernel size must be odd");
    if (grad_out.extent(0) != batch || grad_out.extent(1) != cout ||
        grad_out.extent(2) != h || grad_out.extent(3) != w)
        throw DimensionError("conv2d_backward: grad_out shape mismatch");

    const std::size_t pad = (k - 1) / 2;
    const std::size_t hp = h + 2 * pad, wp = w + 2 * pad;
    const Tensor padded = zero_pad(input, pad);

    Conv2dGrads grads;

    // d/d input: scatter through the padded buffer, then crop the border.
    Tensor gpad({batch, cin, hp, wp});
    parallel_for(batch * cin, cout * k * k * h * w, [&](std::size_t begin, std::size_t end) {
        for (std::size_t bc = begin; bc < end; ++bc) {
            const std::size_t b = bc / cin, c = bc % cin;
            double* dst = gpad.data() + (b * cin + c) * hp * wp;
            for (std::size_t o = 0; o < cout; ++o) {
                const double* gsrc = grad_out.data() + (b * cout + o) * h * w;
                const double* wk = weight.data() + (o * cin + c) * k * k;
                for (std::size_t r = 0; r < k; ++r) {
                    for (std::size_t t = 0; t < k; ++t) {
                        const double wv = wk[r * k + t];
                        for (std::size_t m = 0; m < h; ++m) {
                            double* drow = dst + (m + r) * wp + t;
                            const double* grow = gsrc + m * w;
                            for (std::size_t n = 0; n < w; ++n) drow[n] += wv * grow[n];
                        }
                    }
                }
            }
        }
    });
    grads.input = Tensor({batch, cin, h, w});
    for (std::size_t bc = 0; bc < batch * cin; ++bc) {
        const double* s = gpad.data() + bc * hp * wp + pad * wp + pad;
        double* d = grads.input.data() + bc * h * w;
        for (std::size_t m = 0; m < h; ++m)
            for (std::size_t n = 0; n < w; ++n) d[m * w + n] = s[m * wp + n];
    }

    // d/d weight: per (o,c) kernel plane, fixed-order sum over b,m,n.
    grads.weight = Tensor({cout, cin, k, k});
    parallel_for(cout * cin, k * k * batch * h * w, [&](std::size_t begin, std::size_t end) {
        for (std::size_t oc = begin; oc < end; ++oc) {
            const std::size_t o = oc / cin, c = oc % cin;
            double* wk = grads.weight.data() + (o * cin + c) * k * k;
            for (std::size_t r = 0; r < k; ++r) {
                for (std::size_t t = 0; t < k; ++t) {
                    double s = 0.0;
                    for (std::size_t b = 0; b < batch; ++b) {
                        const double* gsrc = grad_out.data() + (b * cout + o) * h * w;
                        const double* src = padded.data() + (b * cin + c) * hp * wp;
                        for (std::size_t m = 0; m < h; ++m) {
                            const double* grow = gsrc + m * w;
                            const double* srow = src + (m + r) * wp + t;
                            for (std::size_t n = 0; n < w; ++n) s += grow[n] * srow[n];
                        }
                    }
                    wk[r * k + t] = s;
                }
            }
        }
    });

    grads.bias = Tensor({cout});
    for (std::size_t o = 0; o < cout; ++o) {
        double s = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* gsrc = grad_out.data() + (b * cout + o) * h * w;
            for (std::size_t i = 0; i < h * w; ++i) s += gsrc[i];
        }
        grads.bias[o] = s;
    }
    return grads;
}

Tensor power_expand(const Tensor& input, int degree) {
    check_map4(input, "power_expand");
    if (degree < 1) throw ParameterError("power_expand: degree must be >= 1");
    const std::size_t batch = input.extent(0), c = input.extent(1);
    const std::size_t h = input.extent(2), w = input.extent(3);
    const std::size_t plane = h * w;
    Tensor out({batch, c * degree, h, w});
    parallel_for(batch * c, degree * plane, [&](std::size_t begin, std::size_t end) {
        for (std::size_t bc = begin; bc < end; ++bc) {
            const std::size_t b = bc / c, ch = bc % c;
            const double* src = input.data() + (b * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                const double x = src[i];
                double p = x;
                for (int q = 0; q < degree; ++q) {
                    out.data()[((b * degree + q) * c + ch) * plane + i] = p;
                    p *= x;
                }
            }
        }
    });
    return out;
}

Tensor power_expand_backward(const Tensor& grad_out, const Tensor& input, int degree) {
    check_map4(grad_out, "power_expand_backward");
    check_map4(input, "power_expand_backward");
    if (degree < 1) throw ParameterError("power_expand_backward: degree must be >= 1");
    const std::size_t batch = input.extent(0), c = input.extent(1);
    const std::size_t h = input.extent(2), w = input.extent(3);
    if (grad_out.extent(0) != batch || grad_out.extent(1) != c * degree ||
        grad_out.extent(2) != h || grad_out.extent(3) != w)
        throw DimensionError("power_expand_backward: grad_out must have C*degree channels");
    const std::size_t plane = h * w;
    Tensor grad_in({batch, c, h, w});
    parallel_for(batch * c, degree * plane, [&](std::size_t begin, std::size_t end) {
        for (std::size_t bc = begin; bc < end; ++bc) {
            const std::size_t b = bc / c, ch = bc % c;
            const double* src = input.data() + (b * c + ch) * plane;
            double* dst = grad_in.data() + (b * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                const double x = src[i];
                double xp = 1.0;  // x^(q-1); covers 0^0 = 1 at q = 1
                double s = 0.0;
                for (int q = 1; q <= degree; ++q) {
                    const double g = grad_out.data()[((b * degree + q - 1) * c + ch) * plane + i];
                    s += static_cast<double>(q) * xp * g;
                    xp *= x;
                }
                dst[i] = s;
            }
        }
    });
    return grad_in;
}

Tensor bilinear_shift(const Tensor& input, const std::vector<ShiftPair>& shifts) {
    check_map4(input, "bilinear_shift");
    const std::size_t batch = input.extent(0), c = input.extent(1);
    const std::size_t h = input.extent(2), w = input.extent(3);
    if (shifts.size() != c)
        throw DimensionError("bilinear_shift: need one ShiftPair per channel, got " +
                             std::to_string(shifts.size()) + " for " + std::to_string(c));
    const std::size_t plane = h * w;
    Tensor out({batch, c, h, w});
    parallel_for(batch * c, 4 * plane, [&](std::size_t begin, std::size_t end) {
        for (std::size_t bc = begin; bc < end; ++bc) {
            const std::size_t ch = bc % c;
            const double alpha = shifts[ch].alpha, beta = shifts[ch].beta;
            // The shift is constant over the map, so the integer / fractional
            // split of the sample coordinates is too.
            const long ia = static_cast<long>(std::floor(alpha));
            const long ib = static_cast<long>(std::floor(beta));
            const double fa = alpha - static_cast<double>(ia);
            const double fb = beta - static_cast<double>(ib);
            const double w00 = (1.0 - fa) * (1.0 - fb), w01 = (1.0 - fa) * fb;
            const double w10 = fa * (1.0 - fb), w11 = fa * fb;
            const double* src = input.data() + bc * plane;
            double* dst = out.data() + bc * plane;
            const long lh = static_cast<long>(h), lw = static_cast<long>(w);
            for (long m = 0; m < lh; ++m) {
                const long y0 = m + ia, y1 = y0 + 1;
                const bool y0in = y0 >= 0 && y0 < lh, y1in = y1 >= 0 && y1 < lh;
                double* drow = dst + m * lw;
                for (long n = 0; n < lw; ++n) {
                    const long x0 = n + ib, x1 = x0 + 1;
                    const bool x0in = x0 >= 0 && x0 < lw, x1in = x1 >= 0 && x1 < lw;
                    double v = 0.0;
                    if (y0in && x0in) v += w00 * src[y0 * lw + x0];
                    if (y0in && x1in) v += w01 * src[y0 * lw + x1];
                    if (y1in && x0in) v += w10 * src[y1 * lw + x0];
                    if (y1in && x1in) v += w11 * src[y1 * lw + x1];
                    drow[n] = v;
                }
            }
        }
    });
    return out;
}

Tensor bilinear_shift_backward(const Tensor& grad_out, const std::vector<ShiftPair>& shifts) {
    check_map4(grad_out, "bilinear_shift_backward");
    const std::size_t batch = grad_out.extent(0), c = grad_out.extent(1);
    const std::size_t h = grad_out.extent(2), w = grad_out.extent(3);
    if (shifts.size() != c)
        throw DimensionError("bilinear_shift_backward: need one ShiftPair per channel");
    const std::size_t plane = h * w;
    Tensor grad_in({batch, c, h, w});
    // Shifts are per channel, so each (b,c) plane scatters only into itself.
    parallel_for(batch * c, 4 * plane, [&](std::size_t begin, std::size_t end) {
        for (std::size_t bc = begin; bc < end; ++bc) {
            const std::size_t ch = bc % c;
            const double alpha = shifts[ch].alpha, beta = shifts[ch].beta;
            const long ia = static_cast<long>(std::floor(alpha));
            const long ib = static_cast<long>(std::floor(beta));
            const double fa = alpha - static_cast<double>(ia);
            const double fb = beta - static_cast<double>(ib);
            const double w00 = (1.0 - fa) * (1.0 - fb), w01 = (1.0 - fa) * fb;
            const double w10 = fa * (1.0 - fb), w11 = fa * fb;
            const double* gsrc = grad_out.data() + bc * plane;
            double* dst = grad_in.data() + bc * plane;
            const long lh = static_cast<long>(h), lw = static_cast<long>(w);
            for (long m = 0; m < lh; ++m) {
                const long y0 = m + ia, y1 = y0 + 1;
                const bool y0in = y0 >= 0 && y0 < lh, y1in = y1 >= 0 && y1 < lh;
                const double* grow = gsrc + m * lw;
                for (long n = 0; n < lw; ++n) {
                    const long x0 = n + ib, x1 = x0 + 1;
                    const bool x0in = x0 >= 0 && x0 < lw, x1in = x1 >= 0 && x1 < lw;
                    const double g = grow[n];
                    if (y0in && x0in) dst[y0 * lw + x0] += w00 * g;
                    if (y0in && x1in) dst[y0 * lw + x1] += w01 * g;
                    if (y1in && x0in) dst[y1 * lw + x0] += w10 * g;
                    if (y1in && x1in) dst[y1 * lw + x1] += w11 * g;
                }
            }
        }
    });
    return grad_in;
}

}  // namespace sonn
