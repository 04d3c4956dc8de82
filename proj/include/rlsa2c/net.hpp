#pragma once

#include <cstdint>
#include <vector>

#include "rlsa2c/core.hpp"
#include "rlsa2c/im2col.hpp"
#include "rlsa2c/rng.hpp"

namespace rlsa2c {

enum class Activation { Identity, ReLU, Tanh };

inline double activate(Activation a, double z) {
    switch (a) {
        case Activation::ReLU: return z > 0.0 ? z : 0.0;
        case Activation::Tanh: return std::tanh(z);
        default: return z;
    }
}

inline double activate_grad(Activation a, double z) {
    switch (a) {
        case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        default: return 1.0;
    }
}

/// Fully-connected layer, Y = f(X W + b). Bias is optional; only the Gaussian
/// policy head carries one in this codebase.
struct FcLayer {
    Mat weight;                 // N_{l-1} x N_l
    std::vector<double> bias;   // empty when the layer has no bias
    Activation act = Activation::Identity;

    std::size_t in_dim() const { return weight.rows; }
    std::size_t out_dim() const { return weight.cols; }
};

/// Convolutional layer. The kernel is held in patch-matrix form
/// (C_{l-1} Hk Wk x C_l), the same layout im2col produces.
struct ConvLayer {
    Mat weight;  // C_{l-1} Hk Wk x C_l
    std::size_t c_in = 0, c_out = 0, kh = 0, kw = 0, stride = 1;
    Activation act = Activation::ReLU;
};

/// Kernel tensor (C_{l-1} x C_l x Hk x Wk) -> patch matrix. Matches im2col row order.
inline Mat conv_kernel_to_mat(const Tensor4& kernel) {
    Mat out(kernel.n * kernel.h * kernel.w, kernel.c);
    for (std::size_t ci = 0; ci < kernel.n; ++ci)
        for (std::size_t co = 0; co < kernel.c; ++co)
            for (std::size_t ky = 0; ky < kernel.h; ++ky)
                for (std::size_t kx = 0; kx < kernel.w; ++kx)
                    out((ci * kernel.h + ky) * kernel.w + kx, co) = kernel.at(ci, co, ky, kx);
    return out;
}

/// Inverse of conv_kernel_to_mat.
inline Tensor4 conv_mat_to_kernel(const Mat& m, std::size_t c_in, std::size_t c_out,
                                  std::size_t kh, std::size_t kw) {
    check(m.rows == c_in * kh * kw && m.cols == c_out, "conv_mat_to_kernel: shape mismatch");
    Tensor4 out(c_in, c_out, kh, kw);
    for (std::size_t ci = 0; ci < c_in; ++ci)
        for (std::size_t co = 0; co < c_out; ++co)
            for (std::size_t ky = 0; ky < kh; ++ky)
                for (std::size_t kx = 0; kx < kw; ++kx)
                    out.at(ci, co, ky, kx) = m((ci * kh + ky) * kw + kx, co);
    return out;
}

struct FcCache {
    Mat x;  // layer input
    Mat z;  // pre-activation
    Mat y;  // activation output
};

struct ConvCache {
    std::size_t n = 0;
    ConvShape shape{};
    std::vector<Mat> xhat;  // per-sample im2col patches
    Tensor4 z;
    Tensor4 y;
};

inline FcCache fc_forward(const FcLayer& layer, const Mat& x) {
    check(x.cols == layer.in_dim(), "fc_forward: input width mismatch");
    FcCache cache;
    cache.x = x;
    cache.z = matmul(x, layer.weight);
    if (!layer.bias.empty()) {
        check(layer.bias.size() == layer.out_dim(), "fc_forward: bias size mismatch");
        for (std::size_t i = 0; i < cache.z.rows; ++i)
            for (std::size_t j = 0; j < cache.z.cols; ++j) cache.z(i, j) += layer.bias[j];
    }
    cache.y = cache.z;
    for (double& v : cache.y.data) v = activate(layer.act, v);
    return cache;
}

inline ConvCache conv_forward(const ConvLayer& layer, const Tensor4& x) {
    ConvCache cache;
    cache.n = x.n;
    cache.shape = conv_shape(layer.c_in, x.h, x.w, layer.kh, layer.kw, layer.stride);
    check(x.c == layer.c_in, "conv_forward: channel mismatch");
    cache.z = Tensor4(x.n, layer.c_out, cache.shape.h_out, cache.shape.w_out);
    cache.y = cache.z;
    cache.xhat.reserve(x.n);
    for (std::size_t i = 0; i < x.n; ++i) {
        Mat patches = im2col_sample(x, i, cache.shape);
        // Z_{:,:,j} = Xhat_{:,:,j}^T Theta_hat per output pixel j
        Mat zs = matmul(transpose(patches), layer.weight);  // (HW) x C_out
        for (std::size_t co = 0; co < layer.c_out; ++co)
            for (std::size_t oy = 0; oy < cache.shape.h_out; ++oy)
                for (std::size_t ox = 0; ox < cache.shape.w_out; ++ox) {
                    const double z = zs(oy * cache.shape.w_out + ox, co);
                    cache.z.at(i, co, oy, ox) = z;
                    cache.y.at(i, co, oy, ox) = activate(layer.act, z);
                }
        cache.xhat.push_back(std::move(patches));
    }
    return cache;
}

/// dL/dY -> (dL/dW, dL/db, dL/dX) for an fc layer.
inline void fc_backward(const FcLayer& layer, const FcCache& cache, const Mat& dy, Mat& dweight,
                        std::vector<double>& dbias, Mat& dx) {
    check(dy.rows == cache.z.rows && dy.cols == cache.z.cols, "fc_backward: dy shape mismatch");
    Mat dz = dy;
    for (std::size_t i = 0; i < dz.size(); ++i)
        dz.data[i] *= activate_grad(layer.act, cache.z.data[i]);
    dweight = matmul(transpose(cache.x), dz);
    if (!layer.bias.empty()) {
        dbias.assign(layer.out_dim(), 0.0);
        for (std::size_t i = 0; i < dz.rows; ++i)
            for (std::size_t j = 0; j < dz.cols; ++j) dbias[j] += dz(i, j);
    } else {
        dbias.clear();
    }
    dx = matmul(dz, transpose(layer.weight));
}

/// dL/dY -> (dL/dW in patch-matrix form, dL/dX) for a conv layer.
inline void conv_backward(const ConvLayer& layer, const ConvCache& cache, const Tensor4& dy,
                          Mat& dweight, Tensor4& dx) {
    const ConvShape& cs = cache.shape;
    dweight = Mat(layer.weight.rows, layer.weight.cols);
    dx = Tensor4(cache.n, cs.c_in, cs.h_in, cs.w_in);
    for (std::size_t i = 0; i < cache.n; ++i) {
        Mat dz(cs.h_out * cs.w_out, layer.c_out);
        for (std::size_t co = 0; co < layer.c_out; ++co)
            for (std::size_t oy = 0; oy < cs.h_out; ++oy)
                for (std::size_t ox = 0; ox < cs.w_out; ++ox)
                    dz(oy * cs.w_out + ox, co) =
                        dy.at(i, co, oy, ox) *
                        activate_grad(layer.act, cache.z.at(i, co, oy, ox));
        Mat dwi = matmul(cache.xhat[i], dz);
        for (std::size_t j = 0; j < dweight.size(); ++j) dweight.data[j] += dwi.data[j];
        Mat dpatch = matmul(layer.weight, transpose(dz));  // patch x HW
        col2im_add(dpatch, i, cs, dx);
    }
}

/// Shared trunk: conv stack (may be empty), flatten, fc stack (may be empty).
struct Net {
    std::vector<ConvLayer> convs;
    std::vector<FcLayer> fcs;
};

struct NetCache {
    std::vector<ConvCache> convs;
    Mat flat;  // flattened conv output (or raw input for pure-fc nets)
    std::vector<FcCache> fcs;
    const Mat& output() const { return fcs.empty() ? flat : fcs.back().y; }
};

struct NetGrads {
    std::vector<Mat> conv_w;
    std::vector<Mat> fc_w;
    std::vector<std::vector<double>> fc_b;
};

inline Mat flatten(const Tensor4& x) {
    Mat out(x.n, x.c * x.h * x.w);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) = x.data[i * out.cols + j];
    return out;
}

inline Tensor4 unflatten(const Mat& m, std::size_t c, std::size_t h, std::size_t w) {
    check(m.cols == c * h * w, "unflatten: shape mismatch");
    Tensor4 out(m.rows, c, h, w);
    out.data = m.data;
    return out;
}

inline NetCache net_forward(const Net& net, const Tensor4& x) {
    NetCache cache;
    const Tensor4* cur = &x;
    for (const auto& layer : net.convs) {
        cache.convs.push_back(conv_forward(layer, *cur));
        cur = &cache.convs.back().y;
    }
    cache.flat = flatten(*cur);
    const Mat* m = &cache.flat;
    for (const auto& layer : net.fcs) {
        cache.fcs.push_back(fc_forward(layer, *m));
        m = &cache.fcs.back().y;
    }
    return cache;
}

inline NetCache net_forward(const Net& net, const Mat& x) {
    check(net.convs.empty(), "net_forward(Mat): net has conv layers");
    NetCache cache;
    cache.flat = x;
    const Mat* m = &cache.flat;
    for (const auto& layer : net.fcs) {
        cache.fcs.push_back(fc_forward(layer, *m));
        m = &cache.fcs.back().y;
    }
    return cache;
}

inline NetGrads net_backward(const Net& net, const NetCache& cache, const Mat& dtop) {
    NetGrads grads;
    grads.conv_w.resize(net.convs.size());
    grads.fc_w.resize(net.fcs.size());
    grads.fc_b.resize(net.fcs.size());
    Mat dm = dtop;
    for (std::size_t li = net.fcs.size(); li-- > 0;) {
        Mat dx;
        fc_backward(net.fcs[li], cache.fcs[li], dm, grads.fc_w[li], grads.fc_b[li], dx);
        dm = std::move(dx);
    }
    if (!net.convs.empty()) {
        const ConvCache& last = cache.convs.back();
        Tensor4 dt = unflatten(dm, last.y.c, last.y.h, last.y.w);
        for (std::size_t li = net.convs.size(); li-- > 0;) {
            Tensor4 dx;
            conv_backward(net.convs[li], cache.convs[li], dt, grads.conv_w[li], dx);
            dt = std::move(dx);
        }
    }
    return grads;
}

/// Uniform(+-1/sqrt(fan_in)) init, deterministic per rng stream.
inline void init_fc(FcLayer& layer, Rng& rng) {
    const double bound = 1.0 / std::sqrt(double(layer.in_dim()));
    for (double& v : layer.weight.data) v = rng.uniform(-bound, bound);
    for (double& v : layer.bias) v = rng.uniform(-bound, bound);
}

inline void init_conv(ConvLayer& layer, Rng& rng) {
    const double bound = 1.0 / std::sqrt(double(layer.c_in * layer.kh * layer.kw));
    for (double& v : layer.weight.data) v = rng.uniform(-bound, bound);
}

inline void init_net(Net& net, Rng& rng) {
    for (auto& l : net.convs) init_conv(l, rng);
    for (auto& l : net.fcs) init_fc(l, rng);
}

inline FcLayer make_fc(std::size_t in, std::size_t out, Activation act, bool bias = false) {
    FcLayer l;
    l.weight = Mat(in, out);
    if (bias) l.bias.assign(out, 0.0);
    l.act = act;
    return l;
}

inline ConvLayer make_conv(std::size_t c_in, std::size_t c_out, std::size_t kh, std::size_t kw,
                           std::size_t stride) {
    ConvLayer l;
    l.c_in = c_in;
    l.c_out = c_out;
    l.kh = kh;
    l.kw = kw;
    l.stride = stride;
    l.weight = Mat(c_in * kh * kw, c_out);
    return l;
}

}  // namespace rlsa2c
