#pragma once

#include <vector>

#include "rlsa2c/core.hpp"

namespace rlsa2c {

struct ConvShape {
    std::size_t c_in, h_in, w_in;
    std::size_t kh, kw, stride;
    std::size_t h_out, w_out;
};

inline ConvShape conv_shape(std::size_t c_in, std::size_t h_in, std::size_t w_in, std::size_t kh,
                            std::size_t kw, std::size_t stride) {
    check(stride >= 1, "conv_shape: stride must be >= 1");
    check(h_in >= kh && w_in >= kw, "conv_shape: kernel larger than input");
    check((h_in - kh) % stride == 0 && (w_in - kw) % stride == 0,
          "conv_shape: non-integral output size");
    return {c_in, h_in, w_in, kh, kw, stride, (h_in - kh) / stride + 1, (w_in - kw) / stride + 1};
}

/// Per-sample patch matrix: rows indexed (c, kh, kw) row-major, one column per
/// output pixel in row-major (h_out, w_out) order.
inline Mat im2col_sample(const Tensor4& x, std::size_t sample, const ConvShape& cs) {
    check(x.c == cs.c_in && x.h == cs.h_in && x.w == cs.w_in, "im2col: input shape mismatch");
    const std::size_t patch = cs.c_in * cs.kh * cs.kw;
    Mat out(patch, cs.h_out * cs.w_out);
    for (std::size_t oy = 0; oy < cs.h_out; ++oy)
        for (std::size_t ox = 0; ox < cs.w_out; ++ox) {
            const std::size_t col = oy * cs.w_out + ox;
            std::size_t row = 0;
            for (std::size_t ch = 0; ch < cs.c_in; ++ch)
                for (std::size_t ky = 0; ky < cs.kh; ++ky)
                    for (std::size_t kx = 0; kx < cs.kw; ++kx)
                        out(row++, col) = x.at(sample, ch, oy * cs.stride + ky, ox * cs.stride + kx);
        }
    return out;
}

inline std::vector<Mat> im2col(const Tensor4& x, std::size_t kh, std::size_t kw,
                               std::size_t stride) {
    const ConvShape cs = conv_shape(x.c, x.h, x.w, kh, kw, stride);
    std::vector<Mat> out;
    out.reserve(x.n);
    for (std::size_t i = 0; i < x.n; ++i) out.push_back(im2col_sample(x, i, cs));
    return out;
}

/// Scatter-add of a patch matrix back to image layout; adjoint of im2col_sample.
inline void col2im_add(const Mat& cols, std::size_t sample, const ConvShape& cs, Tensor4& x) {
    check(cols.rows == cs.c_in * cs.kh * cs.kw && cols.cols == cs.h_out * cs.w_out,
          "col2im: shape mismatch");
    for (std::size_t oy = 0; oy < cs.h_out; ++oy)
        for (std::size_t ox = 0; ox < cs.w_out; ++ox) {
            const std::size_t col = oy * cs.w_out + ox;
            std::size_t row = 0;
            for (std::size_t ch = 0; ch < cs.c_in; ++ch)
                for (std::size_t ky = 0; ky < cs.kh; ++ky)
                    for (std::size_t kx = 0; kx < cs.kw; ++kx)
                        x.at(sample, ch, oy * cs.stride + ky, ox * cs.stride + kx) +=
                            cols(row++, col);
        }
}

}  // namespace rlsa2c
