#pragma once

#include <cmath>
#include <vector>

#include "rlsa2c/core.hpp"

namespace rlsa2c {

/// Symmetric positive definite matrix. The SPD invariant is maintained by the
/// update routines below (every rank-1 update re-symmetrizes the result).
using SpdMat = Mat;

inline void symmetrize(Mat& p) {
    check(p.rows == p.cols, "symmetrize: not square");
    for (std::size_t i = 0; i < p.rows; ++i)
        for (std::size_t j = i + 1; j < p.cols; ++j) {
            const double v = 0.5 * (p(i, j) + p(j, i));
            p(i, j) = v;
            p(j, i) = v;
        }
}

/// Row-major flattening, so that vec(x g^T) = x (kron) g.
inline std::vector<double> vec_rowmajor(const Mat& m) {
    check(m.finite(), "vec_rowmajor: non-finite input");
    return m.data;
}

inline Mat mat_from_vec(const std::vector<double>& b, std::size_t n, std::size_t m) {
    check(b.size() == n * m, "mat_from_vec: length mismatch");
    Mat out(n, m);
    out.data = b;
    return out;
}

/// Rank-1 inverse update: returns (1/lambda)(P - k P x x^T P / (lambda + k x^T P x)),
/// the inverse of lambda P^{-1} + k x x^T.
inline SpdMat sherman_morrison_step(const SpdMat& p, const std::vector<double>& x, double k,
                                    double lambda) {
    check(p.rows == p.cols && p.rows == x.size(), "sherman_morrison_step: shape mismatch");
    for (double v : x) check(std::isfinite(v), "sherman_morrison_step: non-finite x");
    const std::vector<double> px = matvec(p, x);
    const double denom = lambda + k * dot(x, px);
    check(denom >= lambda - 1e-15, "sherman_morrison_step: denominator below lambda");
    SpdMat out(p.rows, p.cols);
    const double inv_l = 1.0 / lambda;
    const double scale = k / denom;
    for (std::size_t i = 0; i < p.rows; ++i)
        for (std::size_t j = 0; j < p.cols; ++j)
            out(i, j) = inv_l * (p(i, j) - scale * px[i] * px[j]);
    symmetrize(out);
    return out;
}

/// (P1 (kron) P2) b under the row-major vec convention, computed as
/// vec(P1 * m(b) * P2) without materializing the Kronecker product.
inline std::vector<double> kron_apply(const SpdMat& p1, const std::vector<double>& b,
                                      const SpdMat& p2) {
    check(p1.rows == p1.cols && p2.rows == p2.cols, "kron_apply: factors must be square");
    check(b.size() == p1.rows * p2.rows, "kron_apply: dimension mismatch");
    const Mat mb = mat_from_vec(b, p1.rows, p2.rows);
    return vec_rowmajor(matmul(matmul(p1, mb), p2));
}

/// Global L2-norm clipping over a gradient set, in place.
/// Returns the pre-clip global norm.
inline double l2_clip(const std::vector<std::vector<double>*>& grads, double max_norm) {
    check(max_norm > 0.0, "l2_clip: max_norm must be positive");
    double sq = 0.0;
    for (auto* g : grads)
        for (double v : *g) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        for (auto* g : grads)
            for (double& v : *g) v *= scale;
    }
    return norm;
}

}  // namespace rlsa2c
