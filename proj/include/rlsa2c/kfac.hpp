#pragma once

#include <vector>

#include "rlsa2c/core.hpp"
#include "rlsa2c/linalg.hpp"

namespace rlsa2c {

/// Kronecker-factored state for the NPG actor output layer: inverse Fisher
/// factors P1 (input side) and P2 (score side) plus the compatible parameter w.
struct KfacActorState {
    SpdMat p1;               // N_{l-1} x N_{l-1}
    SpdMat p2;               // N_l x N_l
    std::vector<double> w;   // N_{l-1} N_l, row-major vec convention
    double lambda = 1.0;
    double alpha_init = 0.01;
    double alpha_decrement = 0.002;
    std::size_t alpha_period = 5000;
    double alpha_floor = 0.001;
    /// When set, applies the update direction exactly as printed in the source
    /// derivation (which increases the compatible-regression residual); the
    /// default direction descends on it.
    bool literal_gw_sign = false;

    std::size_t in_dim() const { return p1.rows; }
    std::size_t out_dim() const { return p2.rows; }
};

/// Per-sample averaged rank-1 inverse updates (no cross-sample averaging of
/// the inputs themselves).
inline void kfac_factor_update(SpdMat& p, const Mat& rows, double k, double lambda) {
    check(p.rows == rows.cols, "kfac_factor_update: dim mismatch");
    const std::size_t m = rows.rows;
    const std::size_t dim = p.rows;
    Mat acc(dim, dim);
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < dim; ++j) x[j] = rows(i, j);
        const std::vector<double> px = matvec(p, x);
        const double denom = lambda + k * dot(x, px);
        check(denom >= lambda - 1e-12, "kfac_factor_update: denominator below lambda");
        const double scale = k / (double(m) * denom);
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b) acc(a, b) += scale * px[a] * px[b];
    }
    const double inv_l = 1.0 / lambda;
    for (std::size_t i = 0; i < p.size(); ++i) p.data[i] = inv_l * (p.data[i] - acc.data[i]);
    symmetrize(p);
}

inline void kfac_p1_update(KfacActorState& state, const Mat& x, double k) {
    kfac_factor_update(state.p1, x, k, state.lambda);
}

inline void kfac_p2_update(KfacActorState& state, const Mat& gz, double k) {
    kfac_factor_update(state.p2, gz, k, state.lambda);
}

/// Compatible advantage w^T vec(x g^T) = x^T m(w) g, without materializing
/// the outer product.
inline double compatible_advantage(const std::vector<double>& w, const std::vector<double>& x,
                                   const std::vector<double>& g) {
    check(w.size() == x.size() * g.size(), "compatible_advantage: dim mismatch");
    double out = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double row = 0.0;
        const double* wrow = &w[i * g.size()];
        for (std::size_t j = 0; j < g.size(); ++j) row += wrow[j] * g[j];
        out += x[i] * row;
    }
    return out;
}

/// RLS update of the compatible parameter from the pre-update P factors.
/// The applied direction reduces the residual (A - w^T G)^2 on a frozen batch;
/// `literal_gw_sign` flips it to the as-printed form.
inline void kfac_w_update(KfacActorState& state, const Mat& x, const Mat& gz,
                          const std::vector<double>& adv, double k) {
    const std::size_t m = x.rows;
    check(gz.rows == m && adv.size() == m, "kfac_w_update: batch mismatch");
    check(x.cols == state.in_dim() && gz.cols == state.out_dim(), "kfac_w_update: dim mismatch");
    Mat gw_mean(state.in_dim(), state.out_dim());
    std::vector<double> xi(x.cols), gi(gz.cols);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) xi[j] = x(i, j);
        for (std::size_t j = 0; j < gz.cols; ++j) gi[j] = gz(i, j);
        const double d1 = state.lambda + k * dot(xi, matvec(state.p1, xi));
        const double d2 = state.lambda + k * dot(gi, matvec(state.p2, gi));
        check(d1 >= state.lambda - 1e-12 && d2 >= state.lambda - 1e-12,
              "kfac_w_update: denominator below lambda");
        const double resid = adv[i] - compatible_advantage(state.w, xi, gi);
        const double scale = resid / (double(m) * d1 * d2);
        for (std::size_t a = 0; a < x.cols; ++a)
            for (std::size_t b = 0; b < gz.cols; ++b) gw_mean(a, b) += scale * xi[a] * gi[b];
    }
    const Mat delta = matmul(matmul(state.p1, gw_mean), state.p2);
    const double sign = state.literal_gw_sign ? -1.0 : 1.0;
    for (std::size_t i = 0; i < state.w.size(); ++i) state.w[i] += sign * delta.data[i];
}

/// NPG ascent step on the actor output weight: Theta += alpha m(w).
inline void npg_actor_step(const KfacActorState& state, Mat& theta, double alpha) {
    check(theta.rows == state.in_dim() && theta.cols == state.out_dim(),
          "npg_actor_step: shape mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) theta.data[i] += alpha * state.w[i];
}

inline double alpha_schedule(const KfacActorState& state, std::size_t total_timesteps) {
    return std::max(
        state.alpha_init - double(total_timesteps / state.alpha_period) * state.alpha_decrement,
        state.alpha_floor);
}

}  // namespace rlsa2c
