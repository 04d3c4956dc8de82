#pragma once

#include <cmath>
#include <vector>

#include "rlsa2c/core.hpp"
#include "rlsa2c/linalg.hpp"

namespace rlsa2c {

struct RmspropState {
    std::vector<double> c;  // accumulated squared gradient, per parameter
    double rho = 0.99;
    double eps = 0.00025;   // learning rate
    double delta = 0.00005;
};

inline void rmsprop_step(RmspropState& state, std::vector<double>& param,
                         const std::vector<double>& grad) {
    check(param.size() == grad.size(), "rmsprop_step: shape mismatch");
    if (state.c.empty()) state.c.assign(param.size(), 0.0);
    check(state.c.size() == param.size(), "rmsprop_step: state shape mismatch");
    for (std::size_t i = 0; i < param.size(); ++i) {
        state.c[i] = state.rho * state.c[i] + (1.0 - state.rho) * grad[i] * grad[i];
        param[i] -= state.eps / std::sqrt(state.delta + state.c[i]) * grad[i];
    }
}

/// Per-layer RLS state: autocorrelation inverse P and momentum velocity Phi.
struct RlsLayerState {
    SpdMat p;                    // P_0 = I
    std::vector<double> phi;     // velocity, lazily sized to the parameter
    double beta = 0.0;           // momentum factor
    double lambda = 1.0;         // forgetting factor
};

/// Piecewise-constant decay schedules for the scaling factors k_t and mu_t.
struct ScheduleState {
    double k0 = 0.1, dk = 0.02, k_min = 0.01;
    double mu0 = 5.0, dmu = 0.1, mu_min = 1.0;
    std::size_t t_delta = 5000;

    double k_at(std::size_t t) const {
        return std::max(k0 - double(t / t_delta) * dk, k_min);
    }
    double mu_at(std::size_t t) const {
        return std::max(mu0 - double(t / t_delta) * dmu, mu_min);
    }
};

inline std::vector<double> column_mean(const Mat& x) {
    std::vector<double> xbar(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) xbar[j] += x(i, j);
    for (double& v : xbar) v /= double(x.rows);
    return xbar;
}

/// Average-approximation P update for fc layers: one rank-1 step on the
/// column-mean input.
inline void rls_p_update_fc(RlsLayerState& state, const Mat& x, double k) {
    state.p = sherman_morrison_step(state.p, column_mean(x), k, state.lambda);
}

/// Adds the momentum-wrapped step to the parameter: Phi <- beta Phi + step,
/// W += Phi. With beta = 0 this is the unwrapped rule.
inline void momentum_apply(RlsLayerState& state, std::vector<double>& param,
                           const std::vector<double>& step) {
    if (state.phi.empty()) state.phi.assign(param.size(), 0.0);
    check(state.phi.size() == param.size(), "momentum_apply: shape mismatch");
    for (std::size_t i = 0; i < param.size(); ++i) {
        state.phi[i] = state.beta * state.phi[i] + step[i];
        param[i] += state.phi[i];
    }
}

/// RLS denominator lambda + k xbar^T P xbar; asserted >= lambda at runtime.
inline double rls_denominator(const RlsLayerState& state, const std::vector<double>& xbar,
                              double k) {
    const double denom = state.lambda + k * dot(xbar, matvec(state.p, xbar));
    check(denom >= state.lambda - 1e-12, "rls denominator below lambda");
    return denom;
}

/// Critic output layer: Psi <- Psi - P g / (lambda + k xbar^T P xbar), then
/// P is updated from the same pre-step P.
inline void rls_critic_output_step(RlsLayerState& state, Mat& psi, const Mat& grad, const Mat& x,
                                   double k) {
    check(psi.rows == grad.rows && psi.cols == grad.cols, "rls_critic_output_step: grad shape");
    const std::vector<double> xbar = column_mean(x);
    const double denom = rls_denominator(state, xbar, k);
    Mat pg = matmul(state.p, grad);
    std::vector<double> step(pg.size());
    for (std::size_t i = 0; i < pg.size(); ++i) step[i] = -pg.data[i] / denom;
    momentum_apply(state, psi.data, step);
    state.p = sherman_morrison_step(state.p, xbar, k, state.lambda);
}

/// Fc hidden layer: W <- W - mu P g / (lambda + k xbar^T P xbar), then P update.
inline void rls_fc_hidden_step(RlsLayerState& state, Mat& w, const Mat& grad, const Mat& x,
                               double k, double mu) {
    check(w.rows == grad.rows && w.cols == grad.cols, "rls_fc_hidden_step: grad shape");
    const std::vector<double> xbar = column_mean(x);
    const double denom = rls_denominator(state, xbar, k);
    Mat pg = matmul(state.p, grad);
    std::vector<double> step(pg.size());
    for (std::size_t i = 0; i < pg.size(); ++i) step[i] = -mu * pg.data[i] / denom;
    momentum_apply(state, w.data, step);
    state.p = sherman_morrison_step(state.p, xbar, k, state.lambda);
}

/// Sample-mean patch matrix Xbar over the M per-sample im2col matrices.
inline Mat conv_xbar(const std::vector<Mat>& xhat) {
    check(!xhat.empty(), "conv_xbar: empty batch");
    Mat xbar(xhat[0].rows, xhat[0].cols);
    for (const Mat& xs : xhat)
        for (std::size_t i = 0; i < xbar.size(); ++i) xbar.data[i] += xs.data[i];
    const double inv_m = 1.0 / double(xhat.size());
    for (double& v : xbar.data) v *= inv_m;
    return xbar;
}

/// Conv P update: averaged rank-1 steps over the output-pixel columns of Xbar.
inline void rls_conv_p_update(RlsLayerState& state, const Mat& xbar, double k) {
    check(state.p.rows == xbar.rows, "rls_conv_p_update: shape mismatch");
    const std::size_t hw = xbar.cols;
    const std::size_t dim = state.p.rows;
    Mat acc(dim, dim);
    std::vector<double> col(dim);
    for (std::size_t j = 0; j < hw; ++j) {
        for (std::size_t i = 0; i < dim; ++i) col[i] = xbar(i, j);
        const std::vector<double> pc = matvec(state.p, col);
        const double denom = state.lambda + k * dot(col, pc);
        check(denom >= state.lambda - 1e-12, "rls_conv_p_update: denominator below lambda");
        const double scale = k / (double(hw) * denom);
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b) acc(a, b) += scale * pc[a] * pc[b];
    }
    const double inv_l = 1.0 / state.lambda;
    for (std::size_t i = 0; i < state.p.size(); ++i)
        state.p.data[i] = inv_l * (state.p.data[i] - acc.data[i]);
    symmetrize(state.p);
}

/// Sum over output pixels of the conv denominators.
inline double rls_conv_denominator_sum(const RlsLayerState& state, const Mat& xbar, double k) {
    std::vector<double> col(xbar.rows);
    double sum = 0.0;
    for (std::size_t j = 0; j < xbar.cols; ++j) {
        for (std::size_t i = 0; i < xbar.rows; ++i) col[i] = xbar(i, j);
        const double denom = state.lambda + k * dot(col, matvec(state.p, col));
        check(denom >= state.lambda - 1e-12, "rls_conv_denominator_sum: denominator below lambda");
        sum += denom;
    }
    return sum;
}

/// Conv layer: kernel (patch-matrix form) <- kernel - mu HW P g / sum_j denom_j,
/// then P update from the pre-step P.
inline void rls_conv_step(RlsLayerState& state, Mat& kernel, const Mat& grad, const Mat& xbar,
                          double k, double mu) {
    check(kernel.rows == grad.rows && kernel.cols == grad.cols, "rls_conv_step: grad shape");
    check(state.p.rows == kernel.rows, "rls_conv_step: P dim mismatch");
    const double hw = double(xbar.cols);
    const double denom_sum = rls_conv_denominator_sum(state, xbar, k);
    Mat pg = matmul(state.p, grad);
    std::vector<double> step(pg.size());
    const double scale = mu * hw / denom_sum;
    for (std::size_t i = 0; i < pg.size(); ++i) step[i] = -scale * pg.data[i];
    momentum_apply(state, kernel.data, step);
    rls_conv_p_update(state, xbar, k);
}

}  // namespace rlsa2c
