#pragma once

#include <cmath>
#include <vector>

#include "rlsa2c/core.hpp"
#include "rlsa2c/rng.hpp"

namespace rlsa2c {

/// Row-wise softmax with max-subtraction stabilization.
inline Mat softmax(const Mat& z) {
    Mat p(z.rows, z.cols);
    for (std::size_t i = 0; i < z.rows; ++i) {
        double mx = z(i, 0);
        for (std::size_t j = 1; j < z.cols; ++j) mx = std::max(mx, z(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < z.cols; ++j) {
            p(i, j) = std::exp(z(i, j) - mx);
            sum += p(i, j);
        }
        for (std::size_t j = 0; j < z.cols; ++j) p(i, j) /= sum;
    }
    return p;
}

inline std::vector<double> softmax_logprob(const Mat& z, const std::vector<std::size_t>& actions) {
    check(actions.size() == z.rows, "softmax_logprob: batch mismatch");
    std::vector<double> out(z.rows);
    for (std::size_t i = 0; i < z.rows; ++i) {
        check(actions[i] < z.cols, "softmax_logprob: invalid action index");
        double mx = z(i, 0);
        for (std::size_t j = 1; j < z.cols; ++j) mx = std::max(mx, z(i, j));
        double lse = 0.0;
        for (std::size_t j = 0; j < z.cols; ++j) lse += std::exp(z(i, j) - mx);
        out[i] = z(i, actions[i]) - mx - std::log(lse);
    }
    return out;
}

/// Full-distribution entropy per sample, in [0, ln|A|].
inline std::vector<double> softmax_entropy(const Mat& z) {
    const Mat p = softmax(z);
    std::vector<double> out(z.rows, 0.0);
    for (std::size_t i = 0; i < z.rows; ++i)
        for (std::size_t j = 0; j < z.cols; ++j)
            if (p(i, j) > 0.0) out[i] -= p(i, j) * std::log(p(i, j));
    return out;
}

/// Score of the sampled action wrt the logits: rows onehot(a) - softmax(z).
inline Mat softmax_score(const Mat& z, const std::vector<std::size_t>& actions) {
    check(actions.size() == z.rows, "softmax_score: batch mismatch");
    Mat g = softmax(z);
    for (double& v : g.data) v = -v;
    for (std::size_t i = 0; i < z.rows; ++i) {
        check(actions[i] < z.cols, "softmax_score: invalid action index");
        g(i, actions[i]) += 1.0;
    }
    return g;
}

inline std::vector<std::size_t> softmax_sample(const Mat& z, Rng& rng) {
    const Mat p = softmax(z);
    std::vector<std::size_t> actions(z.rows);
    std::vector<double> row(z.cols);
    for (std::size_t i = 0; i < z.rows; ++i) {
        for (std::size_t j = 0; j < z.cols; ++j) row[j] = p(i, j);
        actions[i] = rng.categorical(row);
    }
    return actions;
}

/// Diagonal Gaussian with state-independent learned log-std.
inline std::vector<double> gaussian_logprob(const Mat& mean, const std::vector<double>& log_std,
                                            const Mat& actions) {
    check(mean.rows == actions.rows && mean.cols == actions.cols && log_std.size() == mean.cols,
          "gaussian_logprob: shape mismatch");
    constexpr double half_log_2pi = 0.9189385332046727;
    std::vector<double> out(mean.rows, 0.0);
    for (std::size_t i = 0; i < mean.rows; ++i)
        for (std::size_t d = 0; d < mean.cols; ++d) {
            const double sigma = std::exp(log_std[d]);
            const double delta = actions(i, d) - mean(i, d);
            out[i] += -delta * delta / (2.0 * sigma * sigma) - log_std[d] - half_log_2pi;
        }
    return out;
}

inline double gaussian_entropy(const std::vector<double>& log_std) {
    constexpr double half_log_2pi_e = 1.4189385332046727;  // 0.5 ln(2 pi e)
    double h = 0.0;
    for (double ls : log_std) h += ls + half_log_2pi_e;
    return h;
}

/// Score of log pi wrt the mean: (a - mu) / sigma^2 per dimension.
inline Mat gaussian_mean_score(const Mat& mean, const std::vector<double>& log_std,
                               const Mat& actions) {
    Mat g(mean.rows, mean.cols);
    for (std::size_t i = 0; i < mean.rows; ++i)
        for (std::size_t d = 0; d < mean.cols; ++d) {
            const double sigma2 = std::exp(2.0 * log_std[d]);
            g(i, d) = (actions(i, d) - mean(i, d)) / sigma2;
        }
    return g;
}

/// Score of log pi wrt log-std: (a - mu)^2 / sigma^2 - 1, summed over the batch later.
inline Mat gaussian_logstd_score(const Mat& mean, const std::vector<double>& log_std,
                                 const Mat& actions) {
    Mat g(mean.rows, mean.cols);
    for (std::size_t i = 0; i < mean.rows; ++i)
        for (std::size_t d = 0; d < mean.cols; ++d) {
            const double sigma2 = std::exp(2.0 * log_std[d]);
            const double delta = actions(i, d) - mean(i, d);
            g(i, d) = delta * delta / sigma2 - 1.0;
        }
    return g;
}

inline Mat gaussian_sample(const Mat& mean, const std::vector<double>& log_std, Rng& rng) {
    Mat a = mean;
    for (std::size_t i = 0; i < mean.rows; ++i)
        for (std::size_t d = 0; d < mean.cols; ++d)
            a(i, d) += std::exp(log_std[d]) * rng.normal();
    return a;
}

}  // namespace rlsa2c
