#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlsa2c {

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// Dense row-major matrix of doubles.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }

    bool finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

/// Batch x channel x height x width tensor, row-major over (n,c,h,w).
struct Tensor4 {
    std::size_t n = 0, c = 0, h = 0, w = 0;
    std::vector<double> data;

    Tensor4() = default;
    Tensor4(std::size_t n_, std::size_t c_, std::size_t h_, std::size_t w_, double fill = 0.0)
        : n(n_), c(c_), h(h_), w(w_), data(n_ * c_ * h_ * w_, fill) {}

    double& at(std::size_t i, std::size_t ch, std::size_t y, std::size_t x) {
        return data[((i * c + ch) * h + y) * w + x];
    }
    double at(std::size_t i, std::size_t ch, std::size_t y, std::size_t x) const {
        return data[((i * c + ch) * h + y) * w + x];
    }

    std::size_t size() const { return data.size(); }

    bool finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline Mat matmul(const Mat& a, const Mat& b) {
    check(a.cols == b.rows, "matmul: inner dims differ");
    Mat out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = &b.data[k * b.cols];
            double* orow = &out.data[i * out.cols];
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

inline Mat transpose(const Mat& a) {
    Mat out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

inline Mat operator+(const Mat& a, const Mat& b) {
    check(a.rows == b.rows && a.cols == b.cols, "mat add: shape mismatch");
    Mat out = a;
    for (std::size_t i = 0; i < b.size(); ++i) out.data[i] += b.data[i];
    return out;
}

inline Mat operator-(const Mat& a, const Mat& b) {
    check(a.rows == b.rows && a.cols == b.cols, "mat sub: shape mismatch");
    Mat out = a;
    for (std::size_t i = 0; i < b.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

inline Mat operator*(double s, const Mat& a) {
    Mat out = a;
    for (double& v : out.data) v *= s;
    return out;
}

inline std::vector<double> matvec(const Mat& a, const std::vector<double>& x) {
    check(a.cols == x.size(), "matvec: shape mismatch");
    std::vector<double> out(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        const double* row = &a.data[i * a.cols];
        for (std::size_t j = 0; j < a.cols; ++j) s += row[j] * x[j];
        out[i] = s;
    }
    return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    check(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace rlsa2c
