#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "adacm/errors.hpp"

namespace adacm {

/// Dense row-major float64 tensor. Rank 1 for feature vectors, rank 2 for
/// sample batches and images, rank 4 for conv activations.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(count(shape_), fill) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != count(shape_))
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape product " + std::to_string(count(shape_)));
    }

    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows) {
        std::size_t r = rows.size();
        std::size_t c = r == 0 ? 0 : rows.begin()->size();
        Tensor t({r, c});
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw ShapeError("ragged matrix initializer");
            for (double v : row) t.data_[i++] = v;
        }
        return t;
    }

    static Tensor vector(std::initializer_list<double> vals) {
        return Tensor({vals.size()}, std::vector<double>(vals));
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::size_t rows() const { return dim(0); }
    std::size_t cols() const { return rank() >= 2 ? shape_[rank() - 1] : size(); }
    std::size_t dim(std::size_t i) const { return i < shape_.size() ? shape_[i] : 1; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    double& at4(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
        return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }
    double at4(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
        return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape_.size(); ++i)
            s += (i ? "x" : "") + std::to_string(shape_[i]);
        return s + "]";
    }

private:
    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t e : shape) {
            if (e == 0) throw ShapeError("zero extent in tensor shape");
            n *= e;
        }
        return shape.empty() ? 0 : n;
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Stacks equally shaped samples into a batch tensor of shape [N, sample...].
inline Tensor stack(const std::vector<Tensor>& samples) {
    if (samples.empty()) throw ShapeError("cannot stack an empty sample list");
    std::vector<std::size_t> shape{samples.size()};
    for (std::size_t e : samples.front().shape()) shape.push_back(e);
    Tensor out(shape);
    std::size_t per = samples.front().size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].same_shape(samples.front()))
            throw ShapeError("stack: sample " + std::to_string(i) + " has shape " +
                             samples[i].shape_str() + ", expected " + samples.front().shape_str());
        for (std::size_t j = 0; j < per; ++j) out[i * per + j] = samples[i][j];
    }
    return out;
}

/// Index of the row maximum, ties broken toward the lowest index.
inline std::size_t argmax_row(const Tensor& m, std::size_t row) {
    std::size_t c = m.cols();
    std::size_t best = 0;
    double best_v = m(row, 0);
    for (std::size_t j = 1; j < c; ++j) {
        if (m(row, j) > best_v) {
            best_v = m(row, j);
            best = j;
        }
    }
    return best;
}

inline Tensor one_hot_rows(const std::vector<int>& labels, std::size_t classes) {
    Tensor t({labels.size(), classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int c = labels[i];
        if (c < 0 || static_cast<std::size_t>(c) >= classes)
            throw ShapeError("label " + std::to_string(c) + " outside 0.." +
                             std::to_string(classes - 1));
        t(i, static_cast<std::size_t>(c)) = 1.0;
    }
    return t;
}

}  // namespace adacm
