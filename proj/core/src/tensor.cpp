#include "amnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace amnet {

std::int64_t shape_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::int64_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<std::int64_t> shape, bool requires_grad) {
    for (std::int64_t d : shape) {
        if (d <= 0) throw ValueError("tensor dimension must be positive, got shape " + shape_str(shape));
    }
    storage_ = std::make_shared<detail::TensorStorage>();
    storage_->data.assign(static_cast<std::size_t>(shape_numel(shape)), 0.0);
    storage_->shape = std::move(shape);
    storage_->requires_grad = requires_grad;
}

Tensor Tensor::from(std::vector<std::int64_t> shape, std::vector<double> values, bool requires_grad) {
    if (shape_numel(shape) != static_cast<std::int64_t>(values.size())) {
        throw ValueError("value count " + std::to_string(values.size()) + " does not match shape " +
                         shape_str(shape));
    }
    Tensor t(std::move(shape), requires_grad);
    std::copy(values.begin(), values.end(), t.storage_->data.begin());
    return t;
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

Tensor Tensor::zeros(std::vector<std::int64_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<std::int64_t> shape, double value) {
    Tensor t(std::move(shape));
    for (double& v : t.storage_->data) v = value;
    return t;
}

Tensor Tensor::uninitialized(std::vector<std::int64_t> shape, bool requires_grad) {
    for (std::int64_t d : shape) {
        if (d <= 0) throw ValueError("tensor dimension must be positive, got shape " + shape_str(shape));
    }
    Tensor t;
    t.storage_ = std::make_shared<detail::TensorStorage>();
    t.storage_->data.resize_uninit(static_cast<std::size_t>(shape_numel(shape)));
    t.storage_->shape = std::move(shape);
    t.storage_->requires_grad = requires_grad;
    return t;
}

std::span<double> Tensor::grad() {
    if (storage_->grad.empty()) storage_->grad.assign(storage_->data.size(), 0.0);
    return {storage_->grad.data(), storage_->grad.size()};
}

std::span<const double> Tensor::grad() const {
    if (storage_->grad.empty()) storage_->grad.assign(storage_->data.size(), 0.0);
    return {storage_->grad.data(), storage_->grad.size()};
}

double Tensor::item() const {
    if (numel() != 1) throw ValueError("item() requires a single-element tensor, got shape " + shape_str(shape()));
    return storage_->data[0];
}

#ifndef NDEBUG
void debug_check_finite(const Tensor& t, const char* op) {
    for (double v : t.data()) {
        if (!std::isfinite(v)) throw Error(std::string("non-finite value produced by ") + op);
    }
}
#endif

}  // namespace amnet
