#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "amnet/buffer.hpp"
#include "amnet/errors.hpp"

namespace amnet {

namespace detail {

struct TensorStorage {
    std::vector<std::int64_t> shape;
    DoubleBuffer data;
    DoubleBuffer grad;  // empty until a backward pass touches it
    bool requires_grad = false;
};

}  // namespace detail

// N-dimensional array of doubles in row-major order. Copying a Tensor copies
// the handle, not the buffer; ops treat inputs as immutable and gradient
// accumulation is the only in-place mutation after construction.
class Tensor {
  public:
    Tensor() = default;

    explicit Tensor(std::vector<std::int64_t> shape, bool requires_grad = false);

    static Tensor from(std::vector<std::int64_t> shape, std::vector<double> values,
                       bool requires_grad = false);
    static Tensor scalar(double value);
    static Tensor zeros(std::vector<std::int64_t> shape);
    static Tensor full(std::vector<std::int64_t> shape, double value);
    // Storage is left unwritten; for kernels that fill every element.
    static Tensor uninitialized(std::vector<std::int64_t> shape, bool requires_grad = false);

    bool defined() const { return storage_ != nullptr; }

    const std::vector<std::int64_t>& shape() const { return storage_->shape; }
    int rank() const { return static_cast<int>(storage_->shape.size()); }
    std::int64_t dim(int i) const { return storage_->shape[static_cast<std::size_t>(i)]; }
    std::int64_t numel() const { return static_cast<std::int64_t>(storage_->data.size()); }

    std::span<double> data() { return {storage_->data.data(), storage_->data.size()}; }
    std::span<const double> data() const { return {storage_->data.data(), storage_->data.size()}; }

    bool requires_grad() const { return storage_->requires_grad; }
    void set_requires_grad(bool v) { storage_->requires_grad = v; }

    bool has_grad() const { return !storage_->grad.empty(); }
    // Allocates a zero gradient buffer on first use.
    std::span<double> grad();
    std::span<const double> grad() const;
    void zero_grad() { storage_->grad.clear(); }

    // Value of a single-element tensor.
    double item() const;

    // Identity of the underlying buffer; used by the tape and the optimizer.
    detail::TensorStorage* storage() const { return storage_.get(); }
    const std::shared_ptr<detail::TensorStorage>& shared_storage() const { return storage_; }

  private:
    std::shared_ptr<detail::TensorStorage> storage_;
};

std::int64_t shape_numel(const std::vector<std::int64_t>& shape);
std::string shape_str(const std::vector<std::int64_t>& shape);

// Debug-build guard: every forward op output must be finite on finite inputs.
#ifndef NDEBUG
void debug_check_finite(const Tensor& t, const char* op);
#else
inline void debug_check_finite(const Tensor&, const char*) {}
#endif

}  // namespace amnet
