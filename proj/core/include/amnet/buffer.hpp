#pragma once

#include <cstddef>

namespace amnet::detail {

// Flat double array backed by a process-wide exact-size block pool. Training
// allocates the same activation shapes every batch; recycling the blocks
// keeps them out of glibc's mmap path (whose threshold cannot be raised past
// 32 MiB), which otherwise dominates wall time with map/unmap page faults.
class DoubleBuffer {
  public:
    DoubleBuffer() = default;
    DoubleBuffer(const DoubleBuffer&) = delete;
    DoubleBuffer& operator=(const DoubleBuffer&) = delete;
    DoubleBuffer(DoubleBuffer&& other) noexcept : data_(other.data_), size_(other.size_) {
        other.data_ = nullptr;
        other.size_ = 0;
    }
    DoubleBuffer& operator=(DoubleBuffer&& other) noexcept;
    ~DoubleBuffer() { clear(); }

    void assign(std::size_t n, double value);
    // Sizes the buffer without writing it; every element must be stored
    // before it is read.
    void resize_uninit(std::size_t n);
    void clear();

    bool empty() const { return size_ == 0; }
    std::size_t size() const { return size_; }
    double* data() { return data_; }
    const double* data() const { return data_; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double* begin() { return data_; }
    double* end() { return data_ + size_; }
    const double* begin() const { return data_; }
    const double* end() const { return data_ + size_; }

  private:
    double* data_ = nullptr;
    std::size_t size_ = 0;
};

// Releases every pooled block back to the system.
void trim_buffer_pool();

}  // namespace amnet::detail
