#include "amnet/buffer.hpp"

#include <cstdlib>
#include <cstring>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace amnet::detail {

namespace {

// Only blocks at least this large are pooled; smaller ones are cheap to
// re-malloc and too numerous to track.
constexpr std::size_t kPoolMinDoubles = (1 << 20) / sizeof(double);

std::mutex g_pool_mutex;
std::unordered_map<std::size_t, std::vector<double*>>& pool() {
    static auto* p = new std::unordered_map<std::size_t, std::vector<double*>>();
    return *p;
}

double* acquire(std::size_t n) {
    if (n >= kPoolMinDoubles) {
        std::lock_guard<std::mutex> lock(g_pool_mutex);
        auto it = pool().find(n);
        if (it != pool().end() && !it->second.empty()) {
            double* p = it->second.back();
            it->second.pop_back();
            return p;
        }
    }
    return static_cast<double*>(std::malloc(n * sizeof(double)));
}

void release(double* p, std::size_t n) {
    if (p == nullptr) return;
    if (n >= kPoolMinDoubles) {
        std::lock_guard<std::mutex> lock(g_pool_mutex);
        pool()[n].push_back(p);
        return;
    }
    std::free(p);
}

}  // namespace

DoubleBuffer& DoubleBuffer::operator=(DoubleBuffer&& other) noexcept {
    if (this != &other) {
        clear();
        data_ = other.data_;
        size_ = other.size_;
        other.data_ = nullptr;
        other.size_ = 0;
    }
    return *this;
}

void DoubleBuffer::assign(std::size_t n, double value) {
    resize_uninit(n);
    if (value == 0.0) {
        std::memset(data_, 0, size_ * sizeof(double));
    } else {
        for (std::size_t i = 0; i < size_; ++i) data_[i] = value;
    }
}

void DoubleBuffer::resize_uninit(std::size_t n) {
    if (size_ != n) {
        clear();
        if (n > 0) data_ = acquire(n);
        size_ = n;
    }
}

void DoubleBuffer::clear() {
    release(data_, size_);
    data_ = nullptr;
    size_ = 0;
}

void trim_buffer_pool() {
    std::lock_guard<std::mutex> lock(g_pool_mutex);
    for (auto& [size, blocks] : pool()) {
        for (double* p : blocks) std::free(p);
    }
    pool().clear();
}

}  // namespace amnet::detail
