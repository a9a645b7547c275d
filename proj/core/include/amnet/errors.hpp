#pragma once

#include <stdexcept>
#include <string>

namespace amnet {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments, shapes, configs, labels. Maps to CLI exit code 1.
struct ValueError : Error {
    explicit ValueError(const std::string& msg) : Error(msg) {}
};

// File parsing, serialization, missing paths. Maps to CLI exit code 2.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace amnet
