#pragma once

#include <stdexcept>
#include <string>

namespace vpc {

struct ZeroNormError : std::runtime_error {
    explicit ZeroNormError(const std::string& what) : std::runtime_error(what) {}
};

struct GridError : std::runtime_error {
    explicit GridError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateError : std::runtime_error {
    explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigMismatch : std::runtime_error {
    explicit ConfigMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IOError : std::runtime_error {
    explicit IOError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vpc
