#pragma once

#include <stdexcept>
#include <string>

namespace depthinit {

/// Scheme or network configuration the math cannot support
/// (e.g. base variance alpha >= 1, non-uniform widths with a solved K).
class unsupported_config_error : public std::runtime_error {
public:
    explicit unsupported_config_error(const std::string& what)
        : std::runtime_error(what) {}
};

/// No K > 1 exists for the requested (L, n, V).
class no_valid_k_error : public std::runtime_error {
public:
    explicit no_valid_k_error(const std::string& what)
        : std::runtime_error(what) {}
};

/// Base for dataset load failures.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

class corrupt_file_error : public data_error {
public:
    explicit corrupt_file_error(const std::string& what) : data_error(what) {}
};

class corrupt_record_error : public data_error {
public:
    explicit corrupt_record_error(const std::string& what) : data_error(what) {}
};

/// Training produced a non-finite loss.
class numeric_divergence_error : public std::runtime_error {
public:
    explicit numeric_divergence_error(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace depthinit
