#pragma once

#include <stdexcept>
#include <string>

namespace cellgen {

/// Base class for all library errors. `kind()` is a stable machine-readable tag.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

/// A contour or rasterization was geometrically unusable; callers resample.
class RejectionError : public Error {
public:
    explicit RejectionError(const std::string& what) : Error("rejected", what) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error("invalid_input", what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

class BudgetError : public Error {
public:
    BudgetError(const std::string& what, std::size_t produced)
        : Error("retry_budget_exhausted", what), produced_(produced) {}
    std::size_t produced() const { return produced_; }

private:
    std::size_t produced_;
};

}  // namespace cellgen
