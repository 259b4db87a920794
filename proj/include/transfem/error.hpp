#pragma once

#include <stdexcept>
#include <string>

namespace transfem {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class CapabilityError : public Error { public: using Error::Error; };
class IndexError : public Error { public: using Error::Error; };
class MissingAuxiliaryError : public Error { public: using Error::Error; };
class CodegenError : public Error { public: using Error::Error; };

/// A cell with non-positive Jacobian determinant.
class OrientationError : public Error {
public:
    OrientationError(std::size_t cell, double det)
        : Error("cell " + std::to_string(cell) + " is degenerate or negatively oriented (detJ = " +
                std::to_string(det) + ")"),
          cell_(cell) {}
    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

/// Invalid execution configuration (thread limit, bad sizes).
class ConfigurationError : public Error { public: using Error::Error; };

/// Shared-memory requirement exceeds the device budget.
class CapacityError : public Error {
public:
    CapacityError(std::size_t required, std::size_t available)
        : Error("shared memory requirement " + std::to_string(required) + " bytes exceeds budget of " +
                std::to_string(available) + " bytes"),
          required_(required), available_(available) {}
    std::size_t required() const noexcept { return required_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t required_;
    std::size_t available_;
};

} // namespace transfem
