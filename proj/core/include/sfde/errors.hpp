// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace sfde {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A time that is not an integer multiple of the grid step.
class GridAlignmentError : public Error {
public:
    using Error::Error;
};

/// An index or time outside the stored history.
class OutOfRangeError : public Error {
public:
    using Error::Error;
};

/// Two objects built on different grids were combined.
class IncompatibleGridError : public Error {
public:
    using Error::Error;
};

/// A parameter outside the domain where a formula is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An operation was called with inputs violating its documented contract.
class ContractError : public Error {
public:
    using Error::Error;
};

/// A simulated state became non-finite or crossed the divergence sentinel.
class DivergenceError : public Error {
public:
    DivergenceError(std::uint64_t step, std::optional<std::uint64_t> path, const std::string& what)
        : Error(what), step_(step), path_(path) {}

    std::uint64_t step() const noexcept { return step_; }
    std::optional<std::uint64_t> path() const noexcept { return path_; }

private:
    std::uint64_t step_;
    std::optional<std::uint64_t> path_;
};

}  // namespace sfde
