#pragma once

#include <stdexcept>
#include <string>

namespace trendlab {

/// Invalid or inconsistent configuration (CLI exit status 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a contract: malformed files, bad candles, too little history (exit status 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal invariant was broken (exit status 3).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Barrier corridor collapsed: zero width or a non-positive lower barrier.
class DegenerateBarrierError : public DataError {
public:
    using DataError::DataError;
};

/// Sharpe ratio requested for a return series with zero dispersion.
class UndefinedSharpeError : public DataError {
public:
    using DataError::DataError;
};

/// No admissible grid point on an optimization interval.
class OptimizationError : public DataError {
public:
    using DataError::DataError;
};

/// A prompt context was requested for a day with no completed prior window.
class NoContextError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace trendlab
