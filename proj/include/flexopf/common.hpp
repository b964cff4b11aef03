#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flexopf {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Input file could not be parsed or fails its schema.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// A model invariant does not hold (bad topology, bad bounds, ...).
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Solver failed (infeasible, iteration limit, numerical breakdown).
class SolveError : public Error {
  public:
    using Error::Error;
};

enum class ExecMode { Serial, OpenMP };

/// Runs fn(i) for i in [0, n). In OpenMP mode iterations are distributed
/// over threads; fn must only write to per-index state so the result is
/// identical to the serial reference regardless of schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn,
                  ExecMode mode = ExecMode::OpenMP);

/// FNV-1a 64-bit hash, used for content hashes in run manifests.
std::uint64_t fnv1a64(std::string_view data);
std::uint64_t fnv1a64_file(const std::string &path);

std::string to_hex(std::uint64_t v);

} // namespace flexopf
