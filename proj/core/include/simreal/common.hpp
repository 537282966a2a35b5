#pragma once

/**
 * Shared plumbing for the simreal library: error types, calendar dates,
 * deterministic seed derivation, exact double formatting, a bounded
 * parallel-for and config hashing.
 */

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace simreal {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for all simreal exceptions.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct AlignmentError : Error { using Error::Error; };
struct DegenerateSeries : Error { using Error::Error; };
struct EmptySegment : Error { using Error::Error; };
struct OverlapError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct InsufficientHistory : Error { using Error::Error; };
struct NonFiniteInput : Error { using Error::Error; };
struct EpisodeFinished : Error { using Error::Error; };
struct NonPositiveEquity : Error { using Error::Error; };
struct NonFiniteGradient : Error { using Error::Error; };
struct SimplexViolation : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct SchemaVersionMismatch : Error { using Error::Error; };

/// Constraint set admits no feasible point.
struct Infeasible : Error { using Error::Error; };

/// Iterative solver hit its iteration cap; carries the final residual.
struct NotConverged : Error {
    NotConverged(const std::string& msg, double residual_)
        : Error(msg), residual(residual_) {}
    double residual;
};

// ---------------------------------------------------------------------------
// Calendar dates
// ---------------------------------------------------------------------------

/// A calendar date (no time zone, no time of day). Dates act as ordered row
/// labels; the only arithmetic needed is comparison and next_day().
struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31

    auto operator<=>(const Date&) const = default;

    /// Parses strict ISO-8601 "YYYY-MM-DD". Throws ParseError otherwise.
    static Date parse(const std::string& iso);

    std::string to_string() const;

    /// Following calendar day (Gregorian, leap-year aware).
    Date next_day() const;

    bool valid() const;
};

/// Closed date interval [start, end].
struct DateRange {
    Date start;
    Date end;

    bool contains(const Date& d) const { return start <= d && d <= end; }
    bool overlaps(const DateRange& o) const {
        return !(end < o.start || o.end < start);
    }
};

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

/// splitmix64 step; the basis of all seed derivation in simreal.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed-splitting rule: stream i of a master seed is
/// splitmix64(master + (i+1) * 0x9E3779B97F4A7C15). Every worker (seed,
/// scenario, bootstrap draw) derives its generator this way, so parallel and
/// serial runs consume identical streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// ---------------------------------------------------------------------------
// Formatting / hashing
// ---------------------------------------------------------------------------

/// Shortest decimal form that round-trips the double exactly.
std::string format_double(double v);

/// Parses a decimal floating-point literal; throws ParseError on junk.
double parse_double(const std::string& s);

/// Hex-encoded SHA-256 digest of a byte string.
std::string sha256_hex(const std::string& bytes);

// ---------------------------------------------------------------------------
// Files / parallelism
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path);           // throws IoError
void write_file(const std::string& path, const std::string& content);

/// Worker cap resolution: min(SIMREAL_THREADS, hardware_concurrency),
/// default all cores. Values < 1 clamp to 1.
unsigned resolved_thread_count();

/// Runs fn(i) for i in [0, n). Work is split across at most
/// resolved_thread_count() threads; each index is independent, so results
/// are identical to a serial loop. Exceptions propagate from the first
/// failing index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace simreal
