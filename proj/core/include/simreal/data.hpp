#pragma once

/**
 * Market data ingestion and preparation: OHLCV CSV loading, aligned return
 * matrices, temporal train/gap/test splits, calendar validation and a seeded
 * synthetic price generator so the whole pipeline runs without vendor data.
 *
 * CSV contract: header row `date,ticker,open,high,low,close,adj_close,volume`
 * with ISO-8601 dates. Only `date`, `ticker` and `adj_close` are mandatory;
 * the other columns are accepted and ignored.
 */

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simreal/common.hpp"

namespace simreal::data {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Adjusted-close history of one instrument. Dates strictly increasing,
/// prices strictly positive; both enforced at load time.
struct PriceSeries {
    std::string ticker;
    std::vector<Date> dates;
    std::vector<double> closes;

    std::size_t size() const { return dates.size(); }
};

enum class ReturnKind { simple, log };

/// T x n matrix of per-period returns on a shared calendar. Row t holds the
/// return realized from dates[t-1]'s close to dates[t]'s close, stamped with
/// the later date.
struct ReturnMatrix {
    std::vector<Date> dates;          // length T
    std::vector<std::string> tickers; // length n
    Eigen::MatrixXd values;           // T x n, all finite
    ReturnKind kind = ReturnKind::simple;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    /// Rows whose date lies in [range.start, range.end].
    ReturnMatrix slice(const DateRange& range) const;
};

/// Temporally ordered train/gap/test partition. The gap segment is
/// quarantine: neither fitting nor evaluation may read it.
struct DataSplit {
    ReturnMatrix train;
    ReturnMatrix gap;
    ReturnMatrix test;
    DateRange train_range;
    DateRange gap_range;
    DateRange test_range;
};

enum class AlignmentPolicy { strict, intersect };

struct ValidationReport {
    bool ok = true;
    std::vector<Date> common_calendar;
    // missing dates per ticker, relative to the union calendar
    std::map<std::string, std::vector<Date>> missing;
    std::vector<std::string> failures;  // populated under strict policy
};

/// Column mapping for load_ohlcv. Names refer to header fields.
struct CsvSchema {
    std::string date_column = "date";
    std::string ticker_column = "ticker";
    std::string price_column = "adj_close";
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Loads an OHLCV CSV into one PriceSeries per ticker, sorted by date.
/// Throws SchemaError on a missing column, EmptyInput on no data rows, and
/// ParseError (with a line number) on malformed rows, duplicate
/// (date,ticker) pairs, or non-positive prices.
std::vector<PriceSeries> load_ohlcv(const std::string& path,
                                    const CsvSchema& schema = {});

/// Same parser over an in-memory CSV body (used by tests and the loader).
std::vector<PriceSeries> parse_ohlcv(const std::string& csv_text,
                                     const CsvSchema& schema = {});

/// Per-period returns on the intersected calendar of all series.
/// simple: p_t/p_{t-1} - 1; log: ln(p_t/p_{t-1}).
/// Throws AlignmentError if the common calendar is empty and
/// DegenerateSeries if it is shorter than 2 dates.
ReturnMatrix compute_returns(const std::vector<PriceSeries>& series,
                             ReturnKind kind);

/// Partitions rows by date-range membership. Rows outside every range are
/// dropped. Throws OverlapError on overlapping or misordered ranges,
/// EmptySegment when a range captures no rows.
DataSplit split_periods(const ReturnMatrix& returns, const DateRange& train,
                        const DateRange& gap, const DateRange& test);

/// Reports calendar gaps per ticker. Under strict policy any gap is a
/// failure; under intersect the common calendar is recorded instead.
ValidationReport validate_alignment(const std::vector<PriceSeries>& series,
                                    AlignmentPolicy policy);

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Geometric random walk ("gbm") or a hidden persistent-regime process
/// ("regime") where one asset at a time carries hot_drift and the rest
/// cold_drift, with the hot asset resampled with probability
/// 1 - regime_persistence each period. Both are fully determined by `seed`.
struct SynthConfig {
    int n_assets = 2;
    int n_periods = 500;
    Date start_date{2017, 1, 1};
    std::uint64_t seed = 0;
    std::string mode = "gbm";  // "gbm" | "regime"

    // gbm parameters
    std::vector<double> drift;  // per-period; broadcast when size 1
    std::vector<double> vol;    // per-period; broadcast when size 1
    double correlation = 0.0;   // common pairwise correlation

    // regime parameters
    double regime_persistence = 0.98;
    double hot_drift = 0.004;
    double cold_drift = -0.002;
    double regime_vol = 0.004;
};

std::vector<PriceSeries> generate_synthetic_prices(const SynthConfig& cfg);

/// Renders series in the load_ohlcv CSV format (only mandatory columns
/// carry data; OHLC mirror adj_close, volume is 0).
std::string to_ohlcv_csv(const std::vector<PriceSeries>& series);

}  // namespace simreal::data
