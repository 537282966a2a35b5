#include "simreal/data.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace simreal::data {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

ReturnMatrix ReturnMatrix::slice(const DateRange& range) const {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index t = 0; t < rows(); ++t) {
        if (range.contains(dates[static_cast<std::size_t>(t)])) keep.push_back(t);
    }
    ReturnMatrix out;
    out.tickers = tickers;
    out.kind = kind;
    out.values.resize(static_cast<Eigen::Index>(keep.size()), cols());
    out.dates.reserve(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.values.row(static_cast<Eigen::Index>(i)) = values.row(keep[i]);
        out.dates.push_back(dates[static_cast<std::size_t>(keep[i])]);
    }
    return out;
}

std::vector<PriceSeries> parse_ohlcv(const std::string& csv_text,
                                     const CsvSchema& schema) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw EmptyInput("empty CSV input");

    auto header = split_csv_line(line);
    auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    };
    auto require_col = [&](const std::string& name) {
        auto idx = find_col(name);
        if (!idx) throw SchemaError("missing required column '" + name + "'");
        return *idx;
    };
    const std::size_t date_col = require_col(schema.date_column);
    const std::size_t ticker_col = require_col(schema.ticker_column);
    const std::size_t price_col = require_col(schema.price_column);

    struct Row {
        Date date;
        double close;
    };
    std::map<std::string, std::vector<Row>> by_ticker;
    std::unordered_set<std::string> seen;  // "ticker\0date" duplicates guard

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() < header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        Date date;
        double close;
        try {
            date = Date::parse(fields[date_col]);
            close = parse_double(fields[price_col]);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::string& ticker = fields[ticker_col];
        if (ticker.empty()) {
            throw ParseError("line " + std::to_string(line_no) + ": empty ticker");
        }
        if (!(close > 0.0) || !std::isfinite(close)) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": non-positive price " + fields[price_col] +
                             " for " + ticker);
        }
        std::string key = ticker + '\0' + fields[date_col];
        if (!seen.insert(key).second) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": duplicate (date,ticker) row " +
                             fields[date_col] + "," + ticker);
        }
        by_ticker[ticker].push_back({date, close});
    }
    if (by_ticker.empty()) throw EmptyInput("CSV contains no data rows");

    std::vector<PriceSeries> out;
    out.reserve(by_ticker.size());
    for (auto& [ticker, rows] : by_ticker) {
        std::sort(rows.begin(), rows.end(),
                  [](const Row& a, const Row& b) { return a.date < b.date; });
        PriceSeries s;
        s.ticker = ticker;
        s.dates.reserve(rows.size());
        s.closes.reserve(rows.size());
        for (const auto& r : rows) {
            s.dates.push_back(r.date);
            s.closes.push_back(r.close);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<PriceSeries> load_ohlcv(const std::string& path,
                                    const CsvSchema& schema) {
    return parse_ohlcv(read_file(path), schema);
}

ReturnMatrix compute_returns(const std::vector<PriceSeries>& series,
                             ReturnKind kind) {
    if (series.empty()) throw EmptyInput("no price series");

    // Intersect calendars. Series dates are sorted and unique.
    std::vector<Date> common = series.front().dates;
    for (std::size_t i = 1; i < series.size(); ++i) {
        std::vector<Date> next;
        std::set_intersection(common.begin(), common.end(),
                              series[i].dates.begin(), series[i].dates.end(),
                              std::back_inserter(next));
        common = std::move(next);
    }
    if (common.empty()) throw AlignmentError("series share no common dates");
    if (common.size() < 2) {
        throw DegenerateSeries("common calendar shorter than 2 dates");
    }

    const std::size_t T = common.size();
    const std::size_t n = series.size();
    Eigen::MatrixXd prices(static_cast<Eigen::Index>(T),
                           static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        const auto& s = series[j];
        std::size_t k = 0;
        for (std::size_t t = 0; t < T; ++t) {
            while (s.dates[k] < common[t]) ++k;
            prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
                s.closes[k];
        }
    }

    ReturnMatrix out;
    out.kind = kind;
    out.dates.assign(common.begin() + 1, common.end());
    out.tickers.reserve(n);
    for (const auto& s : series) out.tickers.push_back(s.ticker);
    out.values.resize(static_cast<Eigen::Index>(T - 1),
                      static_cast<Eigen::Index>(n));
    for (Eigen::Index t = 1; t < static_cast<Eigen::Index>(T); ++t) {
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
            double ratio = prices(t, j) / prices(t - 1, j);
            out.values(t - 1, j) =
                kind == ReturnKind::simple ? ratio - 1.0 : std::log(ratio);
        }
    }
    if (!out.values.allFinite()) {
        throw NonFiniteInput("non-finite return after validation");
    }
    return out;
}

DataSplit split_periods(const ReturnMatrix& returns, const DateRange& train,
                        const DateRange& gap, const DateRange& test) {
    if (!(train.start <= train.end) || !(gap.start <= gap.end) ||
        !(test.start <= test.end)) {
        throw OverlapError("a split range is reversed");
    }
    if (train.overlaps(gap) || gap.overlaps(test) || train.overlaps(test)) {
        throw OverlapError("split ranges overlap");
    }
    if (!(train.end < gap.start && gap.end < test.start)) {
        throw OverlapError("split ranges out of order (need train < gap < test)");
    }

    DataSplit split;
    split.train = returns.slice(train);
    split.gap = returns.slice(gap);
    split.test = returns.slice(test);
    split.train_range = train;
    split.gap_range = gap;
    split.test_range = test;

    auto check = [](const ReturnMatrix& m, const char* name) {
        if (m.rows() == 0) {
            throw EmptySegment(std::string(name) + " range captures no rows");
        }
    };
    check(split.train, "train");
    check(split.gap, "gap");
    check(split.test, "test");
    return split;
}

ValidationReport validate_alignment(const std::vector<PriceSeries>& series,
                                    AlignmentPolicy policy) {
    if (series.empty()) throw EmptyInput("no price series");

    std::set<Date> union_cal;
    for (const auto& s : series) union_cal.insert(s.dates.begin(), s.dates.end());

    ValidationReport report;
    std::vector<Date> common(union_cal.begin(), union_cal.end());
    for (const auto& s : series) {
        std::set<Date> have(s.dates.begin(), s.dates.end());
        std::vector<Date>& missing = report.missing[s.ticker];
        for (const Date& d : union_cal) {
            if (!have.count(d)) missing.push_back(d);
        }
        if (!missing.empty() && policy == AlignmentPolicy::strict) {
            report.ok = false;
            report.failures.push_back(s.ticker + " missing " +
                                      missing.front().to_string() +
                                      (missing.size() > 1 ? " (+more)" : ""));
        }
        std::vector<Date> next;
        std::set_intersection(common.begin(), common.end(), s.dates.begin(),
                              s.dates.end(), std::back_inserter(next));
        common = std::move(next);
    }
    report.common_calendar = std::move(common);
    return report;
}

std::vector<PriceSeries> generate_synthetic_prices(const SynthConfig& cfg) {
    if (cfg.n_assets < 1 || cfg.n_periods < 2) {
        throw EmptyInput("synthetic config needs >= 1 asset and >= 2 periods");
    }
    const int n = cfg.n_assets;
    const int T = cfg.n_periods;

    auto broadcast = [&](const std::vector<double>& v, double fallback) {
        std::vector<double> out(static_cast<std::size_t>(n), fallback);
        if (v.size() == 1) {
            std::fill(out.begin(), out.end(), v[0]);
        } else if (!v.empty()) {
            if (v.size() != static_cast<std::size_t>(n)) {
                throw DimensionMismatch("drift/vol length != n_assets");
            }
            out = v;
        }
        return out;
    };

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> norm(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::MatrixXd log_ret(T, n);
    if (cfg.mode == "gbm") {
        auto drift = broadcast(cfg.drift, 0.0002);
        auto vol = broadcast(cfg.vol, 0.01);
        // Correlated shocks from an equicorrelation factor model:
        // z_i = sqrt(rho) * f + sqrt(1-rho) * e_i.
        double rho = cfg.correlation;
        if (rho < 0.0 || rho >= 1.0) {
            throw ParseError("correlation must lie in [0, 1)");
        }
        for (int t = 0; t < T; ++t) {
            double f = norm(rng);
            for (int j = 0; j < n; ++j) {
                double z = std::sqrt(rho) * f + std::sqrt(1.0 - rho) * norm(rng);
                double sigma = vol[static_cast<std::size_t>(j)];
                log_ret(t, j) = drift[static_cast<std::size_t>(j)] -
                                0.5 * sigma * sigma + sigma * z;
            }
        }
    } else if (cfg.mode == "regime") {
        int hot = static_cast<int>(unif(rng) * n) % n;
        for (int t = 0; t < T; ++t) {
            if (unif(rng) > cfg.regime_persistence && n > 1) {
                int next = hot;
                while (next == hot) next = static_cast<int>(unif(rng) * n) % n;
                hot = next;
            }
            for (int j = 0; j < n; ++j) {
                double mu = (j == hot) ? cfg.hot_drift : cfg.cold_drift;
                log_ret(t, j) = mu + cfg.regime_vol * norm(rng);
            }
        }
    } else {
        throw ParseError("unknown synthetic mode '" + cfg.mode + "'");
    }

    std::vector<PriceSeries> out;
    out.reserve(static_cast<std::size_t>(n));
    Date d0 = cfg.start_date;
    std::vector<Date> dates;
    dates.reserve(static_cast<std::size_t>(T) + 1);
    Date d = d0;
    for (int t = 0; t <= T; ++t) {
        dates.push_back(d);
        d = d.next_day();
    }
    for (int j = 0; j < n; ++j) {
        PriceSeries s;
        s.ticker = "SYN" + std::to_string(j);
        s.dates = dates;
        s.closes.resize(static_cast<std::size_t>(T) + 1);
        double p = 100.0;
        s.closes[0] = p;
        for (int t = 0; t < T; ++t) {
            p *= std::exp(log_ret(t, j));
            s.closes[static_cast<std::size_t>(t) + 1] = p;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string to_ohlcv_csv(const std::vector<PriceSeries>& series) {
    std::ostringstream out;
    out << "date,ticker,open,high,low,close,adj_close,volume\n";
    // Row-major by date then ticker keeps the file diffable.
    std::size_t max_len = 0;
    for (const auto& s : series) max_len = std::max(max_len, s.size());
    for (std::size_t t = 0; t < max_len; ++t) {
        for (const auto& s : series) {
            if (t >= s.size()) continue;
            const std::string px = format_double(s.closes[t]);
            out << s.dates[t].to_string() << ',' << s.ticker << ',' << px << ','
                << px << ',' << px << ',' << px << ',' << px << ",0\n";
        }
    }
    return out.str();
}

}  // namespace simreal::data
