#ifndef TSBENCH_DATA_HPP
#define TSBENCH_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsbench/series.hpp"

namespace tsbench {

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

struct CsvDataset {
    SeriesSet set; // [1, rows, D], one long multivariate record
    Mask mask;     // 0 where the file had an empty/NA cell
};

/// Parse a CSV file (header row required, UTF-8, optional ISO-8601 or numeric
/// timestamp column) into a single long record. Missing cells (empty, NA,
/// NaN) become zeros flagged 0 in the mask. A non-numeric token raises an
/// IngestError naming the 1-based file row (header = row 1) and column name.
CsvDataset load_csv_dataset(const std::filesystem::path& path,
                            const std::vector<std::string>& value_columns,
                            const std::optional<std::string>& timestamp_column = std::nullopt);

/// Column names from a CSV header, in file order.
std::vector<std::string> csv_column_names(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Windowing / splitting
// ---------------------------------------------------------------------------

/// Cut sliding windows of the given length/stride from every record.
/// Yields floor((T_raw - length)/stride) + 1 windows per record, no padding.
SeriesSet make_windows(const SeriesSet& raw, std::size_t length, std::size_t stride);
Mask make_windows(const Mask& raw, std::size_t length, std::size_t stride);

enum class SplitMode { chronological, shuffled };

struct SplitSpec {
    double ratios[3] = {0.8, 0.1, 0.1}; // train, val, test
    SplitMode mode = SplitMode::chronological;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitIndices {
    std::vector<std::size_t> train, val, test;
};

/// Partition 0..n-1 into three disjoint covering index sets. Chronological
/// mode keeps order; shuffled mode is seed-deterministic.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

struct SplitSets {
    SeriesSet train, val, test;
};

SplitSets split_dataset(const SeriesSet& set, const SplitSpec& spec);

/// Row subset of a batch, in the given index order.
Array3 take_rows(const Array3& a, const std::vector<std::size_t>& idx);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

enum class ScaleMethod { zscore, minmax };

/// Per-feature affine scaler fitted on the training split only.
/// apply(x) = (x - center) / scale; invert is the exact inverse.
class Scaler {
public:
    static Scaler fit(const SeriesSet& train, ScaleMethod method);

    Array3 apply(const Array3& a) const;
    Array3 invert(const Array3& a) const;
    SeriesSet apply(const SeriesSet& s) const;
    SeriesSet invert(const SeriesSet& s) const;

    ScaleMethod method() const { return method_; }
    const std::vector<double>& center() const { return center_; }
    const std::vector<double>& scale() const { return scale_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    std::string to_json() const;
    static Scaler from_json(const std::string& text);

private:
    ScaleMethod method_ = ScaleMethod::zscore;
    std::vector<double> center_, scale_;
    std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// Task-specific corruption
// ---------------------------------------------------------------------------

struct MaskedSet {
    SeriesSet observed; // X~ = X (.) m, zeros at missing entries
    Mask mask;          // 1 = observed
};

/// Mask each entry independently with probability `rate` (MCAR).
MaskedSet simulate_missing(const SeriesSet& set, double rate, std::uint64_t seed);

/// Split windows of length L_obs + L_pred into history/target slices.
ForecastPair make_forecast_pairs(const SeriesSet& set, std::size_t l_obs, std::size_t l_pred);

/// Drop whole time steps per sample with probability drop_rate; dropped
/// steps are zeroed and flagged 0 across all features. Every sample keeps
/// at least 2 steps (its drop pattern is redrawn otherwise). Timestamps
/// are materialized (0..T-1 when the input had none).
MaskedSet simulate_irregular(const SeriesSet& set, double drop_rate, std::uint64_t seed);

/// X_hat = X (.) m + X' (.) (1 - m): observed entries from X bit-exactly,
/// missing entries from the reconstruction X'.
SeriesSet assemble_imputation(const SeriesSet& x, const Mask& m, const SeriesSet& x_prime);

// ---------------------------------------------------------------------------
// On-disk series directory (flat binary arrays + JSON manifest)
// ---------------------------------------------------------------------------

struct SeriesDirContents {
    SeriesSet set;
    std::optional<Mask> mask;
    std::optional<std::vector<int>> labels;
    int n_classes = 0;
    std::uint64_t seed = 0;
    std::string provenance;
};

void save_series_dir(const std::filesystem::path& dir, const SeriesDirContents& contents);
SeriesDirContents load_series_dir(const std::filesystem::path& dir);

} // namespace tsbench

#endif
