#include "tsbench/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tsbench/rng.hpp"

namespace tsbench {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e;
}

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    long long era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

// ISO-8601 date or datetime -> seconds since epoch; falls back to a plain
// numeric parse.
bool parse_timestamp(const std::string& s, double& out) {
    int y, mo, d, h = 0, mi = 0;
    double sec = 0.0;
    char sep;
    int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d, &sep, &h, &mi, &sec);
    if (n >= 3) {
        out = static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
        return true;
    }
    return parse_double(s, out);
}

} // namespace

std::vector<std::string> csv_column_names(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open file: " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw IngestError("empty file: " + path.string());
    if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) header = header.substr(3);
    std::vector<std::string> names = split_csv_line(header);
    for (auto& n : names) n = trim(n);
    return names;
}

CsvDataset load_csv_dataset(const fs::path& path, const std::vector<std::string>& value_columns,
                            const std::optional<std::string>& timestamp_column) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open file: " + path.string());

    std::string header;
    if (!std::getline(in, header)) throw IngestError("empty file: " + path.string());
    if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) header = header.substr(3);
    std::vector<std::string> names = split_csv_line(header);
    for (auto& n : names) n = trim(n);

    auto col_index = [&](const std::string& name) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end())
            throw IngestError("column '" + name + "' not found in " + path.string());
        return static_cast<std::size_t>(it - names.begin());
    };

    if (value_columns.empty()) throw IngestError("no value columns requested");
    std::vector<std::size_t> vidx;
    vidx.reserve(value_columns.size());
    for (const auto& c : value_columns) vidx.push_back(col_index(c));
    std::optional<std::size_t> tidx;
    if (timestamp_column) tidx = col_index(*timestamp_column);

    std::vector<double> values, bits, stamps;
    std::string line;
    std::size_t row = 1; // header is row 1
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != names.size())
            throw IngestError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(names.size()));
        for (std::size_t k = 0; k < vidx.size(); ++k) {
            std::string tok = trim(fields[vidx[k]]);
            if (is_missing_token(tok)) {
                values.push_back(0.0);
                bits.push_back(0.0);
            } else {
                double x;
                if (!parse_double(tok, x))
                    throw IngestError("non-numeric value at row " + std::to_string(row) +
                                      ", column '" + value_columns[k] + "'");
                values.push_back(x);
                bits.push_back(1.0);
            }
        }
        if (tidx) {
            std::string tok = trim(fields[*tidx]);
            double ts;
            if (!parse_timestamp(tok, ts))
                throw IngestError("bad timestamp at row " + std::to_string(row) + ", column '" +
                                  *timestamp_column + "'");
            stamps.push_back(ts);
        }
    }

    std::size_t rows = values.size() / vidx.size();
    if (rows == 0) throw IngestError("no data rows in " + path.string());

    CsvDataset out;
    out.set.values = Array3(1, rows, vidx.size());
    out.set.values.v = std::move(values);
    out.mask.bits = Array3(1, rows, vidx.size());
    out.mask.bits.v = std::move(bits);
    if (tidx) {
        for (std::size_t i = 1; i < stamps.size(); ++i)
            if (!(stamps[i] > stamps[i - 1]))
                throw IngestError("timestamps not strictly increasing at row " + std::to_string(i + 2));
        out.set.timestamps = std::move(stamps);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Windowing / splitting
// ---------------------------------------------------------------------------

namespace {

Array3 window_array(const Array3& raw, std::size_t length, std::size_t stride) {
    if (stride < 1) throw ParamError("stride must be >= 1");
    if (length < 1) throw ParamError("window length must be >= 1");
    if (raw.t < length)
        throw SizingError("window length " + std::to_string(length) + " exceeds record length " +
                          std::to_string(raw.t));
    std::size_t per_record = (raw.t - length) / stride + 1;
    Array3 out(raw.n * per_record, length, raw.d);
    std::size_t w = 0;
    for (std::size_t i = 0; i < raw.n; ++i) {
        for (std::size_t s = 0; s < per_record; ++s, ++w) {
            std::size_t start = s * stride;
            std::memcpy(&out.v[(w * length) * raw.d], &raw.v[(i * raw.t + start) * raw.d],
                        length * raw.d * sizeof(double));
        }
    }
    return out;
}

} // namespace

SeriesSet make_windows(const SeriesSet& raw, std::size_t length, std::size_t stride) {
    return SeriesSet(window_array(raw.values, length, stride));
}

Mask make_windows(const Mask& raw, std::size_t length, std::size_t stride) {
    return Mask(window_array(raw.bits, length, stride));
}

void SplitSpec::validate() const {
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw ParamError("split ratios must sum to 1, got " + std::to_string(sum));
    for (double r : ratios)
        if (r < 0.0) throw ParamError("split ratios must be nonnegative");
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
    spec.validate();
    std::size_t n_train = static_cast<std::size_t>(std::llround(spec.ratios[0] * static_cast<double>(n)));
    std::size_t n_val = static_cast<std::size_t>(std::llround(spec.ratios[1] * static_cast<double>(n)));
    if (n_train + n_val > n) n_val = n - n_train;
    std::size_t n_test = n - n_train - n_val;
    if (n_train == 0 || n_val == 0 || n_test == 0)
        throw SizingError("degenerate split: sizes (" + std::to_string(n_train) + "," +
                          std::to_string(n_val) + "," + std::to_string(n_test) + ") for N=" +
                          std::to_string(n));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (spec.mode == SplitMode::shuffled) {
        Rng rng(spec.seed);
        rng.shuffle(order);
    }

    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + n_train);
    out.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    out.test.assign(order.begin() + n_train + n_val, order.end());
    return out;
}

Array3 take_rows(const Array3& a, const std::vector<std::size_t>& idx) {
    Array3 out(idx.size(), a.t, a.d);
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::memcpy(&out.v[i * a.t * a.d], &a.v[idx[i] * a.t * a.d], a.t * a.d * sizeof(double));
    return out;
}

SplitSets split_dataset(const SeriesSet& set, const SplitSpec& spec) {
    SplitIndices idx = split_indices(set.n(), spec);
    SplitSets out;
    out.train = SeriesSet(take_rows(set.values, idx.train), set.timestamps);
    out.val = SeriesSet(take_rows(set.values, idx.val), set.timestamps);
    out.test = SeriesSet(take_rows(set.values, idx.test), set.timestamps);
    return out;
}

// ---------------------------------------------------------------------------
// Scaler
// ---------------------------------------------------------------------------

Scaler Scaler::fit(const SeriesSet& train, ScaleMethod method) {
    if (train.values.empty()) throw SizingError("cannot fit scaler on empty set");
    const Array3& a = train.values;
    Scaler sc;
    sc.method_ = method;
    sc.center_.assign(a.d, 0.0);
    sc.scale_.assign(a.d, 1.0);

    for (std::size_t k = 0; k < a.d; ++k) {
        if (method == ScaleMethod::zscore) {
            double sum = 0.0;
            for (std::size_t i = 0; i < a.n; ++i)
                for (std::size_t j = 0; j < a.t; ++j) sum += a.at(i, j, k);
            double mean = sum / static_cast<double>(a.n * a.t);
            double ss = 0.0;
            for (std::size_t i = 0; i < a.n; ++i)
                for (std::size_t j = 0; j < a.t; ++j) {
                    double dlt = a.at(i, j, k) - mean;
                    ss += dlt * dlt;
                }
            double std = std::sqrt(ss / static_cast<double>(a.n * a.t));
            sc.center_[k] = mean;
            if (std < 1e-12) {
                sc.scale_[k] = 1.0;
                sc.warnings_.push_back("feature " + std::to_string(k) +
                                       " has zero variance; scale clamped to 1");
            } else {
                sc.scale_[k] = std;
            }
        } else {
            double lo = a.at(0, 0, k), hi = lo;
            for (std::size_t i = 0; i < a.n; ++i)
                for (std::size_t j = 0; j < a.t; ++j) {
                    lo = std::min(lo, a.at(i, j, k));
                    hi = std::max(hi, a.at(i, j, k));
                }
            sc.center_[k] = lo;
            double span = hi - lo;
            if (span < 1e-12) {
                sc.scale_[k] = 1.0;
                sc.warnings_.push_back("feature " + std::to_string(k) +
                                       " has zero range; scale clamped to 1");
            } else {
                sc.scale_[k] = span;
            }
        }
    }
    return sc;
}

Array3 Scaler::apply(const Array3& a) const {
    if (a.d != center_.size()) throw SizingError("scaler fitted for D=" + std::to_string(center_.size()));
    Array3 out = a;
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t j = 0; j < a.t; ++j)
            for (std::size_t k = 0; k < a.d; ++k)
                out.at(i, j, k) = (a.at(i, j, k) - center_[k]) / scale_[k];
    return out;
}

Array3 Scaler::invert(const Array3& a) const {
    if (a.d != center_.size()) throw SizingError("scaler fitted for D=" + std::to_string(center_.size()));
    Array3 out = a;
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t j = 0; j < a.t; ++j)
            for (std::size_t k = 0; k < a.d; ++k)
                out.at(i, j, k) = a.at(i, j, k) * scale_[k] + center_[k];
    return out;
}

SeriesSet Scaler::apply(const SeriesSet& s) const { return SeriesSet(apply(s.values), s.timestamps); }
SeriesSet Scaler::invert(const SeriesSet& s) const { return SeriesSet(invert(s.values), s.timestamps); }

std::string Scaler::to_json() const {
    json j;
    j["method"] = method_ == ScaleMethod::zscore ? "zscore" : "minmax";
    j["center"] = center_;
    j["scale"] = scale_;
    j["warnings"] = warnings_;
    return j.dump();
}

Scaler Scaler::from_json(const std::string& text) {
    json j = json::parse(text);
    Scaler sc;
    sc.method_ = (j.at("method").get<std::string>() == "zscore") ? ScaleMethod::zscore
                                                                 : ScaleMethod::minmax;
    sc.center_ = j.at("center").get<std::vector<double>>();
    sc.scale_ = j.at("scale").get<std::vector<double>>();
    if (j.contains("warnings")) sc.warnings_ = j.at("warnings").get<std::vector<std::string>>();
    return sc;
}

// ---------------------------------------------------------------------------
// Corruption
// ---------------------------------------------------------------------------

MaskedSet simulate_missing(const SeriesSet& set, double rate, std::uint64_t seed) {
    if (rate < 0.0 || rate > 1.0) throw ParamError("missing rate must lie in [0,1]");
    Rng rng(seed);
    MaskedSet out;
    out.mask.bits = Array3(set.n(), set.t(), set.d(), 1.0);
    out.observed.values = set.values;
    out.observed.timestamps = set.timestamps;
    for (std::size_t i = 0; i < set.values.size(); ++i) {
        if (rng.bernoulli(rate)) {
            out.mask.bits.v[i] = 0.0;
            out.observed.values.v[i] = 0.0;
        }
    }
    return out;
}

ForecastPair make_forecast_pairs(const SeriesSet& set, std::size_t l_obs, std::size_t l_pred) {
    if (l_obs < 1 || l_pred < 1) throw SizingError("L_obs and L_pred must be >= 1");
    if (set.t() != l_obs + l_pred)
        throw SizingError("window length " + std::to_string(set.t()) + " != L_obs + L_pred = " +
                          std::to_string(l_obs + l_pred));
    ForecastPair out;
    out.history = Array3(set.n(), l_obs, set.d());
    out.target = Array3(set.n(), l_pred, set.d());
    for (std::size_t i = 0; i < set.n(); ++i) {
        std::memcpy(&out.history.v[i * l_obs * set.d()], &set.values.v[i * set.t() * set.d()],
                    l_obs * set.d() * sizeof(double));
        std::memcpy(&out.target.v[i * l_pred * set.d()],
                    &set.values.v[(i * set.t() + l_obs) * set.d()], l_pred * set.d() * sizeof(double));
    }
    return out;
}

MaskedSet simulate_irregular(const SeriesSet& set, double drop_rate, std::uint64_t seed) {
    if (drop_rate < 0.0 || drop_rate >= 1.0) throw ParamError("drop rate must lie in [0,1)");
    Rng rng(seed);
    MaskedSet out;
    out.observed.values = set.values;
    out.observed.timestamps = set.timestamps;
    if (out.observed.timestamps.empty()) {
        out.observed.timestamps.resize(set.t());
        for (std::size_t j = 0; j < set.t(); ++j) out.observed.timestamps[j] = static_cast<double>(j);
    }
    out.mask.bits = Array3(set.n(), set.t(), set.d(), 1.0);

    std::vector<char> keep(set.t());
    for (std::size_t i = 0; i < set.n(); ++i) {
        std::size_t surviving = 0;
        do {
            surviving = 0;
            for (std::size_t j = 0; j < set.t(); ++j) {
                keep[j] = rng.bernoulli(drop_rate) ? 0 : 1;
                surviving += keep[j];
            }
        } while (surviving < 2);
        for (std::size_t j = 0; j < set.t(); ++j) {
            if (!keep[j]) {
                for (std::size_t k = 0; k < set.d(); ++k) {
                    out.mask.bits.at(i, j, k) = 0.0;
                    out.observed.values.at(i, j, k) = 0.0;
                }
            }
        }
    }
    return out;
}

SeriesSet assemble_imputation(const SeriesSet& x, const Mask& m, const SeriesSet& x_prime) {
    if (!x.values.same_shape(m.bits) || !x.values.same_shape(x_prime.values))
        throw SizingError("assemble_imputation: shapes must match, got " + x.values.shape_str() +
                          ", " + m.bits.shape_str() + ", " + x_prime.values.shape_str());
    SeriesSet out;
    out.values = x.values;
    out.timestamps = x.timestamps;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (m.bits.v[i] == 0.0) out.values.v[i] = x_prime.values.v[i];
    return out;
}

// ---------------------------------------------------------------------------
// Series directory
// ---------------------------------------------------------------------------

namespace {

void write_bin(const fs::path& p, const double* data, std::size_t count) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IngestError("cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

std::vector<double> read_bin(const fs::path& p, std::size_t count) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IngestError("cannot read " + p.string());
    std::vector<double> v(count);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
        throw IngestError("truncated array file " + p.string());
    return v;
}

} // namespace

void save_series_dir(const fs::path& dir, const SeriesDirContents& contents) {
    fs::create_directories(dir);
    const Array3& a = contents.set.values;

    json manifest;
    manifest["format"] = "tsbench-series-dir";
    manifest["version"] = 1;
    manifest["dtype"] = "float64";
    manifest["shape"] = {a.n, a.t, a.d};
    manifest["seed"] = contents.seed;
    manifest["provenance"] = contents.provenance;
    json arrays;
    arrays["values"] = "values.bin";
    write_bin(dir / "values.bin", a.v.data(), a.size());

    if (contents.mask) {
        if (!contents.mask->bits.same_shape(a)) throw SizingError("mask shape mismatch on save");
        arrays["mask"] = "mask.bin";
        write_bin(dir / "mask.bin", contents.mask->bits.v.data(), contents.mask->bits.size());
    }
    if (!contents.set.timestamps.empty()) {
        arrays["timestamps"] = "timestamps.bin";
        write_bin(dir / "timestamps.bin", contents.set.timestamps.data(),
                  contents.set.timestamps.size());
    }
    if (contents.labels) {
        if (contents.labels->size() != a.n) throw SizingError("labels length mismatch on save");
        std::vector<double> lab(contents.labels->begin(), contents.labels->end());
        arrays["labels"] = "labels.bin";
        write_bin(dir / "labels.bin", lab.data(), lab.size());
        manifest["n_classes"] = contents.n_classes;
    }
    manifest["arrays"] = arrays;

    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
}

SeriesDirContents load_series_dir(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IngestError("missing manifest.json in " + dir.string());
    json manifest = json::parse(in);
    if (manifest.value("format", "") != "tsbench-series-dir")
        throw IngestError("not a series directory: " + dir.string());

    auto shape = manifest.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 3) throw IngestError("manifest shape must have 3 entries");

    SeriesDirContents out;
    out.set.values = Array3(shape[0], shape[1], shape[2]);
    out.set.values.v = read_bin(dir / manifest.at("arrays").at("values").get<std::string>(),
                                out.set.values.size());
    out.seed = manifest.value("seed", 0ull);
    out.provenance = manifest.value("provenance", "");

    const json& arrays = manifest.at("arrays");
    if (arrays.contains("mask")) {
        Mask m;
        m.bits = Array3(shape[0], shape[1], shape[2]);
        m.bits.v = read_bin(dir / arrays.at("mask").get<std::string>(), m.bits.size());
        out.mask = std::move(m);
    }
    if (arrays.contains("timestamps"))
        out.set.timestamps = read_bin(dir / arrays.at("timestamps").get<std::string>(), shape[1]);
    if (arrays.contains("labels")) {
        std::vector<double> lab = read_bin(dir / arrays.at("labels").get<std::string>(), shape[0]);
        out.labels = std::vector<int>(lab.begin(), lab.end());
        out.n_classes = manifest.value("n_classes", 0);
    }
    return out;
}

} // namespace tsbench
