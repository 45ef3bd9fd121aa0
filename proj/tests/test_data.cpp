#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tsbench/data.hpp"
#include "tsbench/rng.hpp"
#include "tsbench/synth.hpp"

using namespace tsbench;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path p = fs::temp_directory_path() / "tsbench_data_test";
    fs::create_directories(p);
    return p;
}

fs::path write_file(const std::string& name, const std::string& text) {
    fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << text;
    return p;
}

Array3 random_array(std::size_t n, std::size_t t, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Array3 a(n, t, d);
    for (double& x : a.v) x = rng.normal();
    return a;
}

} // namespace

TEST_CASE("csv parse: 3-row 2-column numeric file") {
    auto p = write_file("basic.csv", "a,b\n1,2\n3,4\n5,6\n");
    CsvDataset ds = load_csv_dataset(p, {"a", "b"});
    CHECK(ds.set.values.n == 1);
    CHECK(ds.set.values.t == 3);
    CHECK(ds.set.values.d == 2);
    CHECK(ds.set.values.v == std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK(ds.mask.count_observed() == 6);
}

TEST_CASE("csv parse: empty cell flagged 0 in mask") {
    auto p = write_file("missing.csv", "a,b\n1,2\n3,\n5,6\n");
    CsvDataset ds = load_csv_dataset(p, {"a", "b"});
    CHECK(ds.mask.bits.at(0, 1, 1) == 0.0);
    CHECK(ds.set.values.at(0, 1, 1) == 0.0);
    CHECK(ds.mask.count_observed() == 5);
}

TEST_CASE("csv parse: non-numeric token error names row and column") {
    // header = row 1, so the bad token in the 4th data row sits at file row 5
    auto p = write_file("bad.csv", "time,load\n1,2\n2,3\n3,4\n4,oops\n");
    try {
        load_csv_dataset(p, {"load"});
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        std::string msg = e.what();
        CHECK(msg.find("row 5") != std::string::npos);
        CHECK(msg.find("column 'load'") != std::string::npos);
    }
}

TEST_CASE("csv parse: missing file and missing column") {
    CHECK_THROWS_AS(load_csv_dataset(temp_dir() / "nope.csv", {"a"}), IngestError);
    auto p = write_file("cols.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv_dataset(p, {"c"}), IngestError);
}

TEST_CASE("csv parse: ISO-8601 timestamp column") {
    auto p = write_file("ts.csv",
                        "date,x\n2024-01-01,1\n2024-01-02,2\n2024-01-03,3\n");
    CsvDataset ds = load_csv_dataset(p, {"x"}, std::string("date"));
    REQUIRE(ds.set.timestamps.size() == 3);
    CHECK(ds.set.timestamps[1] - ds.set.timestamps[0] == doctest::Approx(86400.0));
}

TEST_CASE("windows: raw length 5, T=3, stride=1 gives 3 sliding windows") {
    Array3 raw(1, 5, 1);
    for (std::size_t j = 0; j < 5; ++j) raw.at(0, j, 0) = static_cast<double>(j);
    SeriesSet w = make_windows(SeriesSet(raw), 3, 1);
    CHECK(w.n() == 3);
    CHECK(w.values.at(0, 0, 0) == 0.0);
    CHECK(w.values.at(0, 2, 0) == 2.0);
    CHECK(w.values.at(1, 0, 0) == 1.0);
    CHECK(w.values.at(2, 2, 0) == 4.0);
}

TEST_CASE("windows: T equal to raw length reproduces the record") {
    Array3 raw = random_array(1, 5, 2, 1);
    SeriesSet w = make_windows(SeriesSet(raw), 5, 1);
    CHECK(w.n() == 1);
    CHECK(w.values.v == raw.v);
}

TEST_CASE("windows: count formula on non-overlapping stride") {
    // floor((100-24)/24)+1 = 4
    Array3 raw = random_array(1, 100, 3, 2);
    SeriesSet w = make_windows(SeriesSet(raw), 24, 24);
    CHECK(w.n() == 4);
}

TEST_CASE("windows: oversized window is a sizing error") {
    Array3 raw = random_array(1, 5, 1, 3);
    CHECK_THROWS_AS(make_windows(SeriesSet(raw), 6, 1), SizingError);
}

TEST_CASE("window reconstruction: stride-1 windows overlay to the raw record") {
    Array3 raw = random_array(1, 40, 3, 4);
    SeriesSet w = make_windows(SeriesSet(raw), 7, 1);
    Array3 rebuilt(1, 40, 3);
    Array3 counts(1, 40, 3);
    for (std::size_t i = 0; i < w.n(); ++i)
        for (std::size_t j = 0; j < 7; ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                rebuilt.at(0, i + j, k) += w.values.at(i, j, k);
                counts.at(0, i + j, k) += 1.0;
            }
    for (std::size_t p = 0; p < rebuilt.size(); ++p)
        CHECK(rebuilt.v[p] / counts.v[p] == doctest::Approx(raw.v[p]).epsilon(1e-12));
}

TEST_CASE("split: ratio arithmetic and chronological indices") {
    SplitSpec spec;
    spec.mode = SplitMode::chronological;
    SplitIndices idx = split_indices(10, spec);
    CHECK(idx.train.size() == 8);
    CHECK(idx.val == std::vector<std::size_t>{8});
    CHECK(idx.test == std::vector<std::size_t>{9});
    for (std::size_t i = 0; i < 8; ++i) CHECK(idx.train[i] == i);
}

TEST_CASE("split: empty split is a sizing error") {
    SplitSpec spec;
    spec.ratios[0] = 1.0;
    spec.ratios[1] = 0.0;
    spec.ratios[2] = 0.0;
    CHECK_THROWS_AS(split_indices(10, spec), SizingError);
}

TEST_CASE("split: shuffled mode is seed deterministic and a disjoint cover") {
    SplitSpec spec;
    spec.mode = SplitMode::shuffled;
    spec.seed = 99;
    SplitIndices a = split_indices(23, spec);
    SplitIndices b = split_indices(23, spec);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.test == b.test);

    std::vector<int> seen(23, 0);
    for (auto i : a.train) seen[i]++;
    for (auto i : a.val) seen[i]++;
    for (auto i : a.test) seen[i]++;
    for (int c : seen) CHECK(c == 1);
}

TEST_CASE("scaler: constant feature under zscore maps to zero and back") {
    Array3 a(4, 3, 2);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            a.at(i, j, 0) = 7.5;
            a.at(i, j, 1) = static_cast<double>(i + j);
        }
    Scaler sc = Scaler::fit(SeriesSet(a), ScaleMethod::zscore);
    CHECK(sc.warnings().size() == 1);
    Array3 tr = sc.apply(a);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(tr.at(i, j, 0) == doctest::Approx(0.0));
    Array3 back = sc.invert(tr);
    for (std::size_t p = 0; p < a.size(); ++p)
        CHECK(back.v[p] == doctest::Approx(a.v[p]).epsilon(1e-12));
}

TEST_CASE("scaler: minmax maps the span to [0,1]") {
    Array3 a(1, 3, 1);
    a.at(0, 0, 0) = 2.0;
    a.at(0, 1, 0) = 3.0;
    a.at(0, 2, 0) = 4.0;
    Scaler sc = Scaler::fit(SeriesSet(a), ScaleMethod::minmax);
    Array3 tr = sc.apply(a);
    CHECK(tr.at(0, 0, 0) == doctest::Approx(0.0));
    CHECK(tr.at(0, 1, 0) == doctest::Approx(0.5));
    CHECK(tr.at(0, 2, 0) == doctest::Approx(1.0));
}

TEST_CASE("scaler: round trip within 1e-6 relative error on random data") {
    for (ScaleMethod m : {ScaleMethod::zscore, ScaleMethod::minmax}) {
        Array3 a = random_array(8, 6, 4, 42);
        Scaler sc = Scaler::fit(SeriesSet(a), m);
        Array3 rt = sc.invert(sc.apply(a));
        for (std::size_t p = 0; p < a.size(); ++p) {
            double denom = std::max(1.0, std::abs(a.v[p]));
            CHECK(std::abs(rt.v[p] - a.v[p]) / denom < 1e-6);
        }
    }
}

TEST_CASE("scaler: statistics depend on the training split alone") {
    Array3 a = random_array(10, 4, 2, 7);
    Scaler s1 = Scaler::fit(SeriesSet(a), ScaleMethod::zscore);
    // changing other rows (a hypothetical val/test) cannot matter because fit
    // only ever sees the train rows it is given
    Array3 b = a;
    Scaler s2 = Scaler::fit(SeriesSet(b), ScaleMethod::zscore);
    CHECK(s1.center() == s2.center());
    CHECK(s1.scale() == s2.scale());
}

TEST_CASE("scaler json round trip") {
    Array3 a = random_array(5, 3, 2, 9);
    Scaler sc = Scaler::fit(SeriesSet(a), ScaleMethod::minmax);
    Scaler rt = Scaler::from_json(sc.to_json());
    CHECK(rt.center() == sc.center());
    CHECK(rt.scale() == sc.scale());
    CHECK((rt.method() == sc.method()));
}

TEST_CASE("simulate_missing: identity and degenerate rates") {
    Array3 a = random_array(3, 4, 2, 5);
    SeriesSet s(a);
    MaskedSet zero = simulate_missing(s, 0.0, 1);
    CHECK(zero.mask.count_observed() == a.size());
    CHECK(zero.observed.values.v == a.v);

    MaskedSet one = simulate_missing(s, 1.0, 1);
    CHECK(one.mask.count_observed() == 0);
    for (double x : one.observed.values.v) CHECK(x == 0.0);

    CHECK_THROWS_AS(simulate_missing(s, -0.1, 1), ParamError);
    CHECK_THROWS_AS(simulate_missing(s, 1.2, 1), ParamError);
}

TEST_CASE("simulate_missing: rate 0.2 on 10k entries within 3 binomial sd") {
    Array3 a = random_array(25, 40, 10, 3); // 10000 entries
    MaskedSet ms = simulate_missing(SeriesSet(a), 0.2, 17);
    double n = static_cast<double>(a.size());
    double missing = n - static_cast<double>(ms.mask.count_observed());
    double frac = missing / n;
    double sd = std::sqrt(0.2 * 0.8 / n);
    CHECK(std::abs(frac - 0.2) <= 3.0 * sd);
}

TEST_CASE("forecast pairs: shapes, bit-exact concatenation, boundary case") {
    Array3 a = random_array(4, 192, 3, 11);
    ForecastPair fp = make_forecast_pairs(SeriesSet(a), 96, 96);
    CHECK(fp.history.n == 4);
    CHECK(fp.history.t == 96);
    CHECK(fp.target.t == 96);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 192; ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                double expect = a.at(i, j, k);
                double got = j < 96 ? fp.history.at(i, j, k) : fp.target.at(i, j - 96, k);
                CHECK(got == expect);
            }

    ForecastPair one = make_forecast_pairs(SeriesSet(a), 191, 1);
    CHECK(one.target.t == 1);
    CHECK(one.target.at(2, 0, 1) == a.at(2, 191, 1));

    CHECK_THROWS_AS(make_forecast_pairs(SeriesSet(a), 100, 100), SizingError);
}

TEST_CASE("simulate_irregular: identity, monotone timestamps, binomial count") {
    Array3 a = random_array(3, 12, 2, 13);
    MaskedSet id = simulate_irregular(SeriesSet(a), 0.0, 1);
    REQUIRE(id.observed.timestamps.size() == 12);
    for (std::size_t j = 0; j < 12; ++j) CHECK(id.observed.timestamps[j] == doctest::Approx(j));
    CHECK(id.mask.count_observed() == a.size());

    Array3 big = random_array(4, 1000, 1, 29);
    MaskedSet ir = simulate_irregular(SeriesSet(big), 0.3, 5);
    for (std::size_t i = 0; i < 4; ++i) {
        double prev = -1.0;
        std::size_t surv = 0;
        for (std::size_t j = 0; j < 1000; ++j) {
            if (ir.mask.bits.at(i, j, 0) == 1.0) {
                ++surv;
                CHECK(ir.observed.timestamps[j] > prev);
                prev = ir.observed.timestamps[j];
            }
        }
        double frac = static_cast<double>(surv) / 1000.0;
        double sd = std::sqrt(0.3 * 0.7 / 1000.0);
        CHECK(std::abs(frac - 0.7) <= 3.0 * sd);
    }
    CHECK_THROWS_AS(simulate_irregular(SeriesSet(a), 1.0, 1), ParamError);
}

TEST_CASE("simulate_irregular: every sample keeps at least 2 steps") {
    Array3 a = random_array(200, 4, 1, 31);
    MaskedSet ir = simulate_irregular(SeriesSet(a), 0.9, 77);
    for (std::size_t i = 0; i < 200; ++i) {
        std::size_t surv = 0;
        for (std::size_t j = 0; j < 4; ++j) surv += ir.mask.bits.at(i, j, 0) == 1.0;
        CHECK(surv >= 2);
    }
}

TEST_CASE("assemble_imputation: identity, complement, elementwise oracle") {
    Array3 x = random_array(3, 5, 2, 19);
    Array3 xp = random_array(3, 5, 2, 23);
    Mask ones(3, 5, 2, 1.0);
    Mask zeros(3, 5, 2, 0.0);

    CHECK(assemble_imputation(SeriesSet(x), ones, SeriesSet(xp)).values.v == x.v);
    CHECK(assemble_imputation(SeriesSet(x), zeros, SeriesSet(xp)).values.v == xp.v);

    Rng rng(3);
    Mask m(3, 5, 2, 1.0);
    for (double& b : m.bits.v) b = rng.bernoulli(0.5) ? 1.0 : 0.0;
    Array3 got = assemble_imputation(SeriesSet(x), m, SeriesSet(xp)).values;
    for (std::size_t p = 0; p < got.size(); ++p) {
        double expect = m.bits.v[p] == 1.0 ? x.v[p] : xp.v[p];
        CHECK(got.v[p] == expect);
    }

    // mask algebra: assemble(X, m, X) == X for every mask
    CHECK(assemble_imputation(SeriesSet(x), m, SeriesSet(x)).values.v == x.v);

    Array3 bad(2, 5, 2);
    CHECK_THROWS_AS(assemble_imputation(SeriesSet(x), m, SeriesSet(bad)), SizingError);
}

TEST_CASE("series directory round trip preserves everything") {
    SineNDParams p;
    p.n_samples = 6;
    p.length = 10;
    p.dims = 3;
    p.seed = 2;
    SeriesSet set = gen_sine_nd(p);
    MaskedSet ms = simulate_missing(set, 0.25, 4);

    SeriesDirContents c;
    c.set = ms.observed;
    c.mask = ms.mask;
    c.labels = std::vector<int>{0, 1, 0, 1, 0, 1};
    c.n_classes = 2;
    c.seed = 2;
    c.provenance = "unit-test";

    fs::path dir = temp_dir() / "roundtrip";
    fs::remove_all(dir);
    save_series_dir(dir, c);
    SeriesDirContents r = load_series_dir(dir);

    CHECK(r.set.values.v == c.set.values.v);
    REQUIRE(r.mask.has_value());
    CHECK(r.mask->bits.v == c.mask->bits.v);
    REQUIRE(r.labels.has_value());
    CHECK(*r.labels == *c.labels);
    CHECK(r.n_classes == 2);
    CHECK(r.seed == 2);
    CHECK(r.provenance == "unit-test");
}
