#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <numeric>

#include "cfx/data.hpp"
#include "cfx/errors.hpp"
#include "cfx/rng.hpp"

using namespace cfx;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("cfx_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("equal width splits the range at the midpoint for two bins") {
    auto col = discretize_equal_width({0.0, 0.49, 0.51, 1.0}, 2);
    CHECK(col.codes == std::vector<int>{0, 0, 1, 1});
    CHECK_FALSE(col.degenerate);
}

TEST_CASE("equal width interval indices on a unit range") {
    auto col = discretize_equal_width({0.0, 0.35, 0.7, 1.0}, 10);
    CHECK(col.codes == std::vector<int>{0, 3, 7, 9});
    CHECK(col.k == 10);
    CHECK(col.boundaries.size() == 11);
}

TEST_CASE("equal width maps the maximum into the top bin") {
    auto col = discretize_equal_width({2.0, 5.0, 8.0}, 3);
    CHECK(col.codes.back() == 2);
}

TEST_CASE("constant column discretizes to all zeros with the degenerate flag") {
    auto col = discretize_equal_width({4.2, 4.2, 4.2}, 10);
    CHECK(col.degenerate);
    CHECK(col.codes == std::vector<int>{0, 0, 0});

    auto freq = discretize_equal_frequency({4.2, 4.2, 4.2}, 10);
    CHECK(freq.degenerate);
    CHECK(freq.codes == std::vector<int>{0, 0, 0});
}

TEST_CASE("discretization is monotone and stays in range") {
    Rng rng(31);
    std::vector<double> values(400);
    for (auto& v : values) v = rng.normal() * 3.0 + 1.0;

    for (auto scheme : {BinScheme::equal_width, BinScheme::equal_frequency}) {
        Dataset ds;
        ds.labels = {"v"};
        ds.kinds = {ColumnKind::continuous};
        ds.columns = {values};
        auto disc = discretize_dataset(ds, 7, scheme);
        const auto& codes = disc.codes(0);

        std::vector<int> order(values.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return values[a] < values[b]; });
        for (std::size_t i = 1; i < order.size(); ++i)
            REQUIRE(codes[order[i - 1]] <= codes[order[i]]);
        for (int c : codes) REQUIRE((c >= 0 && c <= 6));
    }
}

TEST_CASE("equal frequency gives exactly balanced bins on distinct values") {
    Rng rng(7);
    std::vector<double> values(5000);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i);
    for (std::size_t i = values.size() - 1; i > 0; --i)
        std::swap(values[i], values[rng.below(i + 1)]);

    auto col = discretize_equal_frequency(values, 10);
    std::vector<int> counts(10, 0);
    for (int c : col.codes) ++counts[c];
    for (int c = 0; c < 10; ++c) CHECK(counts[c] == 500);
}

TEST_CASE("equal frequency changes code at the quartile boundaries") {
    std::vector<double> values(100);
    for (int i = 0; i < 100; ++i) values[i] = i + 1;
    auto col = discretize_equal_frequency(values, 4);

    auto code_of = [&](double v) {
        for (int i = 0; i < 100; ++i)
            if (values[i] == v) return col.codes[i];
        return -1;
    };
    CHECK(code_of(25) == 0);
    CHECK(code_of(26) == 1);
    CHECK(code_of(50) == 1);
    CHECK(code_of(51) == 2);
    CHECK(code_of(75) == 2);
    CHECK(code_of(76) == 3);
    CHECK(code_of(100) == 3);
}

TEST_CASE("equal frequency bin sizes differ by at most one on distinct values") {
    std::vector<double> values(103);
    for (int i = 0; i < 103; ++i) values[i] = std::sin(i * 12.9898) * 43758.5453;
    auto col = discretize_equal_frequency(values, 4);
    std::vector<int> counts(4, 0);
    for (int c : col.codes) ++counts[c];
    auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*mx - *mn <= 1);
}

TEST_CASE("binary target takes the upper half of the range as positive") {
    std::vector<double> values = {0, 2, 4, 5, 7, 10};
    auto labels = make_binary_target(values);
    CHECK(labels == std::vector<int>{0, 0, 0, 1, 1, 1});  // midpoint 5 is positive
}

TEST_CASE("binary target on a uniform column is near balanced") {
    Rng rng(99);
    std::vector<double> values(5000);
    for (auto& v : values) v = rng.uniform01();
    auto labels = make_binary_target(values);
    double mean = std::accumulate(labels.begin(), labels.end(), 0.0) / labels.size();
    CHECK(mean == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("binary target refuses a constant column") {
    CHECK_THROWS_AS(make_binary_target({1.0, 1.0}), DegenerateColumnError);
}

TEST_CASE("csv round trip preserves doubles exactly") {
    Dataset ds;
    ds.labels = {"plain", "with,comma", "with\"quote"};
    ds.kinds = {ColumnKind::continuous, ColumnKind::continuous, ColumnKind::continuous};
    ds.columns = {{1.0 / 3.0, -2.5e300, 0.1},
                  {1e-17, 123456789.123456789, -0.0},
                  {2.0, -7.25, 3.14159265358979312}};

    TempFile f("roundtrip.csv");
    save_csv(ds, f.path);
    Dataset back = load_csv(f.path);

    CHECK(back.labels == ds.labels);
    REQUIRE(back.num_rows() == 3);
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) REQUIRE(back.columns[c][r] == ds.columns[c][r]);
}

TEST_CASE("csv loader reports the position of a bad cell") {
    TempFile f("bad.csv");

    SUBCASE("empty cell") {
        write_file(f.path, "a,b\n1,\n");
        try {
            load_csv(f.path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.row == 2);
            CHECK(e.col == 2);
        }
    }
    SUBCASE("wrong field count") {
        write_file(f.path, "a,b\n1,2\n3\n");
        try {
            load_csv(f.path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.row == 3);
        }
    }
    SUBCASE("text cell") {
        write_file(f.path, "a\nhello\n");
        CHECK_THROWS_AS(load_csv(f.path), ParseError);
    }
    SUBCASE("non-finite value") {
        write_file(f.path, "a\nnan\n");
        CHECK_THROWS_AS(load_csv(f.path), ParseError);
    }
    SUBCASE("infinite value") {
        write_file(f.path, "a\ninf\n");
        CHECK_THROWS_AS(load_csv(f.path), ParseError);
    }
}

TEST_CASE("header-only csv loads as an empty dataset with labels") {
    TempFile f("header.csv");
    write_file(f.path, "x,y,z\n");
    Dataset ds = load_csv(f.path);
    CHECK(ds.labels == std::vector<std::string>{"x", "y", "z"});
    CHECK(ds.num_rows() == 0);
}

TEST_CASE("csv accepts quoted headers and crlf line endings") {
    TempFile f("crlf.csv");
    write_file(f.path, "\"a,1\",b\r\n1.5,2.5\r\n");
    Dataset ds = load_csv(f.path);
    CHECK(ds.labels == std::vector<std::string>{"a,1", "b"});
    REQUIRE(ds.num_rows() == 1);
    CHECK(ds.columns[0][0] == 1.5);
    CHECK(ds.columns[1][0] == 2.5);
}

TEST_CASE("kind sidecar round trips and validates discrete columns") {
    Dataset ds;
    ds.labels = {"ind", "cap"};
    ds.kinds = {ColumnKind::discrete, ColumnKind::continuous};
    ds.columns = {{0, 1, 1}, {0.5, 1.5, 2.5}};

    TempFile f("kinds.json");
    save_kinds(ds, f.path);

    Dataset other;
    other.labels = ds.labels;
    other.kinds = {ColumnKind::continuous, ColumnKind::continuous};
    other.columns = ds.columns;
    load_kinds(other, f.path);
    CHECK(other.kinds[0] == ColumnKind::discrete);
    CHECK(other.kinds[1] == ColumnKind::continuous);

    SUBCASE("discrete column with fractional entries is rejected") {
        TempFile g("kinds_bad.json");
        write_file(g.path, R"({"kinds": {"cap": "discrete"}})");
        CHECK_THROWS_AS(load_kinds(other, g.path), SchemaMismatchError);
    }
    SUBCASE("unknown column is rejected") {
        TempFile g("kinds_unknown.json");
        write_file(g.path, R"({"kinds": {"nope": "discrete"}})");
        CHECK_THROWS_AS(load_kinds(other, g.path), SchemaMismatchError);
    }
}

TEST_CASE("observed codes are the distinct sorted values") {
    DiscretizedDataset dd;
    dd.labels = {"x"};
    dd.cols = {{{3, 1, 3, 0, 1}, 4, {}, false}};
    CHECK(dd.observed_codes(0) == std::vector<int>{0, 1, 3});
}
