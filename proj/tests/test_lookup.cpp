#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include <json.hpp>

#include "oracles.hpp"
#include "packwise/error.hpp"
#include "packwise/lookup.hpp"

using namespace packwise;

namespace {

LookupTable make_table(const std::vector<Pattern>& patterns, Similarity similarity = Similarity::pearson) {
    LookupTable t;
    t.services = ServiceCatalog(std::vector<std::vector<double>>(patterns[0].size(), std::vector<double>{1.0}));
    t.vm_types = {{"box", {100.0}, 1.0}, {"big", {250.0}, 2.0}};
    t.similarity = similarity;
    if (similarity == Similarity::euclidean) t.threshold = default_euclidean_threshold(patterns);
    for (const auto& p : patterns) {
        const DemandVector d(p.size(), 1, p);
        t.entries.push_back({p, first_fit_pack(d, t.vm_types, t.period_hours()), d.per_dim_flat()});
    }
    t.fingerprint = catalog_fingerprint(t.services, t.vm_types);
    return t;
}

}  // namespace

TEST_CASE("pearson hand value and sentinel") {
    const std::vector<double> a{1, 2, 3}, b{1, 2, 4};
    CHECK(pearson(a, b) == doctest::Approx(9.0 / std::sqrt(84.0)).epsilon(1e-14));
    const std::vector<double> flat{5, 5, 5}, flat2{7, 7, 7};
    CHECK(pearson(flat, flat2) == 1.0);
    CHECK(pearson(flat, a) == 0.0);
    CHECK(pearson(a, flat) == 0.0);
    CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 2}), InvalidArgument);
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), InvalidArgument);
}

TEST_CASE("pearson properties on random vectors") {
    Rng rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(8);
        std::vector<double> x(n), y(n), scaled(n), shifted(n), neg(n);
        const double alpha = 0.01 + 100.0 * rng.uniform01(), beta = -50.0 + 100.0 * rng.uniform01();
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = 100.0 * rng.uniform01();
            y[i] = 100.0 * rng.uniform01();
            scaled[i] = alpha * x[i];
            shifted[i] = x[i] + beta;
            neg[i] = -x[i];
        }
        const double r = pearson(x, y);
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
        CHECK(r == doctest::Approx(pearson(y, x)).epsilon(1e-15));
        CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(std::abs(pearson(scaled, y) - r) <= 1e-12);
        CHECK(std::abs(pearson(shifted, y) - r) <= 1e-12);
    }
}

TEST_CASE("exact match hits with score one") {
    const auto t = make_table({{25, 60, 12, 32, 48}, {80, 10, 70, 20, 5}});
    const DemandVector in(5, 1, {25, 60, 12, 32, 48});
    const auto m = match(t, in);
    CHECK(m.hit);
    CHECK(m.best_index == 0);
    CHECK(m.score == doctest::Approx(1.0));
    REQUIRE(m.chosen);
    CHECK(*m.chosen == t.entries[0].solution);
}

TEST_CASE("threshold boundary is inclusive") {
    auto t = make_table({{1, 2, 3}});
    const std::vector<double> in{1, 2, 4};
    const double r = pearson(in, t.entries[0].pattern);
    t.magnitude_ratio = std::numeric_limits<double>::infinity();
    t.threshold = r;
    CHECK(match_pattern(t, in).hit);
    t.threshold = std::nextafter(r, 2.0);
    CHECK_FALSE(match_pattern(t, in).hit);
}

TEST_CASE("magnitude guard rejects a same-shaped but much larger period") {
    const auto t = make_table({{10, 20, 30}, {30, 10, 20}});
    const std::vector<double> big{40, 80, 120};
    const auto m = match_pattern(t, big);
    CHECK_FALSE(m.hit);
    CHECK_FALSE(m.magnitude_ok);
    CHECK_FALSE(m.chosen);
    CHECK(m.best_index == 0);
    const auto near = match_pattern(t, std::vector<double>{12, 24, 36});
    CHECK(near.hit);
    CHECK(near.magnitude_ok);
}

TEST_CASE("argmax is taken among entries that pass the guard") {
    // entry 0 has the perfect shape but the wrong size; entry 1 is close in both
    const auto t = make_table({{1, 2, 3}, {11, 19, 31}});
    const auto m = match_pattern(t, std::vector<double>{10, 20, 30});
    CHECK(m.best_index == 1);
    CHECK(m.hit);
    CHECK(m.score < 1.0);
}

TEST_CASE("raising the threshold never turns a miss into a hit") {
    Rng rng(3);
    auto t = make_table({{10, 50, 20, 40}, {60, 10, 30, 30}, {20, 20, 60, 10}});
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> in(4);
        for (auto& v : in) v = 5.0 + 60.0 * rng.uniform01();
        bool was_hit = true;
        for (double th = -0.9; th <= 1.0; th += 0.1) {
            t.threshold = th;
            const bool hit = match_pattern(t, in).hit;
            CHECK((hit <= was_hit));
            was_hit = hit;
        }
    }
}

TEST_CASE("euclidean mode") {
    const auto t = make_table({{0, 0}, {100, 0}}, Similarity::euclidean);
    CHECK(t.threshold == doctest::Approx(25.0));
    auto m = match_pattern(t, std::vector<double>{90, 5});
    CHECK(m.best_index == 1);
    CHECK(m.hit);
    CHECK(m.score == doctest::Approx(std::sqrt(125.0)));
    m = match_pattern(t, std::vector<double>{50, 0});
    CHECK(m.best_index == 0);
    CHECK_FALSE(m.hit);
    CHECK(default_euclidean_threshold({{3, 4}}) == doctest::Approx(1.25));
}

TEST_CASE("width mismatch is a fingerprint error") {
    const auto t = make_table({{1, 2, 3}});
    CHECK_THROWS_AS(match_pattern(t, std::vector<double>{1, 2}), FingerprintMismatch);
}

TEST_CASE("fingerprint binds both catalogs") {
    const auto t = make_table({{1, 2, 3}});
    CHECK_NOTHROW(require_fingerprint(t, t.services, t.vm_types));
    auto vms = t.vm_types;
    vms[0].hourly_cost = 1.01;
    CHECK_THROWS_AS(require_fingerprint(t, t.services, vms), FingerprintMismatch);
    const ServiceCatalog other({{1.0}, {1.0}, {2.0}});
    CHECK_THROWS_AS(require_fingerprint(t, other, t.vm_types), FingerprintMismatch);
    CHECK(catalog_fingerprint(t.services, t.vm_types).size() == 16);
}

TEST_CASE("miss buffer") {
    MissBuffer b(3);
    CHECK_FALSE(b.record(DemandVector(1, 1)));
    CHECK_FALSE(b.record(DemandVector(1, 1)));
    CHECK(b.record(DemandVector(1, 1)));
    CHECK(b.due());
    CHECK(b.size() == 3);
    b.clear();
    CHECK(b.size() == 0);
    CHECK(MissBuffer().capacity() == 20);
    CHECK_THROWS_AS(MissBuffer(0), InvalidArgument);
}

TEST_CASE("table file round trip is lossless and byte stable") {
    auto t = make_table({{25.125, 60, 12, 32, 48}, {80, 10.0 / 3.0, 70, 20, 5}});
    t.created_at = "2024-01-02T03:04:05Z";
    const auto text = format_table(t);
    const auto back = parse_table(text);
    CHECK(back == t);
    CHECK(format_table(back) == text);
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc.at("version") == kTableVersion);
    CHECK(doc.at("entries").size() == 2);

    t.magnitude_ratio = std::numeric_limits<double>::infinity();
    const auto inf_text = format_table(t);
    CHECK(nlohmann::json::parse(inf_text).at("magnitude_ratio").is_null());
    CHECK(parse_table(inf_text) == t);

    const auto path = std::filesystem::temp_directory_path() / "packwise_table_test.json";
    save_table(t, path);
    CHECK(load_table(path) == t);
    std::filesystem::remove(path);
}

TEST_CASE("table parse errors") {
    const auto t = make_table({{1, 2, 3}});
    auto doc = nlohmann::json::parse(format_table(t));
    CHECK_THROWS_AS(parse_table("{"), ParseError);
    CHECK_THROWS_AS(parse_table("[]"), ParseError);

    auto wrong_version = doc;
    wrong_version["version"] = "packwise-table-v0";
    CHECK_THROWS_AS(parse_table(wrong_version.dump()), ParseError);

    auto tampered = doc;
    tampered["vm_types"][0]["hourly_cost"] = 9.0;
    CHECK_THROWS_AS(parse_table(tampered.dump()), ParseError);

    auto bad_cost = doc;
    bad_cost["entries"][0]["cost"] = 123.0;
    CHECK_THROWS_AS(parse_table(bad_cost.dump()), ParseError);

    auto unknown_type = doc;
    unknown_type["entries"][0]["instances"][0]["type_id"] = "nope";
    CHECK_THROWS_AS(parse_table(unknown_type.dump()), ParseError);
}

TEST_CASE("table validation") {
    auto t = make_table({{1, 2, 3}});
    CHECK_NOTHROW(validate_table(t));
    auto bad = t;
    bad.threshold = 1.5;
    CHECK_THROWS_AS(validate_table(bad), InvalidArgument);
    bad = t;
    bad.entries.clear();
    CHECK_THROWS_AS(validate_table(bad), InvalidArgument);
    bad = t;
    bad.entries[0].solution.instances.clear();
    CHECK_THROWS_AS(validate_table(bad), InvalidArgument);
    bad = t;
    bad.magnitude_ratio = 0.5;
    CHECK_THROWS_AS(validate_table(bad), InvalidArgument);
    CHECK(parse_similarity("euclidean") == Similarity::euclidean);
    CHECK_THROWS_AS(parse_similarity("cosine"), InvalidArgument);
}
