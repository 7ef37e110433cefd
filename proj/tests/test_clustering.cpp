#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "packwise/clustering.hpp"
#include "packwise/error.hpp"
#include "packwise/kernels.hpp"

using namespace packwise;

namespace {

std::vector<Pattern> scenario_patterns(std::uint64_t seed, std::size_t periods, std::vector<std::size_t>* modes = nullptr) {
    const auto sc = fixture::scenario(seed);
    const auto labeled = generate_labeled_trace(sc.spec(periods, derive_seed(seed, 3)), sc.catalog);
    if (modes) *modes = labeled.modes;
    return patterns_of(demand_series(labeled.trace, sc.catalog));
}

std::vector<Pattern> random_patterns(Rng& rng, std::size_t n, std::size_t dim) {
    std::vector<Pattern> out(n, Pattern(dim));
    for (auto& p : out)
        for (auto& v : p) v = 50.0 * rng.uniform01();
    return out;
}

// Naive agglomeration: recompute every inter-cluster distance from the
// members at every step and return the sorted merge heights.
std::vector<double> naive_heights(const std::vector<Pattern>& pts, Linkage linkage) {
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < pts.size(); ++i) clusters.push_back({i});
    auto dist = [&](std::size_t a, std::size_t b) { return euclidean_distance(pts[a], pts[b]); };
    auto link = [&](const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
        if (linkage == Linkage::complete) {
            double m = 0;
            for (auto i : x)
                for (auto j : y) m = std::max(m, dist(i, j));
            return m;
        }
        if (linkage == Linkage::average) {
            double s = 0;
            for (auto i : x)
                for (auto j : y) s += dist(i, j);
            return s / static_cast<double>(x.size() * y.size());
        }
        const std::size_t dim = pts[0].size();
        Pattern cx(dim, 0.0), cy(dim, 0.0);
        for (auto i : x)
            for (std::size_t t = 0; t < dim; ++t) cx[t] += pts[i][t] / static_cast<double>(x.size());
        for (auto j : y)
            for (std::size_t t = 0; t < dim; ++t) cy[t] += pts[j][t] / static_cast<double>(y.size());
        const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
        return std::sqrt(2.0 * nx * ny / (nx + ny)) * euclidean_distance(cx, cy);
    };
    std::vector<double> heights;
    while (clusters.size() > 1) {
        std::size_t ba = 0, bb = 1;
        double best = INFINITY;
        for (std::size_t a = 0; a < clusters.size(); ++a)
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                const double d = link(clusters[a], clusters[b]);
                if (d < best) {
                    best = d;
                    ba = a;
                    bb = b;
                }
            }
        heights.push_back(best);
        clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
    }
    std::sort(heights.begin(), heights.end());
    return heights;
}

}  // namespace

TEST_CASE("two well separated groups") {
    std::vector<Pattern> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({0.0 + 0.1 * i, 0.0});
    for (int i = 0; i < 10; ++i) pts.push_back({100.0 + 0.1 * i, 100.0});
    const auto m = kmeans(pts, 2, 7);
    CHECK(m.k == 2);
    for (int i = 1; i < 10; ++i) CHECK(m.assignments[i] == m.assignments[0]);
    for (int i = 11; i < 20; ++i) CHECK(m.assignments[i] == m.assignments[10]);
    CHECK(m.assignments[0] != m.assignments[10]);
    const auto h = ahc(pts, 2);
    for (int i = 0; i < 20; ++i) CHECK((h.model.assignments[i] == h.model.assignments[0]) == (i < 10));
}

TEST_CASE("k equal to n gives singleton clusters") {
    const std::vector<Pattern> pts{{1, 2}, {5, 1}, {9, 9}, {0, 7}};
    const auto m = kmeans(pts, 4, 1);
    CHECK(std::set<std::size_t>(m.assignments.begin(), m.assignments.end()).size() == 4);
    CHECK(m.objective_trace.back() == 0.0);
}

TEST_CASE("kmeans rejects impossible cluster counts") {
    const std::vector<Pattern> pts{{1}, {1}, {2}};
    CHECK_THROWS_AS(kmeans(pts, 3, 1), InvalidArgument);
    CHECK_THROWS_AS(kmeans(pts, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(kmeans({}, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(kmeans({{1, 2}, {3}}, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(ahc(pts, 4), InvalidArgument);
}

TEST_CASE("kmeans objective never increases") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto pts = random_patterns(rng, 30 + rng.uniform_index(70), 1 + rng.uniform_index(5));
        const auto m = kmeans(pts, 2 + rng.uniform_index(8), trial);
        REQUIRE_FALSE(m.objective_trace.empty());
        for (std::size_t i = 1; i < m.objective_trace.size(); ++i)
            CHECK(m.objective_trace[i] <= m.objective_trace[i - 1] * (1 + 1e-12));
    }
}

TEST_CASE("kmeans is invariant to input order") {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const auto pts = random_patterns(rng, 60, 3);
        const auto base = kmeans(pts, 5, 99);
        std::vector<std::size_t> perm(pts.size());
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
        std::vector<Pattern> shuffled;
        for (auto i : perm) shuffled.push_back(pts[i]);
        const auto other = kmeans(shuffled, 5, 99);
        CHECK(other.objective_trace.back() == doctest::Approx(base.objective_trace.back()).epsilon(1e-12));
        // the partition is the same up to label renaming
        for (std::size_t i = 0; i < perm.size(); ++i)
            for (std::size_t j = i + 1; j < perm.size(); ++j)
                CHECK((other.assignments[i] == other.assignments[j]) ==
                      (base.assignments[perm[i]] == base.assignments[perm[j]]));
    }
}

TEST_CASE("kmeans is deterministic and serial equals parallel") {
    const auto pts = scenario_patterns(4, 100);
    const auto a = kmeans(pts, 10, 3, {}, Exec::serial);
    const auto b = kmeans(pts, 10, 3, {}, Exec::parallel);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
    CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("kmeans never leaves a cluster empty") {
    // seven points stacked at the origin and a few outliers stress the repair path
    std::vector<Pattern> pts(7, Pattern{0.0, 0.0});
    pts.push_back({100, 0});
    pts.push_back({0, 100});
    pts.push_back({100, 100});
    pts.push_back({50, 50});
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto m = kmeans(pts, 5, seed);
        for (auto s : m.sizes()) CHECK(s > 0);
    }
}

TEST_CASE("kmeans recovers planted modes") {
    std::vector<std::size_t> modes;
    const auto pts = scenario_patterns(9, 200, &modes);
    const auto m = kmeans(pts, 10, 1);
    CHECK(oracle::agreement(m.assignments, modes) >= 0.95);
}

TEST_CASE("AHC merge heights match a naive agglomeration") {
    Rng rng(31);
    for (auto linkage : {Linkage::ward, Linkage::complete, Linkage::average}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto pts = random_patterns(rng, 8 + rng.uniform_index(20), 1 + rng.uniform_index(3));
            const auto res = ahc(pts, 2, linkage);
            std::vector<double> heights;
            for (const auto& m : res.dendrogram.merges) heights.push_back(m.distance);
            std::sort(heights.begin(), heights.end());
            const auto expect = naive_heights(pts, linkage);
            REQUIRE(heights.size() == expect.size());
            for (std::size_t i = 0; i < heights.size(); ++i) CHECK(heights[i] == doctest::Approx(expect[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("dendrogram structure and monotone heights") {
    Rng rng(2);
    const auto pts = random_patterns(rng, 50, 4);
    for (auto linkage : {Linkage::ward, Linkage::complete, Linkage::average}) {
        const auto res = ahc(pts, 5, linkage);
        const auto& merges = res.dendrogram.merges;
        REQUIRE(merges.size() == 49);
        std::vector<std::size_t> sizes(50, 1);
        std::set<std::size_t> used;
        for (std::size_t i = 0; i < merges.size(); ++i) {
            const auto& m = merges[i];
            CHECK(m.a < 50 + i);
            CHECK(m.b < 50 + i);
            CHECK(used.insert(m.a).second);
            CHECK(used.insert(m.b).second);
            CHECK(m.size == sizes[m.a] + sizes[m.b]);
            sizes.push_back(m.size);
            if (i) CHECK(m.distance >= merges[i - 1].distance - 1e-9);
        }
        CHECK(merges.back().size == 50);
        CHECK(res.model.k == 5);
        const auto labels = res.dendrogram.cut(5);
        CHECK(labels == res.model.assignments);
        CHECK(std::set<std::size_t>(labels.begin(), labels.end()).size() == 5);
        CHECK(res.dendrogram.cut(50).size() == 50);
        const auto one = res.dendrogram.cut(1);
        CHECK(std::set<std::size_t>(one.begin(), one.end()).size() == 1);
    }
    CHECK(ahc(pts, 3, Linkage::ward, Exec::serial).dendrogram.merges.size() == 49);
}

TEST_CASE("AHC serial and parallel agree") {
    const auto pts = scenario_patterns(1, 80);
    const auto a = ahc(pts, 10, Linkage::ward, Exec::serial);
    const auto b = ahc(pts, 10, Linkage::ward, Exec::parallel);
    CHECK(a.model.assignments == b.model.assignments);
    REQUIRE(a.dendrogram.merges.size() == b.dendrogram.merges.size());
    for (std::size_t i = 0; i < a.dendrogram.merges.size(); ++i) {
        CHECK(a.dendrogram.merges[i].a == b.dendrogram.merges[i].a);
        CHECK(a.dendrogram.merges[i].distance == b.dendrogram.merges[i].distance);
    }
}

TEST_CASE("hand-computed validity indices") {
    const std::vector<Pattern> pts{{0}, {2}, {10}, {12}};
    auto m = model_from_labels(pts, {0, 0, 1, 1}, 2, ClusterMethod::kmeans);
    CHECK(m.centroids == std::vector<Pattern>{{1}, {11}});
    // scatter 1 and 1, centroid separation 10
    CHECK(davies_bouldin(m, pts) == doctest::Approx(0.2));
    // closest cross pair 2..10, largest diameter 2
    CHECK(dunn(m, pts) == doctest::Approx(4.0));
    score(m, pts);
    CHECK(*m.db_index == doctest::Approx(0.2));
    CHECK(*m.dunn_index == doctest::Approx(4.0));

    const std::vector<Pattern> points{{0}, {5}};
    const auto singletons = model_from_labels(points, {0, 1}, 2, ClusterMethod::ahc);
    CHECK(std::isinf(dunn(singletons, points)));
    CHECK(davies_bouldin(singletons, points) == 0.0);
}

TEST_CASE("validity index errors") {
    const std::vector<Pattern> pts{{1}, {1}, {3}};
    CHECK_THROWS_AS(davies_bouldin(model_from_labels(pts, {0, 0, 0}, 1, ClusterMethod::kmeans), pts), InvalidArgument);
    CHECK_THROWS_AS(model_from_labels(pts, {0, 0, 0}, 2, ClusterMethod::kmeans), InvalidArgument);
    CHECK_THROWS_AS(model_from_labels(pts, {0, 2, 0}, 2, ClusterMethod::kmeans), InvalidArgument);
    const std::vector<Pattern> twin{{1}, {1}, {1}, {1}};
    CHECK_THROWS_AS(davies_bouldin(model_from_labels(twin, {0, 0, 1, 1}, 2, ClusterMethod::kmeans), twin), DegenerateModel);
}

TEST_CASE("select_k finds the planted count") {
    const auto pts = scenario_patterns(17, 100);
    const auto sel = select_k(pts, 2, 15, 17);
    CHECK(sel.best_k == 10);
    REQUIRE(sel.table.size() == 14);
    for (std::size_t i = 0; i < sel.table.size(); ++i) CHECK(sel.table[i].k == 2 + i);
    CHECK(sel.best_model.k == 10);
    const auto serial = select_k(pts, 2, 15, 17, {}, Exec::serial);
    CHECK(serial.best_model.assignments == sel.best_model.assignments);
    CHECK(format_index_table(serial.table) == format_index_table(sel.table));
}

TEST_CASE("select_k is unchanged by duplicating every pattern") {
    const auto pts = scenario_patterns(23, 100);
    auto doubled = pts;
    doubled.insert(doubled.end(), pts.begin(), pts.end());
    CHECK(select_k(doubled, 2, 15, 23).best_k == select_k(pts, 2, 15, 23).best_k);
}

TEST_CASE("select_k input errors") {
    const std::vector<Pattern> same(20, Pattern{3.0, 3.0});
    CHECK_THROWS_AS(select_k(same, 2, 5, 1), DegenerateModel);
    const std::vector<Pattern> few{{1}, {2}, {3}};
    CHECK_THROWS_AS(select_k(few, 2, 3, 1), InvalidArgument);
    CHECK_THROWS_AS(select_k(few, 3, 2, 1), InvalidArgument);
    CHECK_THROWS_AS(select_k(few, 1, 2, 1), InvalidArgument);
}

TEST_CASE("table formats") {
    CHECK(format_index_table({{2, 0.5, 1.25}}) == "k,davies_bouldin,dunn\n2,0.5,1.25\n");
    Dendrogram d{2, {{0, 1, 3.0, 2}}};
    CHECK(format_dendrogram(d) == "step,cluster_a,cluster_b,distance,size\n0,0,1,3,2\n");
    CHECK(parse_linkage("ward") == Linkage::ward);
    CHECK(std::string(to_string(Linkage::average)) == "average");
    CHECK_THROWS_AS(parse_linkage("single"), InvalidArgument);
}
