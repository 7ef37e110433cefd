#include "packwise/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "packwise/error.hpp"
#include "packwise/kernels.hpp"
#include "packwise/random.hpp"
#include "packwise/text.hpp"

namespace packwise {

std::vector<std::size_t> ClusterModel::sizes() const {
    std::vector<std::size_t> out(k, 0);
    for (auto a : assignments) ++out.at(a);
    return out;
}

std::vector<std::size_t> ClusterModel::members(std::size_t cluster) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == cluster) out.push_back(i);
    return out;
}

std::size_t distinct_count(const std::vector<Pattern>& patterns) {
    auto sorted = patterns;
    std::sort(sorted.begin(), sorted.end());
    return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

namespace {

void check_patterns(const std::vector<Pattern>& patterns, std::size_t k) {
    if (patterns.empty()) throw InvalidArgument("clustering needs at least one pattern");
    if (k == 0) throw InvalidArgument("cluster count must be positive");
    const std::size_t width = patterns[0].size();
    if (width == 0) throw InvalidArgument("patterns must be nonempty vectors");
    for (const auto& p : patterns)
        if (p.size() != width) throw InvalidArgument("patterns differ in length");
    const std::size_t distinct = distinct_count(patterns);
    if (k > distinct)
        throw InvalidArgument("cannot form " + std::to_string(k) + " clusters from " + std::to_string(distinct) +
                              " distinct patterns");
}

// Renumbers labels by first appearance.
std::vector<std::size_t> canonical_labels(const std::vector<std::size_t>& labels, std::size_t k) {
    std::vector<std::size_t> remap(k, k);
    std::size_t next = 0;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto& r = remap[labels[i]];
        if (r == k) r = next++;
        out[i] = r;
    }
    return out;
}

void update_centroids(const PointSet& points, const std::vector<std::size_t>& labels, PointSet& centroids) {
    const std::size_t k = centroids.size();
    const std::size_t dim = points.dim();
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = points.row(i);
        for (std::size_t j = 0; j < dim; ++j) sums[labels[i] * dim + j] += row[j];
        ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        auto out = centroids.row(c);
        for (std::size_t j = 0; j < dim; ++j) out[j] = sums[c * dim + j] / static_cast<double>(counts[c]);
    }
}

double objective(const PointSet& points, const std::vector<std::size_t>& labels, const PointSet& centroids) {
    double sse = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) sse += squared_distance(points.row(i), centroids.row(labels[i]));
    return sse;
}

PointSet plus_plus_init(const PointSet& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.size();
    const std::size_t dim = points.dim();
    std::vector<double> data;
    data.reserve(k * dim);
    const auto first = points.row(rng.uniform_index(n));
    data.insert(data.end(), first.begin(), first.end());
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), first);
    for (std::size_t c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = n;
        const double target = rng.uniform01() * total;
        double running = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) continue;
            running += d2[i];
            pick = i;
            if (running > target) break;
        }
        const auto row = points.row(pick);
        data.insert(data.end(), row.begin(), row.end());
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points.row(i), row));
    }
    return PointSet(dim, std::move(data));
}

struct LloydRun {
    PointSet centroids;
    std::vector<std::size_t> labels;
    std::vector<double> trace;
    std::size_t iterations = 0;
    double sse = 0.0;
};

LloydRun lloyd(const PointSet& points, std::size_t k, std::uint64_t seed, std::size_t max_iterations, Exec exec) {
    const std::size_t n = points.size();
    Rng rng(seed);
    LloydRun run;
    run.centroids = plus_plus_init(points, k, rng);
    run.labels.assign(n, k);
    std::vector<std::size_t> labels(n);
    std::vector<double> d2(n);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        assign_nearest(points, run.centroids, labels, d2, exec);

        std::vector<std::size_t> counts(k, 0);
        for (auto l : labels) ++counts[l];
        bool repaired = false;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            // reseed from the point farthest from its centroid in a cluster that can spare it
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i)
                if (counts[labels[i]] > 1 && (far == n || d2[i] > d2[far])) far = i;
            --counts[labels[far]];
            labels[far] = c;
            counts[c] = 1;
            d2[far] = 0.0;
            repaired = true;
        }

        const bool changed = repaired || labels != run.labels;
        run.labels = labels;
        run.iterations = iter + 1;
        if (!changed) break;
        update_centroids(points, run.labels, run.centroids);
        run.trace.push_back(objective(points, run.labels, run.centroids));
    }
    run.sse = objective(points, run.labels, run.centroids);
    return run;
}

}  // namespace

ClusterModel kmeans(const std::vector<Pattern>& patterns, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options, Exec exec) {
    check_patterns(patterns, k);
    const std::size_t n = patterns.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return patterns[a] < patterns[b]; });
    std::vector<Pattern> sorted;
    sorted.reserve(n);
    for (auto i : order) sorted.push_back(patterns[i]);
    const PointSet points(sorted);

    LloydRun best;
    const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
    for (std::size_t r = 0; r < restarts; ++r) {
        auto run = lloyd(points, k, derive_seed(seed, r), std::max<std::size_t>(1, options.max_iterations), exec);
        if (r == 0 || run.sse < best.sse) best = std::move(run);
    }

    const auto labels = canonical_labels(best.labels, k);
    ClusterModel model;
    model.k = k;
    model.method = ClusterMethod::kmeans;
    model.centroids.assign(k, Pattern(points.dim(), 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = best.centroids.row(best.labels[i]);
        model.centroids[labels[i]].assign(c.begin(), c.end());
    }
    model.assignments.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) model.assignments[order[i]] = labels[i];
    model.objective_trace = std::move(best.trace);
    model.iterations = best.iterations;
    return model;
}

ClusterModel model_from_labels(const std::vector<Pattern>& patterns, std::vector<std::size_t> labels, std::size_t k,
                               ClusterMethod method) {
    if (labels.size() != patterns.size()) throw InvalidArgument("one label per pattern required");
    ClusterModel model;
    model.k = k;
    model.method = method;
    const std::size_t dim = patterns.empty() ? 0 : patterns[0].size();
    model.centroids.assign(k, Pattern(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        if (labels[i] >= k) throw InvalidArgument("label out of range");
        for (std::size_t j = 0; j < dim; ++j) model.centroids[labels[i]][j] += patterns[i][j];
        ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) throw InvalidArgument("cluster " + std::to_string(c) + " is empty");
        for (auto& v : model.centroids[c]) v /= static_cast<double>(counts[c]);
    }
    model.assignments = std::move(labels);
    return model;
}

std::vector<std::size_t> Dendrogram::cut(std::size_t k) const {
    if (k == 0 || k > leaves) throw InvalidArgument("cannot cut " + std::to_string(leaves) + " leaves into " + std::to_string(k) + " clusters");
    // union-find over leaf and merge ids
    std::vector<std::size_t> parent(leaves + merges.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t m = 0; m < leaves - k; ++m) {
        parent[find(merges[m].a)] = leaves + m;
        parent[find(merges[m].b)] = leaves + m;
    }
    std::vector<std::size_t> roots(leaves);
    for (std::size_t i = 0; i < leaves; ++i) roots[i] = find(i);
    std::vector<std::size_t> labels(leaves);
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; i < leaves; ++i) {
        const auto it = std::find(seen.begin(), seen.end(), roots[i]);
        labels[i] = static_cast<std::size_t>(it - seen.begin());
        if (it == seen.end()) seen.push_back(roots[i]);
    }
    return labels;
}

AhcResult ahc(const std::vector<Pattern>& patterns, std::size_t k, Linkage linkage, Exec exec) {
    check_patterns(patterns, k);
    const std::size_t n = patterns.size();
    const PointSet points(patterns);
    std::vector<double> dist = pairwise_distances(points, exec);
    // ward works on squared distances
    if (linkage == Linkage::ward)
        for (auto& v : dist) v *= v;

    std::vector<std::size_t> size(n, 1), id(n);
    std::iota(id.begin(), id.end(), 0);
    std::vector<char> active(n, 1);

    Dendrogram tree;
    tree.leaves = n;
    const auto rows = static_cast<std::ptrdiff_t>(n);
    std::vector<double> row_best(n);
    std::vector<std::size_t> row_arg(n);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        auto scan_row = [&](std::ptrdiff_t i) {
            row_best[i] = std::numeric_limits<double>::infinity();
            row_arg[i] = n;
            if (!active[i]) return;
            for (std::size_t j = i + 1; j < n; ++j)
                if (active[j] && dist[i * n + j] < row_best[i]) {
                    row_best[i] = dist[i * n + j];
                    row_arg[i] = j;
                }
        };
        if (exec == Exec::serial) {
            for (std::ptrdiff_t i = 0; i < rows; ++i) scan_row(i);
        } else {
#pragma omp parallel for schedule(dynamic, 8)
            for (std::ptrdiff_t i = 0; i < rows; ++i) scan_row(i);
        }
        std::size_t bi = n;
        for (std::size_t i = 0; i < n; ++i)
            if (row_arg[i] != n && (bi == n || row_best[i] < row_best[bi])) bi = i;
        const std::size_t bj = row_arg[bi];
        const double dij = dist[bi * n + bj];

        const double ni = static_cast<double>(size[bi]);
        const double nj = static_cast<double>(size[bj]);
        for (std::size_t m = 0; m < n; ++m) {
            if (!active[m] || m == bi || m == bj) continue;
            const double dim_ = dist[m * n + bi];
            const double djm = dist[m * n + bj];
            const double nm = static_cast<double>(size[m]);
            double merged = 0.0;
            switch (linkage) {
                case Linkage::complete: merged = std::max(dim_, djm); break;
                case Linkage::average: merged = (ni * dim_ + nj * djm) / (ni + nj); break;
                case Linkage::ward: merged = ((ni + nm) * dim_ + (nj + nm) * djm - nm * dij) / (ni + nj + nm); break;
            }
            dist[m * n + bi] = dist[bi * n + m] = merged;
        }
        tree.merges.push_back({std::min(id[bi], id[bj]), std::max(id[bi], id[bj]),
                               linkage == Linkage::ward ? std::sqrt(std::max(0.0, dij)) : dij, size[bi] + size[bj]});
        size[bi] += size[bj];
        id[bi] = n + step;
        active[bj] = 0;
    }

    AhcResult result;
    result.model = model_from_labels(patterns, tree.cut(k), k, ClusterMethod::ahc);
    result.dendrogram = std::move(tree);
    return result;
}

namespace {

void check_scored(const ClusterModel& model, const std::vector<Pattern>& patterns) {
    if (model.k < 2) throw InvalidArgument("cluster validity indices need k >= 2");
    if (model.assignments.size() != patterns.size()) throw InvalidArgument("model and patterns differ in size");
    for (auto s : model.sizes())
        if (s == 0) throw InvalidArgument("model has an empty cluster");
}

}  // namespace

double davies_bouldin(const ClusterModel& model, const std::vector<Pattern>& patterns) {
    check_scored(model, patterns);
    const std::size_t k = model.k;
    std::vector<double> scatter(k, 0.0);
    const auto sizes = model.sizes();
    for (std::size_t i = 0; i < patterns.size(); ++i)
        scatter[model.assignments[i]] += euclidean_distance(patterns[i], model.centroids[model.assignments[i]]);
    for (std::size_t c = 0; c < k; ++c) scatter[c] /= static_cast<double>(sizes[c]);

    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double sep = euclidean_distance(model.centroids[i], model.centroids[j]);
            if (sep == 0.0)
                throw DegenerateModel("centroids " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
            worst = std::max(worst, (scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

double dunn(const ClusterModel& model, const std::vector<Pattern>& patterns, Exec exec) {
    check_scored(model, patterns);
    const std::size_t n = patterns.size();
    const auto dist = pairwise_distances(PointSet(patterns), exec);
    double separation = std::numeric_limits<double>::infinity();
    double diameter = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = dist[i * n + j];
            if (model.assignments[i] == model.assignments[j])
                diameter = std::max(diameter, d);
            else
                separation = std::min(separation, d);
        }
    if (diameter == 0.0) return std::numeric_limits<double>::infinity();
    return separation / diameter;
}

void score(ClusterModel& model, const std::vector<Pattern>& patterns) {
    model.db_index = davies_bouldin(model, patterns);
    model.dunn_index = dunn(model, patterns);
}

KSelection select_k(const std::vector<Pattern>& patterns, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                    const KMeansOptions& options, Exec exec) {
    if (k_min > k_max) throw InvalidArgument("empty cluster-count range");
    if (k_min < 2) throw InvalidArgument("cluster-count range must start at 2 or more");
    if (k_max + 1 > patterns.size())
        throw InvalidArgument("cluster-count range up to " + std::to_string(k_max) + " needs at least " +
                              std::to_string(k_max + 1) + " patterns, got " + std::to_string(patterns.size()));
    if (distinct_count(patterns) < 2) throw DegenerateModel("all patterns are identical; no cluster structure");

    const std::size_t count = k_max - k_min + 1;
    std::vector<ClusterModel> models(count);
    std::vector<std::exception_ptr> errors(count);
    auto run_one = [&](std::size_t idx) {
        try {
            const std::size_t k = k_min + idx;
            models[idx] = kmeans(patterns, k, seed + k, options, Exec::serial);
            score(models[idx], patterns);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    };
    const auto runs = static_cast<std::ptrdiff_t>(count);
    if (exec == Exec::serial) {
        for (std::ptrdiff_t i = 0; i < runs; ++i) run_one(i);
    } else {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < runs; ++i) run_one(i);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    KSelection out;
    std::size_t best = 0;
    for (std::size_t i = 0; i < count; ++i) {
        out.table.push_back({models[i].k, *models[i].db_index, *models[i].dunn_index});
        const auto& a = out.table[i];
        const auto& b = out.table[best];
        if (a.davies_bouldin < b.davies_bouldin || (a.davies_bouldin == b.davies_bouldin && a.dunn > b.dunn)) best = i;
    }
    out.best_k = models[best].k;
    out.best_model = std::move(models[best]);
    return out;
}

std::string format_index_table(const std::vector<KScore>& table) {
    std::string out = "k,davies_bouldin,dunn\n";
    for (const auto& row : table)
        out += std::to_string(row.k) + "," + text::sig6(row.davies_bouldin) + "," + text::sig6(row.dunn) + "\n";
    return out;
}

std::string format_dendrogram(const Dendrogram& dendrogram) {
    std::string out = "step,cluster_a,cluster_b,distance,size\n";
    for (std::size_t i = 0; i < dendrogram.merges.size(); ++i) {
        const auto& m = dendrogram.merges[i];
        out += std::to_string(i) + "," + std::to_string(m.a) + "," + std::to_string(m.b) + "," + text::sig6(m.distance) +
               "," + std::to_string(m.size) + "\n";
    }
    return out;
}

const char* to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
        case Linkage::ward: return "ward";
    }
    return "ward";
}

Linkage parse_linkage(const std::string& name) {
    if (name == "complete") return Linkage::complete;
    if (name == "average") return Linkage::average;
    if (name == "ward") return Linkage::ward;
    throw InvalidArgument("unknown linkage '" + name + "'");
}

}  // namespace packwise
