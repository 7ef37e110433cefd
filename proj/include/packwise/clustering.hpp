#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "packwise/demand.hpp"

namespace packwise {

using Pattern = std::vector<double>;

enum class ClusterMethod { kmeans, ahc };
enum class Linkage { complete, average, ward };

struct ClusterModel {
    std::size_t k = 0;
    std::vector<Pattern> centroids;
    /// Cluster index per input pattern, in input order.
    std::vector<std::size_t> assignments;
    std::optional<double> db_index;
    std::optional<double> dunn_index;
    ClusterMethod method = ClusterMethod::kmeans;
    /// K-means only: sum of squared member-to-centroid distances after every
    /// update step of the kept restart.
    std::vector<double> objective_trace;
    std::size_t iterations = 0;

    std::vector<std::size_t> sizes() const;
    std::vector<std::size_t> members(std::size_t cluster) const;
};

/// One agglomeration step. Leaves are 0..n-1; the cluster created by merge i
/// has id n+i.
struct Merge {
    std::size_t a = 0;
    std::size_t b = 0;
    double distance = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::size_t leaves = 0;
    std::vector<Merge> merges;

    /// Labels after applying the first n-k merges. Labels are numbered by
    /// first appearance in input order.
    std::vector<std::size_t> cut(std::size_t k) const;
};

struct KMeansOptions {
    std::size_t max_iterations = 300;
    /// Independent k-means++ starts; the lowest final objective is kept.
    std::size_t restarts = 10;
};

std::size_t distinct_count(const std::vector<Pattern>& patterns);

/// Lloyd iteration from seeded k-means++ starts. Inputs are sorted
/// lexicographically before seeding, so the result does not depend on input
/// order; labels are numbered by first appearance in that sorted order.
ClusterModel kmeans(const std::vector<Pattern>& patterns, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {}, Exec exec = Exec::parallel);

struct AhcResult {
    ClusterModel model;
    Dendrogram dendrogram;
};

/// Agglomerative clustering via Lance-Williams updates. Equal merge
/// distances break toward the lowest active pair.
AhcResult ahc(const std::vector<Pattern>& patterns, std::size_t k, Linkage linkage = Linkage::ward,
              Exec exec = Exec::parallel);

/// Model with the given labels and member-mean centroids.
ClusterModel model_from_labels(const std::vector<Pattern>& patterns, std::vector<std::size_t> labels, std::size_t k,
                               ClusterMethod method);

/// Mean over clusters of max_{j != i} (s_i + s_j) / d(c_i, c_j), where s is the
/// mean member-to-centroid distance. Lower is better.
double davies_bouldin(const ClusterModel& model, const std::vector<Pattern>& patterns);

/// Smallest distance between points of different clusters divided by the
/// largest within-cluster diameter. +inf when every cluster is a point.
double dunn(const ClusterModel& model, const std::vector<Pattern>& patterns, Exec exec = Exec::parallel);

/// Fills db_index and dunn_index.
void score(ClusterModel& model, const std::vector<Pattern>& patterns);

struct KScore {
    std::size_t k = 0;
    double davies_bouldin = 0.0;
    double dunn = 0.0;
};

struct KSelection {
    std::size_t best_k = 0;
    std::vector<KScore> table;
    ClusterModel best_model;
};

/// K-means for every k in [k_min, k_max] with seed + k, scored by both
/// indices. Best is the lowest Davies-Bouldin, then highest Dunn, then smaller k.
KSelection select_k(const std::vector<Pattern>& patterns, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                    const KMeansOptions& options = {}, Exec exec = Exec::parallel);

std::string format_index_table(const std::vector<KScore>& table);
std::string format_dendrogram(const Dendrogram& dendrogram);

const char* to_string(Linkage linkage);
Linkage parse_linkage(const std::string& name);

}  // namespace packwise
