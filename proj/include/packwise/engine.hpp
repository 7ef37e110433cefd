#pragma once

#include <optional>
#include <string>
#include <vector>

#include "packwise/clustering.hpp"
#include "packwise/lookup.hpp"
#include "packwise/packing.hpp"
#include "packwise/workload.hpp"

namespace packwise {

/// Which demand a representative's configuration is packed for: the
/// entrywise maximum over its members (worst case) or the member mean.
enum class Sizing { cluster_max, centroid };
enum class Fallback { greedy, nearest };

const char* to_string(Sizing sizing);
Sizing parse_sizing(const std::string& name);
const char* to_string(Fallback fallback);
Fallback parse_fallback(const std::string& name);

struct BuildOptions {
    std::size_t k_min = 2;
    std::size_t k_max = 15;
    std::uint64_t seed = 1;
    KMeansOptions kmeans;
    GaParams ga;
    Similarity similarity = Similarity::pearson;
    std::optional<double> threshold;  ///< default 0.7 (pearson) or derived distance (euclidean)
    double magnitude_ratio = 1.5;
    Sizing sizing = Sizing::cluster_max;
    bool with_ahc = true;
    Linkage linkage = Linkage::ward;
    std::string created_at = "1970-01-01T00:00:00Z";
};

struct RepresentativeRow {
    std::size_t index = 0;
    std::size_t members = 0;
    double ga_cost = 0.0;
    std::size_t ga_instances = 0;
    double first_fit_cost = 0.0;
    bool first_fit_feasible = true;
    double best_fit_cost = 0.0;
    bool best_fit_feasible = true;
    std::optional<double> brute_force_cost;  ///< only for S <= 4
};

struct OfflineReport {
    std::size_t best_k = 0;
    std::vector<KScore> kmeans_indices;
    std::vector<KScore> ahc_indices;
    std::optional<Dendrogram> dendrogram;
    std::vector<RepresentativeRow> representatives;
    double clustering_seconds = 0.0;
    double packing_seconds = 0.0;
};

struct OfflineResult {
    LookupTable table;
    OfflineReport report;
};

/// Demand series, k selection, k-means, one GA packing per representative,
/// table assembly. Throws BuildError on degenerate clustering, too few
/// periods, or an infeasible representative.
OfflineResult build_offline(const WorkloadTrace& trace, const ServiceCatalog& catalog, const VmCatalog& vms,
                            const BuildOptions& options, Exec exec = Exec::parallel);

/// Packs one entry per cluster of `members` and returns it (GA seeded per
/// cluster from `seed`). Clusters whose GA result is infeasible are skipped.
std::vector<LookupEntry> pack_representatives(const ClusterModel& model, const std::vector<DemandVector>& members,
                                              const VmCatalog& vms, const GaParams& ga, Sizing sizing,
                                              double period_hours, std::uint64_t seed,
                                              std::vector<RepresentativeRow>* rows = nullptr,
                                              std::vector<std::size_t>* infeasible = nullptr,
                                              Exec exec = Exec::parallel);

enum class ConfigSource { table, fallback, nearest };
const char* to_string(ConfigSource source);

struct OnlineOptions {
    Fallback fallback = Fallback::greedy;
    std::size_t buffer_capacity = 20;
    bool full_recluster = false;
    /// Demand history used as the base for full re-clustering.
    std::vector<DemandVector> history;
    std::size_t k_min = 2;
    std::size_t k_max = 15;
    GaParams ga;
    KMeansOptions kmeans;
    Sizing sizing = Sizing::cluster_max;
    std::uint64_t seed = 1;
};

struct PeriodRecord {
    std::size_t period = 0;
    std::size_t best_index = 0;
    double score = 0.0;
    bool hit = false;
    ConfigSource source = ConfigSource::table;
    std::size_t instances = 0;
    double cost = 0.0;
    bool live_feasible = true;  ///< configuration also satisfies this period's own demand
    bool reclustered = false;   ///< a re-cluster event fired after this period
};

struct SimulationReport {
    std::vector<PeriodRecord> records;
    std::size_t hits = 0;
    double hit_rate = 0.0;
    double total_cost = 0.0;
    std::size_t recluster_events = 0;
    double live_violation_rate = 0.0;
    std::size_t table_entries = 0;
};

struct OnlineResult {
    SimulationReport report;
    LookupTable table;  ///< the table after any re-cluster extensions
};

/// Replays the trace period by period: match, emit the table configuration
/// on a hit or the fallback on a miss, buffer misses, and extend the table
/// when the buffer fills.
OnlineResult run_online(LookupTable table, const WorkloadTrace& trace, const ServiceCatalog& catalog,
                        const VmCatalog& vms, const OnlineOptions& options);

struct ComparisonRow {
    std::size_t period = 0;
    double pipeline = 0.0;
    double per_period_ga = 0.0;
    double first_fit = 0.0;
    double best_fit = 0.0;
    double static_peak = 0.0;
    bool pipeline_hit = false;
    bool ga_feasible = true;
    bool first_fit_feasible = true;
    bool best_fit_feasible = true;
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    ComparisonRow totals;
    bool static_peak_feasible = true;
};

/// Per-period cost of the lookup pipeline (read-only table, best-fit on a
/// miss), a fresh GA run, first fit, best fit, and one static configuration
/// packed for the entrywise peak of the whole trace.
Comparison evaluate_methods(const WorkloadTrace& trace, const ServiceCatalog& catalog, const VmCatalog& vms,
                            const LookupTable& table, const GaParams& ga, Exec exec = Exec::parallel);

std::string format_offline_report(const OfflineReport& report);
std::string format_representatives(const LookupTable& table);
std::string format_simulation(const SimulationReport& report);
std::string format_simulation_summary(const SimulationReport& report);
std::string format_comparison(const Comparison& comparison);

}  // namespace packwise
