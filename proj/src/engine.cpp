#include "packwise/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>

#include "packwise/error.hpp"
#include "packwise/random.hpp"
#include "packwise/text.hpp"

namespace packwise {

const char* to_string(Sizing sizing) { return sizing == Sizing::cluster_max ? "cluster-max" : "centroid"; }

Sizing parse_sizing(const std::string& name) {
    if (name == "cluster-max") return Sizing::cluster_max;
    if (name == "centroid") return Sizing::centroid;
    throw InvalidArgument("unknown sizing '" + name + "'");
}

const char* to_string(Fallback fallback) { return fallback == Fallback::greedy ? "greedy" : "nearest"; }

Fallback parse_fallback(const std::string& name) {
    if (name == "greedy") return Fallback::greedy;
    if (name == "nearest") return Fallback::nearest;
    throw InvalidArgument("unknown fallback '" + name + "'");
}

const char* to_string(ConfigSource source) {
    switch (source) {
        case ConfigSource::table: return "table";
        case ConfigSource::fallback: return "fallback";
        case ConfigSource::nearest: return "nearest";
    }
    return "table";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<LookupEntry> pack_representatives(const ClusterModel& model, const std::vector<DemandVector>& members,
                                              const VmCatalog& vms, const GaParams& ga, Sizing sizing,
                                              double period_hours, std::uint64_t seed,
                                              std::vector<RepresentativeRow>* rows,
                                              std::vector<std::size_t>* infeasible, Exec exec) {
    const std::size_t k = model.k;
    std::vector<LookupEntry> entries(k);
    std::vector<RepresentativeRow> local_rows(k);
    std::vector<char> ok(k, 0);
    std::vector<std::exception_ptr> errors(k);

    auto one = [&](std::size_t c) {
        try {
            std::vector<DemandVector> group;
            for (auto i : model.members(c)) group.push_back(members[i]);
            const DemandVector target = sizing == Sizing::cluster_max ? max_demand(group) : mean_demand(group);
            GaParams params = ga;
            params.seed = derive_seed(seed, c);
            const auto solution = ga_pack(target, vms, params, period_hours, Exec::serial);
            const auto ff = first_fit_pack(target, vms, period_hours);
            const auto bf = best_fit_pack(target, vms, period_hours);

            auto& row = local_rows[c];
            row.index = c;
            row.members = group.size();
            row.ga_cost = solution.total_cost;
            row.ga_instances = solution.instances.size();
            row.first_fit_cost = ff.total_cost;
            row.first_fit_feasible = ff.feasible;
            row.best_fit_cost = bf.total_cost;
            row.best_fit_feasible = bf.feasible;
            if (target.services() <= 4) {
                const auto exact = brute_force_pack(target, vms, 3, period_hours);
                if (exact.feasible) row.brute_force_cost = exact.total_cost;
            }

            ok[c] = solution.feasible && check_feasibility(solution, target, vms).ok;
            entries[c] = LookupEntry{model.centroids[c], solution, target.per_dim_flat()};
        } catch (...) {
            errors[c] = std::current_exception();
        }
    };
    const auto n = static_cast<std::ptrdiff_t>(k);
    if (exec == Exec::serial) {
        for (std::ptrdiff_t c = 0; c < n; ++c) one(c);
    } else {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t c = 0; c < n; ++c) one(c);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<LookupEntry> out;
    for (std::size_t c = 0; c < k; ++c) {
        if (ok[c])
            out.push_back(std::move(entries[c]));
        else if (infeasible)
            infeasible->push_back(c);
    }
    if (rows) *rows = std::move(local_rows);
    return out;
}

OfflineResult build_offline(const WorkloadTrace& trace, const ServiceCatalog& catalog, const VmCatalog& vms,
                            const BuildOptions& options, Exec exec) {
    if (trace.services != catalog.services())
        throw BuildError("trace has " + std::to_string(trace.services) + " services, catalog has " +
                         std::to_string(catalog.services()));
    if (trace.size() < options.k_max + 1)
        throw BuildError("trace has " + std::to_string(trace.size()) + " periods; k up to " +
                         std::to_string(options.k_max) + " needs at least " + std::to_string(options.k_max + 1));
    try {
        validate_vm_catalog(vms, catalog.dimensions());
        options.ga.validate();
    } catch (const InvalidArgument& e) {
        throw BuildError(e.what());
    }

    OfflineResult result;
    auto& report = result.report;
    const auto series = demand_series(trace, catalog, exec);
    const auto patterns = patterns_of(series);

    const auto cluster_start = Clock::now();
    KSelection selection;
    try {
        selection = select_k(patterns, options.k_min, options.k_max, options.seed, options.kmeans, exec);
    } catch (const DegenerateModel& e) {
        throw BuildError(std::string("degenerate clustering: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw BuildError(std::string("clustering failed: ") + e.what());
    }
    report.best_k = selection.best_k;
    report.kmeans_indices = selection.table;
    if (options.with_ahc) {
        try {
            auto tree = ahc(patterns, options.k_min, options.linkage, exec);
            for (std::size_t k = options.k_min; k <= options.k_max; ++k) {
                auto model = model_from_labels(patterns, tree.dendrogram.cut(k), k, ClusterMethod::ahc);
                report.ahc_indices.push_back({k, davies_bouldin(model, patterns), dunn(model, patterns, exec)});
            }
            report.dendrogram = std::move(tree.dendrogram);
        } catch (const Error& e) {
            throw BuildError(std::string("hierarchical clustering failed: ") + e.what());
        }
    }
    report.clustering_seconds = seconds_since(cluster_start);

    const auto pack_start = Clock::now();
    std::vector<std::size_t> infeasible;
    auto entries = pack_representatives(selection.best_model, series, vms, options.ga, options.sizing,
                                        trace.period_hours(), options.ga.seed, &report.representatives, &infeasible,
                                        exec);
    report.packing_seconds = seconds_since(pack_start);
    if (!infeasible.empty()) {
        std::string where;
        for (auto c : infeasible) {
            where += (where.empty() ? "" : ", ") + std::to_string(c) + " [";
            for (std::size_t s = 0; s < selection.best_model.centroids[c].size(); ++s)
                where += (s ? "," : "") + text::sig6(selection.best_model.centroids[c][s]);
            where += "]";
        }
        throw BuildError("no feasible packing found for representative " + where);
    }

    auto& table = result.table;
    table.services = catalog;
    table.vm_types = vms;
    table.period_seconds = trace.period_seconds;
    table.entries = std::move(entries);
    table.similarity = options.similarity;
    table.magnitude_ratio = options.magnitude_ratio;
    table.created_at = options.created_at;
    table.fingerprint = catalog_fingerprint(catalog, vms);
    if (options.threshold) {
        table.threshold = *options.threshold;
    } else if (options.similarity == Similarity::pearson) {
        table.threshold = 0.7;
    } else {
        table.threshold = default_euclidean_threshold(selection.best_model.centroids);
    }
    try {
        validate_table(table);
    } catch (const InvalidArgument& e) {
        throw BuildError(e.what());
    }
    return result;
}

namespace {

void recluster_incremental(LookupTable& table, const MissBuffer& buffer, const OnlineOptions& options,
                           std::size_t event) {
    const auto patterns = patterns_of(buffer.items());
    const std::size_t wanted = (patterns.size() + 9) / 10;
    const std::size_t k = std::max<std::size_t>(1, std::min(wanted, distinct_count(patterns)));
    const auto model = kmeans(patterns, k, derive_seed(options.seed, event), options.kmeans);
    auto entries = pack_representatives(model, buffer.items(), table.vm_types, options.ga, options.sizing,
                                        table.period_hours(), derive_seed(options.ga.seed, 1000 + event));
    for (auto& e : entries) table.entries.push_back(std::move(e));
}

void recluster_full(LookupTable& table, std::vector<DemandVector>& history, const MissBuffer& buffer,
                    const OnlineOptions& options, std::size_t event) {
    history.insert(history.end(), buffer.items().begin(), buffer.items().end());
    const auto patterns = patterns_of(history);
    const std::size_t k_max = std::min(options.k_max, patterns.size() - 1);
    const auto selection = select_k(patterns, std::min(options.k_min, k_max), k_max,
                                    derive_seed(options.seed, event), options.kmeans);
    auto entries = pack_representatives(selection.best_model, history, table.vm_types, options.ga, options.sizing,
                                        table.period_hours(), derive_seed(options.ga.seed, 1000 + event));
    if (!entries.empty()) table.entries = std::move(entries);
}

}  // namespace

OnlineResult run_online(LookupTable table, const WorkloadTrace& trace, const ServiceCatalog& catalog,
                        const VmCatalog& vms, const OnlineOptions& options) {
    require_fingerprint(table, catalog, vms);
    if (!trace.empty() && trace.services != catalog.services())
        throw FingerprintMismatch("trace width does not match the table's service count");
    if (options.full_recluster && options.history.empty())
        throw InvalidArgument("full re-clustering needs the training demand history");

    OnlineResult result;
    auto& report = result.report;
    MissBuffer buffer(options.buffer_capacity);
    std::vector<DemandVector> history = options.history;
    const double hours = table.period_hours();
    std::size_t live_violations = 0;

    for (std::size_t t = 0; t < trace.size(); ++t) {
        const auto demand = demand_for_period(trace.periods[t], catalog);
        const auto m = match(table, demand);
        PeriodRecord rec;
        rec.period = t;
        rec.best_index = m.best_index;
        rec.score = m.score;
        rec.hit = m.hit;

        PackingSolution chosen;
        if (m.hit) {
            chosen = *m.chosen;
            rec.source = ConfigSource::table;
        } else if (options.fallback == Fallback::nearest) {
            chosen = table.entries[m.best_index].solution;
            rec.source = ConfigSource::nearest;
        } else {
            chosen = best_fit_pack(demand, vms, hours);
            rec.source = ConfigSource::fallback;
        }
        rec.instances = chosen.instances.size();
        rec.cost = chosen.total_cost;
        rec.live_feasible = check_feasibility(chosen, demand, vms).ok;
        if (!rec.live_feasible) ++live_violations;
        if (m.hit) ++report.hits;
        report.total_cost += rec.cost;

        if (!m.hit && buffer.record(demand)) {
            const std::size_t event = report.recluster_events++;
            if (options.full_recluster)
                recluster_full(table, history, buffer, options, event);
            else
                recluster_incremental(table, buffer, options, event);
            buffer.clear();
            rec.reclustered = true;
        }
        report.records.push_back(rec);
    }
    if (!trace.empty()) {
        report.hit_rate = static_cast<double>(report.hits) / static_cast<double>(trace.size());
        report.live_violation_rate = static_cast<double>(live_violations) / static_cast<double>(trace.size());
    }
    report.table_entries = table.entries.size();
    result.table = std::move(table);
    return result;
}

Comparison evaluate_methods(const WorkloadTrace& trace, const ServiceCatalog& catalog, const VmCatalog& vms,
                            const LookupTable& table, const GaParams& ga, Exec exec) {
    require_fingerprint(table, catalog, vms);
    const auto series = demand_series(trace, catalog, exec);
    const double hours = trace.period_hours();

    Comparison out;
    GaParams peak_params = ga;
    peak_params.seed = derive_seed(ga.seed, trace.size());
    const auto peak = ga_pack(max_demand(series), vms, peak_params, hours, exec);
    out.static_peak_feasible = peak.feasible;

    out.rows.resize(series.size());
    std::vector<std::exception_ptr> errors(series.size());
    auto one = [&](std::size_t t) {
        try {
            auto& row = out.rows[t];
            row.period = t;
            const auto m = match(table, series[t]);
            row.pipeline_hit = m.hit;
            row.pipeline = m.hit ? m.chosen->total_cost : best_fit_pack(series[t], vms, hours).total_cost;
            GaParams params = ga;
            params.seed = derive_seed(ga.seed, t);
            const auto g = ga_pack(series[t], vms, params, hours, Exec::serial);
            row.per_period_ga = g.total_cost;
            row.ga_feasible = g.feasible;
            const auto ff = first_fit_pack(series[t], vms, hours);
            row.first_fit = ff.total_cost;
            row.first_fit_feasible = ff.feasible;
            const auto bf = best_fit_pack(series[t], vms, hours);
            row.best_fit = bf.total_cost;
            row.best_fit_feasible = bf.feasible;
            row.static_peak = peak.total_cost;
        } catch (...) {
            errors[t] = std::current_exception();
        }
    };
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    if (exec == Exec::serial) {
        for (std::ptrdiff_t t = 0; t < n; ++t) one(t);
    } else {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t t = 0; t < n; ++t) one(t);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (const auto& row : out.rows) {
        out.totals.pipeline += row.pipeline;
        out.totals.per_period_ga += row.per_period_ga;
        out.totals.first_fit += row.first_fit;
        out.totals.best_fit += row.best_fit;
        out.totals.static_peak += row.static_peak;
    }
    return out;
}

std::string format_offline_report(const OfflineReport& report) {
    std::string out = "representative,members,ga_cost,ga_instances,first_fit_cost,best_fit_cost,brute_force_cost\n";
    for (const auto& r : report.representatives) {
        out += std::to_string(r.index) + "," + std::to_string(r.members) + "," + text::sig6(r.ga_cost) + "," +
               std::to_string(r.ga_instances) + "," + (r.first_fit_feasible ? text::sig6(r.first_fit_cost) : "infeasible") +
               "," + (r.best_fit_feasible ? text::sig6(r.best_fit_cost) : "infeasible") + "," +
               (r.brute_force_cost ? text::sig6(*r.brute_force_cost) : "") + "\n";
    }
    return out;
}

std::string format_representatives(const LookupTable& table) {
    std::string out = "entry";
    for (std::size_t s = 0; s < table.services.services(); ++s) out += ",s" + std::to_string(s);
    out += ",instances,cost\n";
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const auto& e = table.entries[i];
        out += std::to_string(i);
        for (double v : e.pattern) out += "," + text::sig6(v);
        out += "," + std::to_string(e.solution.instances.size()) + "," + text::sig6(e.solution.total_cost) + "\n";
    }
    return out;
}

std::string format_simulation(const SimulationReport& report) {
    std::string out = "period,best_index,score,hit,source,instances,cost,live_feasible,reclustered\n";
    for (const auto& r : report.records) {
        out += std::to_string(r.period) + "," + std::to_string(r.best_index) + "," + text::sig6(r.score) + "," +
               (r.hit ? "1" : "0") + "," + to_string(r.source) + "," + std::to_string(r.instances) + "," +
               text::sig6(r.cost) + "," + (r.live_feasible ? "1" : "0") + "," + (r.reclustered ? "1" : "0") + "\n";
    }
    return out;
}

std::string format_simulation_summary(const SimulationReport& report) {
    std::string out = "metric,value\n";
    out += "periods," + std::to_string(report.records.size()) + "\n";
    out += "hits," + std::to_string(report.hits) + "\n";
    out += "hit_rate," + text::sig6(report.hit_rate) + "\n";
    out += "total_cost," + text::sig6(report.total_cost) + "\n";
    out += "recluster_events," + std::to_string(report.recluster_events) + "\n";
    out += "live_violation_rate," + text::sig6(report.live_violation_rate) + "\n";
    out += "table_entries," + std::to_string(report.table_entries) + "\n";
    return out;
}

std::string format_comparison(const Comparison& comparison) {
    std::string out = "period,pipeline,per_period_ga,first_fit,best_fit,static_peak\n";
    auto line = [](const std::string& label, const ComparisonRow& r) {
        return label + "," + text::sig6(r.pipeline) + "," + text::sig6(r.per_period_ga) + "," + text::sig6(r.first_fit) +
               "," + text::sig6(r.best_fit) + "," + text::sig6(r.static_peak) + "\n";
    };
    for (const auto& r : comparison.rows) out += line(std::to_string(r.period), r);
    out += line("total", comparison.totals);
    return out;
}

}  // namespace packwise
