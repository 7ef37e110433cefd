// packwise command-line front end: gen, build, run, compare, inspect-table.
//
// Exit codes: 0 ok, 1 usage or input error, 2 build error, 3 fingerprint mismatch.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "packwise/engine.hpp"
#include "packwise/error.hpp"
#include "packwise/random.hpp"
#include "packwise/text.hpp"

namespace fs = std::filesystem;
using namespace packwise;

namespace {

constexpr int kUsage = 1;
constexpr int kBuild = 2;
constexpr int kFingerprint = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Tuning {
    std::uint64_t seed = 1;
    fs::path out = ".";

    std::size_t k_min = 2;
    std::size_t k_max = 15;
    std::size_t restarts = 10;

    std::size_t population = 80;
    std::size_t generations = 300;
    double crossover = 0.9;
    double mutation = 0.05;
    std::optional<std::size_t> max_instances;
    std::optional<double> penalty;
    bool no_greedy_seed = false;

    std::string similarity = "pearson";
    std::optional<double> threshold;
    std::string magnitude_ratio = "1.5";
    std::string sizing = "cluster-max";

    std::string fallback = "greedy";
    std::size_t buffer = 20;
    bool full_recluster = false;
    std::optional<fs::path> history;

    GaParams ga() const {
        GaParams p;
        p.population = population;
        p.generations = generations;
        p.crossover_rate = crossover;
        p.mutation_rate = mutation;
        p.max_instances = max_instances;
        p.penalty_weight = penalty;
        p.seed_greedy = !no_greedy_seed;
        p.seed = derive_seed(seed, 7);
        p.validate();
        return p;
    }

    KMeansOptions kmeans() const {
        if (restarts == 0) throw UsageError("--restarts must be positive");
        return {300, restarts};
    }

    double ratio() const {
        if (magnitude_ratio == "inf") return std::numeric_limits<double>::infinity();
        const auto v = text::parse_real(magnitude_ratio);
        if (!v || *v < 1.0) throw UsageError("--magnitude-ratio must be >= 1 or 'inf'");
        return *v;
    }
};

struct Inputs {
    fs::path trace;
    fs::path catalog;
    fs::path vms;
    fs::path table = "table.json";
};

/// created_at honours SOURCE_DATE_EPOCH so rebuilt tables stay byte-identical.
std::string created_at() {
    const char* env = std::getenv("SOURCE_DATE_EPOCH");
    if (!env) return "1970-01-01T00:00:00Z";
    const auto epoch = text::parse_int(env);
    if (!epoch || *epoch < 0) throw UsageError("SOURCE_DATE_EPOCH must be a nonnegative integer");
    const std::time_t t = static_cast<std::time_t>(*epoch);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

fs::path output(const Tuning& tuning, const fs::path& name) {
    fs::create_directories(tuning.out);
    return tuning.out / name;
}

void require_file(const fs::path& p, const char* what) {
    if (p.empty()) throw UsageError(std::string("missing --") + what);
    if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " file '" + p.string() + "' does not exist");
}

struct GenArgs {
    std::size_t services = 5;
    std::size_t periods = 100;
    std::size_t modes = 10;
    std::optional<double> sigma;
    double center_min = 10;
    double center_max = 100;
    double separation = 30;
    std::int64_t period_seconds = 600;
    std::size_t dimensions = 3;
    bool emit_catalogs = false;
    std::string name = "trace.csv";
    std::optional<fs::path> catalog;
    std::optional<std::uint64_t> noise_seed;
};

int cmd_gen(const Tuning& tuning, const GenArgs& a) {
    if (a.periods == 0) throw UsageError("--periods must be at least 1");
    if (a.services == 0 || a.modes == 0) throw UsageError("--services and --modes must be at least 1");
    if (a.period_seconds <= 0) throw UsageError("--period-seconds must be positive");

    ServiceCatalog catalog;
    if (a.catalog) {
        require_file(*a.catalog, "catalog");
        catalog = load_catalog(*a.catalog);
        if (catalog.services() != a.services)
            throw UsageError("catalog has " + std::to_string(catalog.services()) + " services, --services is " +
                             std::to_string(a.services));
    } else {
        catalog = random_catalog(a.services, a.dimensions, 0.01, 0.04, derive_seed(tuning.seed, 1));
    }

    SyntheticSpec spec;
    spec.mode_centers = random_mode_centers(a.services, a.modes, a.center_min, a.center_max, a.separation,
                                            derive_seed(tuning.seed, 2));
    double mean = 0;
    for (const auto& c : spec.mode_centers)
        for (double v : c) mean += v;
    mean /= static_cast<double>(a.services * a.modes);
    spec.noise_sigma = a.sigma.value_or(0.05 * mean);
    spec.periods = a.periods;
    spec.seed = a.noise_seed.value_or(derive_seed(tuning.seed, 3));
    spec.period_seconds = a.period_seconds;

    const auto trace = generate_trace(spec, catalog);
    save_trace(trace, output(tuning, a.name));
    if (a.emit_catalogs) {
        save_catalog(catalog, output(tuning, "catalog.csv"));
        save_vm_catalog(default_vm_catalog(), output(tuning, "vms.csv"));
    }
    std::cout << "wrote " << trace.size() << " periods x " << trace.services << " services to "
              << (tuning.out / a.name).string() << " (sigma " << text::sig6(spec.noise_sigma) << ")\n";
    return 0;
}

struct LoadedInputs {
    ServiceCatalog catalog;
    VmCatalog vms;
    WorkloadTrace trace;
};

LoadedInputs load_inputs(const Inputs& in) {
    require_file(in.catalog, "catalog");
    require_file(in.vms, "vms");
    require_file(in.trace, "trace");
    LoadedInputs out;
    out.catalog = load_catalog(in.catalog);
    out.vms = load_vm_catalog(in.vms);
    out.trace = load_trace(in.trace, out.catalog);
    return out;
}

int cmd_build(const Tuning& tuning, const Inputs& in, bool no_ahc, const std::string& linkage) {
    const auto loaded = load_inputs(in);
    BuildOptions options;
    options.k_min = tuning.k_min;
    options.k_max = tuning.k_max;
    options.seed = tuning.seed;
    options.kmeans = tuning.kmeans();
    options.ga = tuning.ga();
    options.similarity = parse_similarity(tuning.similarity);
    options.threshold = tuning.threshold;
    options.magnitude_ratio = tuning.ratio();
    options.sizing = parse_sizing(tuning.sizing);
    options.with_ahc = !no_ahc;
    options.linkage = parse_linkage(linkage);
    options.created_at = created_at();

    const auto result = build_offline(loaded.trace, loaded.catalog, loaded.vms, options);
    const auto& report = result.report;
    save_table(result.table, output(tuning, in.table));
    write_file(output(tuning, "offline_report.csv"), format_offline_report(report));
    write_file(output(tuning, "index_kmeans.csv"), format_index_table(report.kmeans_indices));
    write_file(output(tuning, "representatives.csv"), format_representatives(result.table));
    if (report.dendrogram) {
        write_file(output(tuning, "index_ahc.csv"), format_index_table(report.ahc_indices));
        write_file(output(tuning, "dendrogram.csv"), format_dendrogram(*report.dendrogram));
    }
    double total = 0;
    for (const auto& e : result.table.entries) total += e.solution.total_cost;
    std::cout << "k=" << report.best_k << ", " << result.table.entries.size() << " entries, table cost "
              << text::sig6(total) << " per period; clustering " << text::sig6(report.clustering_seconds)
              << " s, packing " << text::sig6(report.packing_seconds) << " s\n";
    return 0;
}

int cmd_run(const Tuning& tuning, const Inputs& in, const std::optional<std::string>& save_table_as) {
    const auto loaded = load_inputs(in);
    require_file(in.table, "table");
    auto table = load_table(in.table);

    OnlineOptions options;
    options.fallback = parse_fallback(tuning.fallback);
    if (tuning.buffer == 0) throw UsageError("--buffer must be positive");
    options.buffer_capacity = tuning.buffer;
    options.full_recluster = tuning.full_recluster;
    if (tuning.full_recluster) {
        if (!tuning.history) throw UsageError("--full-recluster needs --history <training trace>");
        require_file(*tuning.history, "history");
        options.history = demand_series(load_trace(*tuning.history, loaded.catalog), loaded.catalog);
    }
    options.k_min = tuning.k_min;
    options.k_max = tuning.k_max;
    options.ga = tuning.ga();
    options.kmeans = tuning.kmeans();
    options.sizing = parse_sizing(tuning.sizing);
    options.seed = tuning.seed;

    const auto result = run_online(std::move(table), loaded.trace, loaded.catalog, loaded.vms, options);
    write_file(output(tuning, "simulation.csv"), format_simulation(result.report));
    write_file(output(tuning, "simulation_summary.csv"), format_simulation_summary(result.report));
    if (save_table_as) save_table(result.table, output(tuning, *save_table_as));
    const auto& r = result.report;
    std::cout << r.records.size() << " periods, hit rate " << text::sig6(r.hit_rate) << ", total cost "
              << text::sig6(r.total_cost) << ", " << r.recluster_events << " re-cluster events, live violation rate "
              << text::sig6(r.live_violation_rate) << "\n";
    return 0;
}

int cmd_compare(const Tuning& tuning, const Inputs& in) {
    const auto loaded = load_inputs(in);
    if (loaded.trace.empty()) throw UsageError("compare needs a trace with at least one period");
    require_file(in.table, "table");
    const auto table = load_table(in.table);
    const auto c = evaluate_methods(loaded.trace, loaded.catalog, loaded.vms, table, tuning.ga());
    write_file(output(tuning, "comparison.csv"), format_comparison(c));
    std::cout << "totals: pipeline " << text::sig6(c.totals.pipeline) << ", per-period GA "
              << text::sig6(c.totals.per_period_ga) << ", first fit " << text::sig6(c.totals.first_fit)
              << ", best fit " << text::sig6(c.totals.best_fit) << ", static peak " << text::sig6(c.totals.static_peak)
              << "\n";
    return 0;
}

int cmd_inspect(const fs::path& path, const std::optional<fs::path>& catalog, const std::optional<fs::path>& vms) {
    require_file(path, "table");
    const auto t = load_table(path);
    if (catalog || vms) {
        if (!catalog || !vms) throw UsageError("fingerprint check needs both --catalog and --vms");
        require_file(*catalog, "catalog");
        require_file(*vms, "vms");
        require_fingerprint(t, load_catalog(*catalog), load_vm_catalog(*vms));
    }
    std::cout << "version        " << kTableVersion << "\n"
              << "similarity     " << to_string(t.similarity) << "\n"
              << "threshold      " << text::sig6(t.threshold) << "\n"
              << "magnitude      " << text::sig6(t.magnitude_ratio) << "\n"
              << "fingerprint    " << t.fingerprint << "\n"
              << "created_at     " << t.created_at << "\n"
              << "period_seconds " << t.period_seconds << "\n"
              << "services       " << t.services.services() << " x " << t.services.dimensions() << " dims\n"
              << "vm types       " << t.vm_types.size() << "\n"
              << "entries        " << t.entries.size() << "\n";
    std::cout << format_representatives(t);
    return 0;
}

void add_inputs(CLI::App* cmd, Inputs& in, bool with_table) {
    cmd->add_option("--trace", in.trace, "Workload trace CSV")->required();
    cmd->add_option("--catalog", in.catalog, "Service unit-cost catalog CSV")->required();
    cmd->add_option("--vms", in.vms, "VM type catalog CSV")->required();
    if (with_table) cmd->add_option("--table", in.table, "Lookup table JSON")->required();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"packwise: demand-pattern lookup tables for VM provisioning"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value file of global options (flags override it)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.footer("Global options may also follow the subcommand.");

    Tuning tuning;
    app.add_option("--seed", tuning.seed, "Base random seed")->capture_default_str();
    app.add_option("--out", tuning.out, "Output directory")->capture_default_str();

    app.add_option("--k-min", tuning.k_min, "Smallest cluster count tried")->capture_default_str()->group("Clustering");
    app.add_option("--k-max", tuning.k_max, "Largest cluster count tried")->capture_default_str()->group("Clustering");
    app.add_option("--restarts", tuning.restarts, "k-means++ restarts per k")->capture_default_str()->group("Clustering");

    app.add_option("--population", tuning.population, "GA population size")->capture_default_str()->group("GA");
    app.add_option("--generations", tuning.generations, "GA generations")->capture_default_str()->group("GA");
    app.add_option("--crossover", tuning.crossover, "GA crossover rate")->capture_default_str()->group("GA");
    app.add_option("--mutation", tuning.mutation, "GA per-gene mutation rate")->capture_default_str()->group("GA");
    app.add_option("--max-instances", tuning.max_instances, "GA instance slots (default: derived)")->group("GA");
    app.add_option("--penalty", tuning.penalty, "GA penalty weight (default: 1e4 x max hourly cost)")->group("GA");
    app.add_flag("--no-greedy-seed", tuning.no_greedy_seed, "Do not seed the GA with greedy solutions")->group("GA");

    app.add_option("--similarity", tuning.similarity, "pearson or euclidean")
        ->check(CLI::IsMember({"pearson", "euclidean"}))
        ->capture_default_str()
        ->group("Matching");
    app.add_option("--threshold", tuning.threshold, "Hit threshold (pearson default 0.7)")->group("Matching");
    app.add_option("--magnitude-ratio", tuning.magnitude_ratio, "Pearson magnitude guard, or 'inf' to disable")
        ->capture_default_str()
        ->group("Matching");
    app.add_option("--sizing", tuning.sizing, "cluster-max or centroid")
        ->check(CLI::IsMember({"cluster-max", "centroid"}))
        ->capture_default_str()
        ->group("Matching");

    app.add_option("--fallback", tuning.fallback, "Miss policy: greedy or nearest")
        ->check(CLI::IsMember({"greedy", "nearest"}))
        ->capture_default_str()
        ->group("Online");
    app.add_option("--buffer", tuning.buffer, "Misses collected before re-clustering")->capture_default_str()->group("Online");
    app.add_flag("--full-recluster", tuning.full_recluster, "Re-cluster history and misses together")->group("Online");
    app.add_option("--history", tuning.history, "Training trace for --full-recluster")->group("Online");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic multi-mode workload trace");
    gen_cmd->add_option("--services", gen.services, "Number of services")->capture_default_str();
    gen_cmd->add_option("--periods", gen.periods, "Number of periods")->capture_default_str();
    gen_cmd->add_option("--modes", gen.modes, "Number of planted demand modes")->capture_default_str();
    gen_cmd->add_option("--sigma", gen.sigma, "Noise standard deviation (default 5% of mean center)");
    gen_cmd->add_option("--center-min", gen.center_min, "Smallest mode center count")->capture_default_str();
    gen_cmd->add_option("--center-max", gen.center_max, "Largest mode center count")->capture_default_str();
    gen_cmd->add_option("--separation", gen.separation, "Minimum distance between centers")->capture_default_str();
    gen_cmd->add_option("--period-seconds", gen.period_seconds, "Period length")->capture_default_str();
    gen_cmd->add_option("--dimensions", gen.dimensions, "Resource dimensions of a generated catalog")->capture_default_str();
    gen_cmd->add_option("--catalog", gen.catalog, "Use this service catalog instead of generating one");
    gen_cmd->add_option("--noise-seed", gen.noise_seed, "Seed of the per-period noise only (same modes, new periods)");
    gen_cmd->add_option("--name", gen.name, "Trace file name inside --out")->capture_default_str();
    gen_cmd->add_flag("--emit-catalogs", gen.emit_catalogs, "Also write catalog.csv and vms.csv");

    Inputs build_in;
    bool no_ahc = false;
    std::string linkage = "ward";
    auto* build_cmd = app.add_subcommand("build", "Cluster a training trace and build the lookup table");
    add_inputs(build_cmd, build_in, false);
    build_cmd->add_option("--table", build_in.table, "Table file name inside --out")->capture_default_str();
    build_cmd->add_flag("--no-ahc", no_ahc, "Skip the hierarchical clustering report");
    build_cmd->add_option("--linkage", linkage, "AHC linkage: ward, complete or average")
        ->check(CLI::IsMember({"ward", "complete", "average"}))
        ->capture_default_str();

    Inputs run_in;
    std::optional<std::string> save_as;
    auto* run_cmd = app.add_subcommand("run", "Replay a trace against a table");
    add_inputs(run_cmd, run_in, true);
    run_cmd->add_option("--save-table", save_as, "Write the table after re-clustering to this name inside --out");

    Inputs cmp_in;
    auto* cmp_cmd = app.add_subcommand("compare", "Per-period cost of the pipeline and the baselines");
    add_inputs(cmp_cmd, cmp_in, true);

    fs::path inspect_path;
    std::optional<fs::path> inspect_catalog, inspect_vms;
    auto* inspect_cmd = app.add_subcommand("inspect-table", "Summarize a table file");
    inspect_cmd->add_option("table", inspect_path, "Lookup table JSON")->required();
    inspect_cmd->add_option("--catalog", inspect_catalog, "Verify the fingerprint against this service catalog");
    inspect_cmd->add_option("--vms", inspect_vms, "Verify the fingerprint against this VM catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen_cmd) return cmd_gen(tuning, gen);
        if (*build_cmd) return cmd_build(tuning, build_in, no_ahc, linkage);
        if (*run_cmd) return cmd_run(tuning, run_in, save_as);
        if (*cmp_cmd) return cmd_compare(tuning, cmp_in);
        if (*inspect_cmd) return cmd_inspect(inspect_path, inspect_catalog, inspect_vms);
    } catch (const BuildError& e) {
        std::cerr << "build error: " << e.what() << "\n";
        return kBuild;
    } catch (const FingerprintMismatch& e) {
        std::cerr << "fingerprint mismatch: " << e.what() << "\n";
        return kFingerprint;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
