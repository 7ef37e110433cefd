#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "packwise/demand.hpp"

namespace packwise {

struct VmType {
    std::string id;
    std::vector<double> capacity;  ///< resource units per dimension
    double hourly_cost = 0.0;

    bool operator==(const VmType&) const = default;
};

using VmCatalog = std::vector<VmType>;

/// Throws InvalidArgument unless the catalog is nonempty, ids are unique and
/// nonempty, every capacity has `dimensions` nonnegative entries with at least
/// one positive, and every hourly cost is positive.
void validate_vm_catalog(const VmCatalog& vms, std::size_t dimensions);

/// Lines of `id,cap_1,...,cap_d,hourly_cost`; '#' lines are comments.
VmCatalog parse_vm_catalog(const std::string& text);
VmCatalog load_vm_catalog(const std::filesystem::path& path);
std::string format_vm_catalog(const VmCatalog& vms);
void save_vm_catalog(const VmCatalog& vms, const std::filesystem::path& path);

/// One rented VM: an index into the VmCatalog and the 0/1 row marking which
/// services it hosts.
struct VmInstance {
    std::size_t type = 0;
    std::vector<std::uint8_t> assignment;

    bool operator==(const VmInstance&) const = default;
};

struct PackingSolution {
    std::vector<VmInstance> instances;
    double total_cost = 0.0;  ///< rental cost for one period
    bool feasible = true;
    double violation = 0.0;

    bool operator==(const PackingSolution&) const = default;
};

/// Absolute slack allowed when comparing a load with a capacity.
double capacity_tolerance(double capacity);

double solution_cost(const PackingSolution& solution, const VmCatalog& vms, double period_hours);

/// Drops instances that host no service.
PackingSolution prune(PackingSolution solution);

struct FeasibilityReport {
    bool ok = true;
    std::vector<std::size_t> uncovered;   ///< services with demand and no host
    double worst_overload = 0.0;          ///< largest load - capacity over all instances/dimensions
    std::string reason;
};

/// Checks Coverage and Capacity under equal-split load balancing: a service
/// hosted on h instances puts 1/h of its demand on each.
FeasibilityReport check_feasibility(const PackingSolution& solution, const DemandVector& demand, const VmCatalog& vms);

/// Fixed-length GA encoding: `slots` candidate instances, each with a type
/// (kOff when unused) and S assignment bits.
struct Genome {
    static constexpr int kOff = -1;

    std::size_t slots = 0;
    std::size_t services = 0;
    std::vector<int> types;
    std::vector<std::uint8_t> bits;

    Genome() = default;
    Genome(std::size_t slots, std::size_t services);

    std::uint8_t bit(std::size_t slot, std::size_t s) const { return bits[slot * services + s]; }
    std::uint8_t& bit(std::size_t slot, std::size_t s) { return bits[slot * services + s]; }
    bool active(std::size_t slot) const;

    bool operator==(const Genome&) const = default;
};

struct Evaluation {
    double cost = 0.0;
    /// Sum of overloads over instances and dimensions plus the total demand of
    /// uncovered services.
    double violation = 0.0;
};

/// Slots that are OFF or host nothing are free and carry no load.
Evaluation evaluate(const Genome& genome, const DemandVector& demand, const VmCatalog& vms, double period_hours);

Genome encode(const PackingSolution& solution, std::size_t slots, std::size_t services);
PackingSolution decode(const Genome& genome, const VmCatalog& vms, double period_hours, const Evaluation& eval);

/// 2 x the larger of the aggregate and per-dimension lower bounds on the
/// instance count; 0 for zero demand.
std::size_t default_max_instances(const DemandVector& demand, const VmCatalog& vms);

struct GaParams {
    std::size_t population = 80;
    std::size_t generations = 300;
    double crossover_rate = 0.9;
    double mutation_rate = 0.05;
    std::optional<std::size_t> max_instances;  ///< default: see default_max_instances
    std::optional<double> penalty_weight;      ///< default: 1e4 x max hourly cost
    std::size_t elitism = 2;
    std::size_t tournament = 3;
    /// Insert first-fit and best-fit solutions into the initial population.
    bool seed_greedy = true;
    std::uint64_t seed = 1;

    void validate() const;
};

struct GaResult {
    PackingSolution solution;
    std::vector<double> best_fitness;  ///< best fitness of the initial population, then after every generation
    std::size_t max_instances = 0;
    double penalty_weight = 0.0;
};

/// Fitness (cost + lambda * violation) for every genome.
void evaluate_population(const std::vector<Genome>& population, const DemandVector& demand, const VmCatalog& vms,
                         double period_hours, double penalty_weight, std::vector<double>& fitness,
                         std::vector<Evaluation>& evals, Exec exec = Exec::parallel);

GaResult ga_pack_detailed(const DemandVector& demand, const VmCatalog& vms, const GaParams& params,
                          double period_hours = 1.0 / 6.0, Exec exec = Exec::parallel);
PackingSolution ga_pack(const DemandVector& demand, const VmCatalog& vms, const GaParams& params,
                        double period_hours = 1.0 / 6.0, Exec exec = Exec::parallel);

/// Greedy packers place each service whole, in decreasing order of demand.
/// A service no single type can hold is split evenly over the fewest
/// dedicated instances of the cheapest type that fits, up to
/// `max_instances` (default_max_instances when absent).
PackingSolution first_fit_pack(const DemandVector& demand, const VmCatalog& vms, double period_hours = 1.0 / 6.0,
                               std::optional<std::size_t> max_instances = std::nullopt);
PackingSolution best_fit_pack(const DemandVector& demand, const VmCatalog& vms, double period_hours = 1.0 / 6.0,
                              std::optional<std::size_t> max_instances = std::nullopt);

/// Exhaustive minimum-cost search over at most `m_cap` instances. Requires
/// m_cap <= 3 and S * m_cap <= 12; throws SizeError otherwise.
PackingSolution brute_force_pack(const DemandVector& demand, const VmCatalog& vms, std::size_t m_cap,
                                 double period_hours = 1.0 / 6.0);

/// Three types with the (1,1,2), (1,2,1) and (2,1,2) capacity triples.
VmCatalog default_vm_catalog();

}  // namespace packwise
