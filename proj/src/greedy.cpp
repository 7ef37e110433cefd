#include <algorithm>
#include <numeric>

#include "packwise/error.hpp"
#include "packwise/packing.hpp"

namespace packwise {

namespace {

enum class Rule { first_fit, best_fit };

struct OpenInstance {
    std::size_t type;
    std::vector<double> residual;
    std::vector<std::uint8_t> assignment;
    bool closed = false;  // dedicated to one split service
};

bool fits(std::span<const double> need, std::span<const double> room) {
    for (std::size_t k = 0; k < need.size(); ++k)
        if (need[k] - room[k] > capacity_tolerance(room[k])) return false;
    return true;
}

// Cheapest type whose full capacity holds `need`; ties go to the lower index.
std::optional<std::size_t> cheapest_fitting(std::span<const double> need, const VmCatalog& vms) {
    std::optional<std::size_t> best;
    for (std::size_t t = 0; t < vms.size(); ++t)
        if (fits(need, vms[t].capacity) && (!best || vms[t].hourly_cost < vms[*best].hourly_cost)) best = t;
    return best;
}

PackingSolution greedy_pack(const DemandVector& demand, const VmCatalog& vms, double period_hours,
                            std::optional<std::size_t> max_instances, Rule rule) {
    const std::size_t services = demand.services();
    const std::size_t dims = demand.dimensions();
    validate_vm_catalog(vms, dims);
    const std::size_t split_limit = max_instances.value_or(default_max_instances(demand, vms));

    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < services; ++s)
        if (demand.value(s) > 0.0) order.push_back(s);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return demand.value(a) > demand.value(b); });

    std::vector<OpenInstance> open;
    bool feasible = true;
    double uncovered = 0.0;
    for (const std::size_t s : order) {
        const auto need = demand.per_dim(s);

        std::optional<std::size_t> target;
        double target_slack = 0.0;
        for (std::size_t m = 0; m < open.size(); ++m) {
            if (open[m].closed || !fits(need, open[m].residual)) continue;
            if (rule == Rule::first_fit) {
                target = m;
                break;
            }
            double slack = 0.0;
            for (std::size_t k = 0; k < dims; ++k) slack += open[m].residual[k] - need[k];
            if (!target || slack < target_slack) {
                target = m;
                target_slack = slack;
            }
        }
        if (target) {
            auto& inst = open[*target];
            for (std::size_t k = 0; k < dims; ++k) inst.residual[k] -= need[k];
            inst.assignment[s] = 1;
            continue;
        }

        if (const auto t = cheapest_fitting(need, vms)) {
            OpenInstance inst{*t, vms[*t].capacity, std::vector<std::uint8_t>(services, 0)};
            for (std::size_t k = 0; k < dims; ++k) inst.residual[k] -= need[k];
            inst.assignment[s] = 1;
            open.push_back(std::move(inst));
            continue;
        }

        // too large for any single type: split evenly over dedicated instances
        bool placed = false;
        std::vector<double> part(dims);
        for (std::size_t j = 2; j <= split_limit && !placed; ++j) {
            for (std::size_t k = 0; k < dims; ++k) part[k] = need[k] / static_cast<double>(j);
            if (const auto t = cheapest_fitting(part, vms)) {
                for (std::size_t r = 0; r < j; ++r) {
                    OpenInstance inst{*t, vms[*t].capacity, std::vector<std::uint8_t>(services, 0), true};
                    for (std::size_t k = 0; k < dims; ++k) inst.residual[k] -= part[k];
                    inst.assignment[s] = 1;
                    open.push_back(std::move(inst));
                }
                placed = true;
            }
        }
        if (!placed) {
            feasible = false;
            uncovered += demand.value(s);
        }
    }

    PackingSolution out;
    for (auto& inst : open) out.instances.push_back({inst.type, std::move(inst.assignment)});
    out.total_cost = solution_cost(out, vms, period_hours);
    out.feasible = feasible;
    out.violation = uncovered;
    return out;
}

}  // namespace

PackingSolution first_fit_pack(const DemandVector& demand, const VmCatalog& vms, double period_hours,
                               std::optional<std::size_t> max_instances) {
    return greedy_pack(demand, vms, period_hours, max_instances, Rule::first_fit);
}

PackingSolution best_fit_pack(const DemandVector& demand, const VmCatalog& vms, double period_hours,
                              std::optional<std::size_t> max_instances) {
    return greedy_pack(demand, vms, period_hours, max_instances, Rule::best_fit);
}

}  // namespace packwise
