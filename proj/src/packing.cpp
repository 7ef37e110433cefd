#include "packwise/packing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "packwise/error.hpp"
#include "packwise/text.hpp"

namespace packwise {

void validate_vm_catalog(const VmCatalog& vms, std::size_t dimensions) {
    if (vms.empty()) throw InvalidArgument("VM catalog is empty");
    std::set<std::string> ids;
    for (const auto& vm : vms) {
        if (vm.id.empty()) throw InvalidArgument("VM type with empty id");
        if (!ids.insert(vm.id).second) throw InvalidArgument("duplicate VM type id '" + vm.id + "'");
        if (vm.capacity.size() != dimensions)
            throw InvalidArgument("VM type '" + vm.id + "' has " + std::to_string(vm.capacity.size()) +
                                  " capacities, expected " + std::to_string(dimensions));
        bool positive = false;
        for (double c : vm.capacity) {
            if (!std::isfinite(c) || c < 0.0) throw InvalidArgument("VM type '" + vm.id + "' has a negative capacity");
            positive = positive || c > 0.0;
        }
        if (!positive) throw InvalidArgument("VM type '" + vm.id + "' has no capacity");
        if (!std::isfinite(vm.hourly_cost) || vm.hourly_cost <= 0.0)
            throw InvalidArgument("VM type '" + vm.id + "' needs a positive hourly cost");
    }
}

VmCatalog parse_vm_catalog(const std::string& content) {
    VmCatalog vms;
    const auto all = text::lines(content);
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto line = text::trim(all[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = text::split(line, ',');
        if (fields.size() < 3) throw ParseError("expected id, at least one capacity and an hourly cost", i + 1);
        VmType vm;
        vm.id = std::string(text::trim(fields[0]));
        for (std::size_t f = 1; f < fields.size(); ++f) {
            const auto v = text::parse_real(fields[f]);
            if (!v) throw ParseError("'" + std::string(text::trim(fields[f])) + "' is not a decimal", i + 1);
            if (f + 1 == fields.size())
                vm.hourly_cost = *v;
            else
                vm.capacity.push_back(*v);
        }
        if (!vms.empty() && vm.capacity.size() != vms.front().capacity.size())
            throw ParseError("VM type '" + vm.id + "' differs in dimension count", i + 1);
        vms.push_back(std::move(vm));
    }
    if (vms.empty()) throw ParseError("VM catalog is empty");
    try {
        validate_vm_catalog(vms, vms.front().capacity.size());
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
    return vms;
}

VmCatalog load_vm_catalog(const std::filesystem::path& path) { return parse_vm_catalog(read_file(path)); }

std::string format_vm_catalog(const VmCatalog& vms) {
    std::string out;
    for (const auto& vm : vms) {
        out += vm.id;
        for (double c : vm.capacity) out += "," + text::exact(c);
        out += "," + text::exact(vm.hourly_cost) + "\n";
    }
    return out;
}

void save_vm_catalog(const VmCatalog& vms, const std::filesystem::path& path) { write_file(path, format_vm_catalog(vms)); }

double capacity_tolerance(double capacity) { return 1e-9 * std::max(1.0, std::abs(capacity)); }

double solution_cost(const PackingSolution& solution, const VmCatalog& vms, double period_hours) {
    double cost = 0.0;
    for (const auto& inst : solution.instances) cost += vms.at(inst.type).hourly_cost * period_hours;
    return cost;
}

PackingSolution prune(PackingSolution solution) {
    std::erase_if(solution.instances, [](const VmInstance& inst) {
        return std::none_of(inst.assignment.begin(), inst.assignment.end(), [](std::uint8_t b) { return b != 0; });
    });
    return solution;
}

FeasibilityReport check_feasibility(const PackingSolution& solution, const DemandVector& demand, const VmCatalog& vms) {
    FeasibilityReport report;
    const std::size_t services = demand.services();
    const std::size_t dims = demand.dimensions();

    std::vector<std::size_t> hosts(services, 0);
    for (const auto& inst : solution.instances) {
        if (inst.type >= vms.size()) {
            report.ok = false;
            report.reason = "instance references unknown VM type " + std::to_string(inst.type);
            return report;
        }
        if (inst.assignment.size() != services) {
            report.ok = false;
            report.reason = "assignment row has the wrong width";
            return report;
        }
        for (std::size_t s = 0; s < services; ++s) {
            if (inst.assignment[s] > 1) {
                report.ok = false;
                report.reason = "assignment entries must be 0 or 1";
                return report;
            }
            hosts[s] += inst.assignment[s];
        }
    }
    for (std::size_t s = 0; s < services; ++s)
        if (demand.value(s) > 0.0 && hosts[s] == 0) report.uncovered.push_back(s);

    report.worst_overload = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < solution.instances.size(); ++m) {
        const auto& inst = solution.instances[m];
        const auto& cap = vms[inst.type].capacity;
        for (std::size_t k = 0; k < dims; ++k) {
            double load = 0.0;
            for (std::size_t s = 0; s < services; ++s)
                if (inst.assignment[s]) load += demand.at(s, k) / static_cast<double>(hosts[s]);
            const double over = load - cap[k];
            report.worst_overload = std::max(report.worst_overload, over);
            if (over > capacity_tolerance(cap[k]) && report.reason.empty()) {
                report.ok = false;
                report.reason = "instance " + std::to_string(m) + " exceeds capacity in dimension " + std::to_string(k);
            }
        }
    }
    if (solution.instances.empty()) report.worst_overload = 0.0;
    if (!report.uncovered.empty()) {
        report.ok = false;
        if (report.reason.empty()) report.reason = "service " + std::to_string(report.uncovered.front()) + " is not hosted";
    }
    return report;
}

Genome::Genome(std::size_t slot_count, std::size_t service_count)
    : slots(slot_count), services(service_count), types(slot_count, kOff), bits(slot_count * service_count, 0) {}

bool Genome::active(std::size_t slot) const {
    if (types[slot] == kOff) return false;
    for (std::size_t s = 0; s < services; ++s)
        if (bit(slot, s)) return true;
    return false;
}

Evaluation evaluate(const Genome& genome, const DemandVector& demand, const VmCatalog& vms, double period_hours) {
    const std::size_t services = genome.services;
    const std::size_t dims = demand.dimensions();
    Evaluation eval;

    // small fixed-size scratch; S and slot counts are tens at most
    std::vector<std::uint32_t> hosts(services, 0);
    std::vector<char> live(genome.slots, 0);
    for (std::size_t m = 0; m < genome.slots; ++m) {
        if (!genome.active(m)) continue;
        live[m] = 1;
        eval.cost += vms[genome.types[m]].hourly_cost * period_hours;
        for (std::size_t s = 0; s < services; ++s) hosts[s] += genome.bit(m, s);
    }
    for (std::size_t s = 0; s < services; ++s)
        if (hosts[s] == 0) eval.violation += demand.value(s);

    for (std::size_t m = 0; m < genome.slots; ++m) {
        if (!live[m]) continue;
        const auto& cap = vms[genome.types[m]].capacity;
        for (std::size_t k = 0; k < dims; ++k) {
            double load = 0.0;
            for (std::size_t s = 0; s < services; ++s)
                if (genome.bit(m, s)) load += demand.at(s, k) / static_cast<double>(hosts[s]);
            if (load - cap[k] > capacity_tolerance(cap[k])) eval.violation += load - cap[k];
        }
    }
    return eval;
}

Genome encode(const PackingSolution& solution, std::size_t slots, std::size_t services) {
    if (solution.instances.size() > slots) throw InvalidArgument("solution has more instances than genome slots");
    Genome g(slots, services);
    for (std::size_t m = 0; m < solution.instances.size(); ++m) {
        g.types[m] = static_cast<int>(solution.instances[m].type);
        for (std::size_t s = 0; s < services; ++s) g.bit(m, s) = solution.instances[m].assignment.at(s);
    }
    return g;
}

PackingSolution decode(const Genome& genome, const VmCatalog& vms, double period_hours, const Evaluation& eval) {
    PackingSolution out;
    for (std::size_t m = 0; m < genome.slots; ++m) {
        if (!genome.active(m)) continue;
        VmInstance inst;
        inst.type = static_cast<std::size_t>(genome.types[m]);
        inst.assignment.assign(genome.bits.begin() + m * genome.services, genome.bits.begin() + (m + 1) * genome.services);
        out.instances.push_back(std::move(inst));
    }
    out.total_cost = solution_cost(out, vms, period_hours);
    out.violation = eval.violation;
    out.feasible = eval.violation == 0.0;
    return out;
}

std::size_t default_max_instances(const DemandVector& demand, const VmCatalog& vms) {
    if (demand.is_zero()) return 0;
    const std::size_t dims = demand.dimensions();
    double best_total = 0.0;
    std::vector<double> best_dim(dims, 0.0);
    for (const auto& vm : vms) {
        double total = 0.0;
        for (std::size_t k = 0; k < dims; ++k) {
            total += vm.capacity[k];
            best_dim[k] = std::max(best_dim[k], vm.capacity[k]);
        }
        best_total = std::max(best_total, total);
    }
    double bound = std::ceil(demand.total() / best_total);
    for (std::size_t k = 0; k < dims; ++k) {
        double need = 0.0;
        for (std::size_t s = 0; s < demand.services(); ++s) need += demand.at(s, k);
        if (need > 0.0) bound = std::max(bound, best_dim[k] > 0.0 ? std::ceil(need / best_dim[k]) : need);
    }
    return 2 * std::max<std::size_t>(1, static_cast<std::size_t>(bound));
}

PackingSolution brute_force_pack(const DemandVector& demand, const VmCatalog& vms, std::size_t m_cap,
                                 double period_hours) {
    const std::size_t services = demand.services();
    if (m_cap > 3 || services * m_cap > 12)
        throw SizeError("brute force refuses S=" + std::to_string(services) + ", m_cap=" + std::to_string(m_cap) +
                        " (needs m_cap <= 3 and S*m_cap <= 12)");
    PackingSolution empty;
    if (demand.is_zero()) return empty;

    const std::size_t rows = (std::size_t{1} << services) - 1;  // nonzero assignment rows
    const std::size_t options = 1 + vms.size() * rows;            // code 0 = unused slot

    std::vector<std::size_t> code(m_cap, 0), best_code;
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_count = 0;
    bool found = false;

    auto build = [&](const std::vector<std::size_t>& c) {
        PackingSolution sol;
        for (auto v : c) {
            if (v == 0) continue;
            const std::size_t t = (v - 1) / rows;
            const std::size_t mask = (v - 1) % rows + 1;
            VmInstance inst;
            inst.type = t;
            inst.assignment.resize(services);
            for (std::size_t s = 0; s < services; ++s) inst.assignment[s] = (mask >> s) & 1U;
            sol.instances.push_back(std::move(inst));
        }
        return sol;
    };

    // odometer, last slot fastest: visits codes in lexicographic order
    auto advance = [&](std::vector<std::size_t>& c) {
        for (std::size_t pos = c.size(); pos-- > 0;) {
            if (++c[pos] < options) return true;
            c[pos] = 0;
        }
        return false;
    };

    for (;;) {
        auto sol = build(code);
        const double cost = solution_cost(sol, vms, period_hours);
        const std::size_t count = sol.instances.size();
        if (!found || cost < best_cost || (cost == best_cost && count < best_count)) {
            if (check_feasibility(sol, demand, vms).ok) {
                found = true;
                best_cost = cost;
                best_count = count;
                best_code = code;
            }
        }
        if (!advance(code)) break;
    }

    if (!found) {
        empty.feasible = false;
        empty.violation = demand.total();
        return empty;
    }
    auto best = build(best_code);
    best.total_cost = solution_cost(best, vms, period_hours);
    best.feasible = true;
    return best;
}

VmCatalog default_vm_catalog() {
    return {
        {"VM1", {1.0, 1.0, 2.0}, 0.10},
        {"VM2", {1.0, 2.0, 1.0}, 0.11},
        {"VM3", {2.0, 1.0, 2.0}, 0.16},
    };
}

}  // namespace packwise
