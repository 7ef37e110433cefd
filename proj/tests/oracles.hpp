#pragma once

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "packwise/demand.hpp"
#include "packwise/packing.hpp"
#include "packwise/random.hpp"
#include "packwise/workload.hpp"

namespace oracle {

/// Demand by direct product-and-sum: per_dim[s][k] = D_s * N_s[k], value[s] = sum_k.
struct Demand {
    std::vector<std::vector<double>> per_dim;
    std::vector<double> values;
};

inline Demand demand(const std::vector<std::int64_t>& counts, const std::vector<std::vector<double>>& unit) {
    Demand out;
    for (std::size_t s = 0; s < counts.size(); ++s) {
        std::vector<double> row;
        double total = 0.0;
        for (double n : unit[s]) {
            row.push_back(static_cast<double>(counts[s]) * n);
            total += row.back();
        }
        out.per_dim.push_back(row);
        out.values.push_back(total);
    }
    return out;
}

/// Coverage and equal-split capacity, recomputed from scratch.
inline bool feasible(const packwise::PackingSolution& sol, const packwise::DemandVector& d,
                     const packwise::VmCatalog& vms, double tol = 1e-9) {
    const std::size_t S = d.services(), D = d.dimensions();
    std::vector<int> hosts(S, 0);
    for (const auto& inst : sol.instances) {
        if (inst.assignment.size() != S) return false;
        for (std::size_t s = 0; s < S; ++s) {
            if (inst.assignment[s] > 1) return false;
            hosts[s] += inst.assignment[s];
        }
    }
    for (std::size_t s = 0; s < S; ++s)
        if (d.value(s) > 0 && hosts[s] == 0) return false;
    for (const auto& inst : sol.instances) {
        for (std::size_t k = 0; k < D; ++k) {
            double load = 0;
            for (std::size_t s = 0; s < S; ++s)
                if (inst.assignment[s]) load += d.at(s, k) / hosts[s];
            if (load > vms[inst.type].capacity[k] + tol * std::max(1.0, vms[inst.type].capacity[k])) return false;
        }
    }
    return true;
}

inline double cost(const packwise::PackingSolution& sol, const packwise::VmCatalog& vms, double hours) {
    double c = 0;
    for (const auto& inst : sol.instances) c += vms[inst.type].hourly_cost * hours;
    return c;
}

/// Index of the nearest planted center (Euclidean), ties to the lowest.
inline std::size_t nearest(const std::vector<double>& x, const std::vector<std::vector<double>>& centers) {
    std::size_t best = 0;
    double bd = INFINITY;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        double d = 0;
        for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - centers[c][i]) * (x[i] - centers[c][i]);
        if (d < bd) {
            bd = d;
            best = c;
        }
    }
    return best;
}

/// Fraction of points whose cluster's majority mode equals their own mode,
/// requiring the majority modes to be distinct across clusters.
inline double agreement(const std::vector<std::size_t>& labels, const std::vector<std::size_t>& modes) {
    std::map<std::size_t, std::map<std::size_t, std::size_t>> counts;
    for (std::size_t i = 0; i < labels.size(); ++i) ++counts[labels[i]][modes[i]];
    std::size_t agree = 0;
    std::vector<std::size_t> used;
    for (auto& [label, hist] : counts) {
        auto best = std::max_element(hist.begin(), hist.end(), [](auto& a, auto& b) { return a.second < b.second; });
        if (std::find(used.begin(), used.end(), best->first) != used.end()) continue;
        used.push_back(best->first);
        agree += best->second;
    }
    return static_cast<double>(agree) / static_cast<double>(labels.size());
}

}  // namespace oracle

namespace fixture {

/// The desk-scale experiment: 5 services, 3 resource dimensions, 10 planted
/// modes with noise at 5% of the mean planted magnitude.
struct Scenario {
    packwise::ServiceCatalog catalog;
    std::vector<std::vector<double>> centers;
    double sigma = 0;
    packwise::VmCatalog vms;

    packwise::SyntheticSpec spec(std::size_t periods, std::uint64_t seed) const {
        packwise::SyntheticSpec s;
        s.mode_centers = centers;
        s.noise_sigma = sigma;
        s.periods = periods;
        s.seed = seed;
        return s;
    }
};

inline Scenario scenario(std::uint64_t seed, std::size_t services = 5, std::size_t modes = 10) {
    Scenario sc;
    sc.catalog = packwise::random_catalog(services, 3, 0.01, 0.04, packwise::derive_seed(seed, 1));
    sc.centers = packwise::random_mode_centers(services, modes, 10, 100, 30, packwise::derive_seed(seed, 2));
    double mean = 0;
    for (auto& c : sc.centers)
        for (double v : c) mean += v;
    mean /= static_cast<double>(services * modes);
    sc.sigma = 0.05 * mean;
    sc.vms = packwise::default_vm_catalog();
    return sc;
}

inline packwise::DemandVector random_demand(packwise::Rng& r, std::size_t S, std::size_t d, double lo, double hi) {
    std::vector<double> v(S * d);
    for (auto& x : v) x = lo + (hi - lo) * r.uniform01();
    return packwise::DemandVector(S, d, v);
}

inline packwise::VmCatalog random_vms(packwise::Rng& r, std::size_t types, std::size_t d) {
    packwise::VmCatalog v;
    for (std::size_t t = 0; t < types; ++t) {
        packwise::VmType vm;
        vm.id = "T" + std::to_string(t);
        for (std::size_t k = 0; k < d; ++k) vm.capacity.push_back(1 + 2 * r.uniform01());
        vm.hourly_cost = 0.5 + 1.5 * r.uniform01();
        v.push_back(vm);
    }
    return v;
}

}  // namespace fixture
