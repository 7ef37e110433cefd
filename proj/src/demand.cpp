#include "packwise/demand.hpp"

#include <algorithm>
#include <exception>

#include "packwise/error.hpp"
#include "packwise/text.hpp"

namespace packwise {

DemandVector::DemandVector(std::size_t services, std::size_t dimensions)
    : dims_(dimensions), values_(services, 0.0), per_dim_(services * dimensions, 0.0) {}

DemandVector::DemandVector(std::size_t services, std::size_t dimensions, std::vector<double> per_dim)
    : dims_(dimensions), values_(services, 0.0), per_dim_(std::move(per_dim)) {
    if (per_dim_.size() != services * dimensions)
        throw InvalidArgument("per-dimension demand has " + std::to_string(per_dim_.size()) + " entries, expected " +
                              std::to_string(services * dimensions));
    for (std::size_t s = 0; s < services; ++s) {
        double sum = 0.0;
        for (std::size_t k = 0; k < dims_; ++k) {
            const double v = per_dim_[s * dims_ + k];
            if (!(v >= 0.0)) throw InvalidArgument("demand entries must be nonnegative");
            sum += v;
        }
        values_[s] = sum;
    }
}

double DemandVector::total() const noexcept {
    double sum = 0.0;
    for (double v : values_) sum += v;
    return sum;
}

bool DemandVector::is_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

DemandVector demand_for_period(std::span<const std::int64_t> counts, const ServiceCatalog& catalog) {
    const std::size_t services = catalog.services();
    const std::size_t dims = catalog.dimensions();
    if (counts.size() != services)
        throw InvalidArgument("period has " + std::to_string(counts.size()) + " counts, catalog has " +
                              std::to_string(services) + " services");
    std::vector<double> per_dim(services * dims);
    for (std::size_t s = 0; s < services; ++s) {
        if (counts[s] < 0) throw InvalidArgument("request counts must be nonnegative");
        const double requests = static_cast<double>(counts[s]);
        const auto unit = catalog.unit_cost(s);
        for (std::size_t k = 0; k < dims; ++k) per_dim[s * dims + k] = requests * unit[k];
    }
    return DemandVector(services, dims, std::move(per_dim));
}

std::vector<DemandVector> demand_series(const WorkloadTrace& trace, const ServiceCatalog& catalog, Exec exec) {
    if (trace.empty()) throw InvalidArgument("demand series needs a nonempty trace");
    const auto n = static_cast<std::ptrdiff_t>(trace.size());
    std::vector<DemandVector> out(trace.size());
    if (exec == Exec::serial) {
        for (std::ptrdiff_t t = 0; t < n; ++t) out[t] = demand_for_period(trace.periods[t], catalog);
        return out;
    }
    std::vector<std::exception_ptr> errors(trace.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < n; ++t) {
        try {
            out[t] = demand_for_period(trace.periods[t], catalog);
        } catch (...) {
            errors[t] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

namespace {

void check_members(std::span<const DemandVector> members) {
    if (members.empty()) throw InvalidArgument("aggregate of an empty member set");
    for (const auto& m : members)
        if (m.services() != members[0].services() || m.dimensions() != members[0].dimensions())
            throw InvalidArgument("demand vectors differ in shape");
}

}  // namespace

DemandVector mean_demand(std::span<const DemandVector> members) {
    check_members(members);
    std::vector<double> acc(members[0].per_dim_flat().size(), 0.0);
    for (const auto& m : members)
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m.per_dim_flat()[i];
    for (auto& v : acc) v /= static_cast<double>(members.size());
    return DemandVector(members[0].services(), members[0].dimensions(), std::move(acc));
}

DemandVector max_demand(std::span<const DemandVector> members) {
    check_members(members);
    std::vector<double> acc(members[0].per_dim_flat());
    for (const auto& m : members)
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = std::max(acc[i], m.per_dim_flat()[i]);
    return DemandVector(members[0].services(), members[0].dimensions(), std::move(acc));
}

std::vector<std::vector<double>> patterns_of(std::span<const DemandVector> series) {
    std::vector<std::vector<double>> out;
    out.reserve(series.size());
    for (const auto& d : series) out.emplace_back(d.values().begin(), d.values().end());
    return out;
}

std::string format_demand_csv(std::span<const DemandVector> series) {
    std::string out;
    for (const auto& d : series) {
        for (std::size_t s = 0; s < d.services(); ++s) {
            if (s) out += ',';
            out += text::sig6(d.value(s));
        }
        out += '\n';
    }
    return out;
}

}  // namespace packwise
