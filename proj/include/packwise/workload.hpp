#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace packwise {

/// Per-service resource cost of serving one request, one value per resource
/// dimension. Unit costs are time-invariant.
class ServiceCatalog {
public:
    ServiceCatalog() = default;
    /// Throws InvalidArgument unless every row has the same nonzero width,
    /// entries are finite and >= 0, and every row has a positive entry.
    explicit ServiceCatalog(std::vector<std::vector<double>> unit_costs);

    std::size_t services() const noexcept { return unit_costs_.size(); }
    std::size_t dimensions() const noexcept { return unit_costs_.empty() ? 0 : unit_costs_[0].size(); }
    std::span<const double> unit_cost(std::size_t service) const { return unit_costs_.at(service); }
    const std::vector<std::vector<double>>& unit_costs() const noexcept { return unit_costs_; }

    bool operator==(const ServiceCatalog&) const = default;

private:
    std::vector<std::vector<double>> unit_costs_;
};

using Counts = std::vector<std::int64_t>;

struct WorkloadTrace {
    std::size_t services = 0;
    std::int64_t period_seconds = 600;
    std::vector<Counts> periods;

    std::size_t size() const noexcept { return periods.size(); }
    bool empty() const noexcept { return periods.empty(); }
    double period_hours() const noexcept { return static_cast<double>(period_seconds) / 3600.0; }

    bool operator==(const WorkloadTrace&) const = default;
};

struct SyntheticSpec {
    std::vector<std::vector<double>> mode_centers;  ///< one row of S mean counts per mode
    double noise_sigma = 0.0;
    std::size_t periods = 0;
    std::uint64_t seed = 0;
    std::int64_t period_seconds = 600;

    std::size_t mode_count() const noexcept { return mode_centers.size(); }
};

/// Generated trace plus the mode each period was drawn from.
struct LabeledTrace {
    WorkloadTrace trace;
    std::vector<std::size_t> modes;
};

ServiceCatalog parse_catalog(const std::string& text);
ServiceCatalog load_catalog(const std::filesystem::path& path);
std::string format_catalog(const ServiceCatalog& catalog);
void save_catalog(const ServiceCatalog& catalog, const std::filesystem::path& path);

/// Parses the trace CSV. A leading `# services=<S> period_seconds=<n>` header
/// is optional; without it the catalog supplies S and the period is 600 s.
/// Line numbers in errors count physical lines from 1.
WorkloadTrace parse_trace(const std::string& text, const ServiceCatalog& catalog);
WorkloadTrace load_trace(const std::filesystem::path& path, const ServiceCatalog& catalog);
std::string format_trace(const WorkloadTrace& trace);
void save_trace(const WorkloadTrace& trace, const std::filesystem::path& path);

/// Each period picks a mode uniformly, adds N(0, sigma) per entry, rounds to
/// the nearest integer and clamps at zero.
LabeledTrace generate_labeled_trace(const SyntheticSpec& spec, const ServiceCatalog& catalog);
WorkloadTrace generate_trace(const SyntheticSpec& spec, const ServiceCatalog& catalog);

/// Draws `modes` centers with entries uniform in [lo, hi], rejecting draws
/// closer than `min_separation` (Euclidean) to an accepted center.
std::vector<std::vector<double>> random_mode_centers(std::size_t services, std::size_t modes,
                                                     double lo, double hi, double min_separation,
                                                     std::uint64_t seed);

/// Seeded catalog with d dimensions and unit costs uniform in [lo, hi].
ServiceCatalog random_catalog(std::size_t services, std::size_t dimensions, double lo, double hi,
                              std::uint64_t seed);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace packwise
