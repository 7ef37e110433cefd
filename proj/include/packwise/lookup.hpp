#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "packwise/clustering.hpp"
#include "packwise/packing.hpp"

namespace packwise {

inline constexpr const char* kTableVersion = "packwise-table-v1";

enum class Similarity { pearson, euclidean };

const char* to_string(Similarity similarity);
Similarity parse_similarity(const std::string& name);

struct LookupEntry {
    Pattern pattern;               ///< representative pattern (cluster centroid)
    PackingSolution solution;      ///< always feasible for `sizing`
    std::vector<double> sizing;    ///< S x d demand the solution was packed for

    bool operator==(const LookupEntry&) const = default;
};

/// Representative patterns mapped to precomputed VM configurations.
///
/// In pearson mode a hit needs score >= threshold and, unless
/// magnitude_ratio is infinite, an L1-norm ratio between incoming and entry
/// within [1/ratio, ratio]. In euclidean mode `threshold` is the largest
/// distance that still counts as a hit.
struct LookupTable {
    ServiceCatalog services;
    VmCatalog vm_types;
    std::int64_t period_seconds = 600;
    std::vector<LookupEntry> entries;
    Similarity similarity = Similarity::pearson;
    double threshold = 0.7;
    double magnitude_ratio = 1.5;
    std::string created_at = "1970-01-01T00:00:00Z";
    std::string fingerprint;

    double period_hours() const noexcept { return static_cast<double>(period_seconds) / 3600.0; }
    bool operator==(const LookupTable&) const = default;
};

/// FNV-1a over the canonical text of both catalogs, as 16 hex digits.
std::string catalog_fingerprint(const ServiceCatalog& services, const VmCatalog& vms);

/// Throws FingerprintMismatch when the table was built for other catalogs.
void require_fingerprint(const LookupTable& table, const ServiceCatalog& services, const VmCatalog& vms);

/// Structural checks: nonempty, widths, threshold range, feasible entries.
void validate_table(const LookupTable& table);

/// 0.25 x mean pairwise distance between patterns; 0.25 x the L2 norm when
/// there is only one pattern.
double default_euclidean_threshold(const std::vector<Pattern>& patterns);

/// Sample Pearson correlation. When either side has zero variance the result
/// is 1 if both mean-centered vectors are equal and 0 otherwise.
double pearson(std::span<const double> a, std::span<const double> b);

struct MatchResult {
    std::size_t best_index = 0;
    double score = 0.0;
    bool hit = false;
    bool magnitude_ok = true;
    std::optional<PackingSolution> chosen;
};

/// Scores the pattern against every entry. In pearson mode the best entry is
/// the highest score among entries passing the magnitude guard (all entries
/// when none pass); in euclidean mode the smallest distance. Ties go to the
/// lowest index.
MatchResult match_pattern(const LookupTable& table, std::span<const double> pattern);
MatchResult match(const LookupTable& table, const DemandVector& incoming);

/// Miss patterns awaiting re-clustering. Single writer.
class MissBuffer {
public:
    explicit MissBuffer(std::size_t capacity = 20);

    /// Appends and reports whether the buffer has reached capacity.
    bool record(DemandVector demand);
    void clear() noexcept { items_.clear(); }

    std::size_t size() const noexcept { return items_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    bool due() const noexcept { return items_.size() >= capacity_; }
    const std::vector<DemandVector>& items() const noexcept { return items_; }

private:
    std::size_t capacity_;
    std::vector<DemandVector> items_;
};

std::string format_table(const LookupTable& table);
LookupTable parse_table(const std::string& json_text);
void save_table(const LookupTable& table, const std::filesystem::path& path);
LookupTable load_table(const std::filesystem::path& path);

}  // namespace packwise
