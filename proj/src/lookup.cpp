#include "packwise/lookup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "packwise/error.hpp"
#include "packwise/kernels.hpp"
#include "packwise/text.hpp"

namespace packwise {

using ordered_json = nlohmann::ordered_json;

const char* to_string(Similarity similarity) {
    return similarity == Similarity::pearson ? "pearson" : "euclidean";
}

Similarity parse_similarity(const std::string& name) {
    if (name == "pearson") return Similarity::pearson;
    if (name == "euclidean") return Similarity::euclidean;
    throw InvalidArgument("unknown similarity '" + name + "'");
}

std::string catalog_fingerprint(const ServiceCatalog& services, const VmCatalog& vms) {
    const std::string canon = "services\n" + format_catalog(services) + "vms\n" + format_vm_catalog(vms);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void require_fingerprint(const LookupTable& table, const ServiceCatalog& services, const VmCatalog& vms) {
    const auto expected = catalog_fingerprint(services, vms);
    if (table.fingerprint != expected)
        throw FingerprintMismatch("table fingerprint " + table.fingerprint + " does not match catalogs (" + expected + ")");
}

void validate_table(const LookupTable& table) {
    const std::size_t services = table.services.services();
    const std::size_t dims = table.services.dimensions();
    if (services == 0) throw InvalidArgument("table has no service catalog");
    validate_vm_catalog(table.vm_types, dims);
    if (table.entries.empty()) throw InvalidArgument("lookup table needs at least one entry");
    if (table.period_seconds <= 0) throw InvalidArgument("table period must be positive");
    if (table.similarity == Similarity::pearson) {
        if (!(table.threshold > -1.0 && table.threshold <= 1.0))
            throw InvalidArgument("pearson threshold must be in (-1, 1]");
        if (!(table.magnitude_ratio >= 1.0)) throw InvalidArgument("magnitude ratio must be >= 1");
    } else if (!(table.threshold > 0.0) || !std::isfinite(table.threshold)) {
        throw InvalidArgument("euclidean threshold must be a positive distance");
    }
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const auto& e = table.entries[i];
        const std::string where = "entry " + std::to_string(i);
        if (e.pattern.size() != services) throw InvalidArgument(where + ": pattern width differs from the catalog");
        if (!e.solution.feasible) throw InvalidArgument(where + ": solution is not feasible");
        if (e.sizing.size() != services * dims) throw InvalidArgument(where + ": sizing demand has the wrong shape");
        const auto report = check_feasibility(e.solution, DemandVector(services, dims, e.sizing), table.vm_types);
        if (!report.ok) throw InvalidArgument(where + ": " + report.reason);
    }
}

double default_euclidean_threshold(const std::vector<Pattern>& patterns) {
    if (patterns.empty()) throw InvalidArgument("threshold needs at least one pattern");
    if (patterns.size() == 1) {
        double n2 = 0.0;
        for (double v : patterns[0]) n2 += v * v;
        return 0.25 * std::sqrt(n2);
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < patterns.size(); ++i)
        for (std::size_t j = i + 1; j < patterns.size(); ++j) {
            sum += euclidean_distance(patterns[i], patterns[j]);
            ++pairs;
        }
    return 0.25 * sum / static_cast<double>(pairs);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("pearson needs equal-length vectors");
    if (a.size() < 2) throw InvalidArgument("pearson needs at least two entries");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    bool centered_equal = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i] - ma;
        const double y = b[i] - mb;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        centered_equal = centered_equal && x == y;
    }
    // identical centered vectors correlate exactly, without sqrt rounding
    if (centered_equal) return 1.0;
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

double l1(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

bool magnitude_within(double incoming, double entry, double ratio) {
    if (std::isinf(ratio)) return true;
    if (incoming == 0.0 && entry == 0.0) return true;
    if (incoming == 0.0 || entry == 0.0) return false;
    const double r = incoming / entry;
    return r >= 1.0 / ratio && r <= ratio;
}

}  // namespace

MatchResult match_pattern(const LookupTable& table, std::span<const double> pattern) {
    if (table.entries.empty()) throw InvalidArgument("lookup table is empty");
    if (pattern.size() != table.services.services())
        throw FingerprintMismatch("incoming pattern has " + std::to_string(pattern.size()) + " services, table has " +
                                  std::to_string(table.services.services()));
    MatchResult result;
    if (table.similarity == Similarity::euclidean) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < table.entries.size(); ++i) {
            const double d = euclidean_distance(pattern, table.entries[i].pattern);
            if (d < best) {
                best = d;
                result.best_index = i;
            }
        }
        result.score = best;
        result.hit = best <= table.threshold;
    } else {
        const double norm = l1(pattern);
        std::optional<std::size_t> guarded, any;
        std::vector<double> scores(table.entries.size());
        for (std::size_t i = 0; i < table.entries.size(); ++i) {
            scores[i] = pearson(pattern, table.entries[i].pattern);
            if (!any || scores[i] > scores[*any]) any = i;
            if (magnitude_within(norm, l1(table.entries[i].pattern), table.magnitude_ratio) &&
                (!guarded || scores[i] > scores[*guarded]))
                guarded = i;
        }
        result.best_index = guarded.value_or(*any);
        result.score = scores[result.best_index];
        result.magnitude_ok = guarded.has_value();
        result.hit = result.magnitude_ok && result.score >= table.threshold;
    }
    if (result.hit) result.chosen = table.entries[result.best_index].solution;
    return result;
}

MatchResult match(const LookupTable& table, const DemandVector& incoming) {
    return match_pattern(table, incoming.values());
}

MissBuffer::MissBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw InvalidArgument("miss buffer capacity must be positive");
}

bool MissBuffer::record(DemandVector demand) {
    items_.push_back(std::move(demand));
    return due();
}

std::string format_table(const LookupTable& table) {
    ordered_json doc;
    doc["version"] = kTableVersion;
    doc["similarity"] = to_string(table.similarity);
    doc["threshold"] = table.threshold;
    if (std::isinf(table.magnitude_ratio))
        doc["magnitude_ratio"] = nullptr;
    else
        doc["magnitude_ratio"] = table.magnitude_ratio;
    doc["fingerprint"] = table.fingerprint;
    doc["created_at"] = table.created_at;
    doc["period_seconds"] = table.period_seconds;
    doc["services"] = table.services.unit_costs();
    ordered_json vms = ordered_json::array();
    for (const auto& vm : table.vm_types)
        vms.push_back(ordered_json{{"id", vm.id}, {"capacity", vm.capacity}, {"hourly_cost", vm.hourly_cost}});
    doc["vm_types"] = std::move(vms);
    ordered_json entries = ordered_json::array();
    for (const auto& e : table.entries) {
        ordered_json instances = ordered_json::array();
        for (const auto& inst : e.solution.instances) {
            std::vector<int> bits(inst.assignment.begin(), inst.assignment.end());
            instances.push_back(ordered_json{{"type_id", table.vm_types.at(inst.type).id}, {"assignment", bits}});
        }
        entries.push_back(ordered_json{
            {"pattern", e.pattern}, {"instances", std::move(instances)}, {"cost", e.solution.total_cost}, {"sizing", e.sizing}});
    }
    doc["entries"] = std::move(entries);
    return doc.dump(2) + "\n";
}

LookupTable parse_table(const std::string& json_text) {
    LookupTable table;
    try {
        const auto doc = ordered_json::parse(json_text);
        if (!doc.is_object() || !doc.contains("version")) throw ParseError("table file has no version field");
        if (doc.at("version").get<std::string>() != kTableVersion)
            throw ParseError("unsupported table version '" + doc.at("version").get<std::string>() + "'");
        table.similarity = parse_similarity(doc.at("similarity").get<std::string>());
        table.threshold = doc.at("threshold").get<double>();
        const auto& ratio = doc.at("magnitude_ratio");
        table.magnitude_ratio = ratio.is_null() ? std::numeric_limits<double>::infinity() : ratio.get<double>();
        table.fingerprint = doc.at("fingerprint").get<std::string>();
        table.created_at = doc.at("created_at").get<std::string>();
        table.period_seconds = doc.at("period_seconds").get<std::int64_t>();
        table.services = ServiceCatalog(doc.at("services").get<std::vector<std::vector<double>>>());
        std::map<std::string, std::size_t> type_index;
        for (const auto& vm : doc.at("vm_types")) {
            VmType t{vm.at("id").get<std::string>(), vm.at("capacity").get<std::vector<double>>(),
                     vm.at("hourly_cost").get<double>()};
            type_index[t.id] = table.vm_types.size();
            table.vm_types.push_back(std::move(t));
        }
        for (const auto& e : doc.at("entries")) {
            LookupEntry entry;
            entry.pattern = e.at("pattern").get<std::vector<double>>();
            entry.sizing = e.at("sizing").get<std::vector<double>>();
            for (const auto& inst : e.at("instances")) {
                const auto id = inst.at("type_id").get<std::string>();
                const auto it = type_index.find(id);
                if (it == type_index.end()) throw ParseError("entry references unknown VM type '" + id + "'");
                VmInstance vi;
                vi.type = it->second;
                for (const auto& b : inst.at("assignment")) {
                    const int bit = b.get<int>();
                    if (bit != 0 && bit != 1) throw ParseError("assignment entries must be 0 or 1");
                    vi.assignment.push_back(static_cast<std::uint8_t>(bit));
                }
                entry.solution.instances.push_back(std::move(vi));
            }
            entry.solution.total_cost = e.at("cost").get<double>();
            entry.solution.feasible = true;
            table.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed table file: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("invalid table file: ") + e.what());
    }
    if (catalog_fingerprint(table.services, table.vm_types) != table.fingerprint)
        throw ParseError("table fingerprint does not match its embedded catalogs");
    try {
        validate_table(table);
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("invalid table file: ") + e.what());
    }
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const double recomputed = solution_cost(table.entries[i].solution, table.vm_types, table.period_hours());
        if (std::abs(recomputed - table.entries[i].solution.total_cost) > 1e-9 * std::max(1.0, recomputed))
            throw ParseError("entry " + std::to_string(i) + " cost does not match its instances");
    }
    return table;
}

void save_table(const LookupTable& table, const std::filesystem::path& path) { write_file(path, format_table(table)); }

LookupTable load_table(const std::filesystem::path& path) { return parse_table(read_file(path)); }

}  // namespace packwise
