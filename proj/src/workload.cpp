#include "packwise/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "packwise/error.hpp"
#include "packwise/random.hpp"
#include "packwise/text.hpp"

namespace packwise {

ServiceCatalog::ServiceCatalog(std::vector<std::vector<double>> unit_costs)
    : unit_costs_(std::move(unit_costs)) {
    if (unit_costs_.empty()) throw InvalidArgument("service catalog needs at least one service");
    const std::size_t d = unit_costs_[0].size();
    if (d == 0) throw InvalidArgument("service catalog needs at least one resource dimension");
    for (std::size_t s = 0; s < unit_costs_.size(); ++s) {
        const auto& row = unit_costs_[s];
        if (row.size() != d)
            throw InvalidArgument("service " + std::to_string(s) + " has " + std::to_string(row.size()) +
                                  " unit costs, expected " + std::to_string(d));
        bool positive = false;
        for (double c : row) {
            if (!std::isfinite(c) || c < 0.0)
                throw InvalidArgument("service " + std::to_string(s) + " has a negative or non-finite unit cost");
            positive = positive || c > 0.0;
        }
        if (!positive) throw InvalidArgument("service " + std::to_string(s) + " has all-zero unit costs");
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed for " + path.string());
}

ServiceCatalog parse_catalog(const std::string& content) {
    std::vector<std::vector<double>> rows;
    const auto all = text::lines(content);
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto line = text::trim(all[i]);
        if (line.empty() || line.front() == '#') continue;
        std::vector<double> row;
        for (auto field : text::split(line, ',')) {
            const auto v = text::parse_real(field);
            if (!v || *v < 0.0) throw ParseError("unit cost '" + std::string(text::trim(field)) + "' is not a nonnegative decimal", i + 1);
            row.push_back(*v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("expected " + std::to_string(rows.front().size()) + " unit costs, got " + std::to_string(row.size()), i + 1);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("service catalog is empty");
    try {
        return ServiceCatalog(std::move(rows));
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
}

ServiceCatalog load_catalog(const std::filesystem::path& path) { return parse_catalog(read_file(path)); }

std::string format_catalog(const ServiceCatalog& catalog) {
    std::string out;
    for (const auto& row : catalog.unit_costs()) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out += ',';
            out += text::exact(row[k]);
        }
        out += '\n';
    }
    return out;
}

void save_catalog(const ServiceCatalog& catalog, const std::filesystem::path& path) {
    write_file(path, format_catalog(catalog));
}

namespace {

// Parses "# services=<S> period_seconds=<n>".
void parse_header(std::string_view line, std::size_t line_no, WorkloadTrace& trace, std::size_t expected_services) {
    line.remove_prefix(1);
    bool saw_services = false;
    for (auto token : text::split(text::trim(line), ' ')) {
        token = text::trim(token);
        if (token.empty()) continue;
        const auto eq = token.find('=');
        if (eq == std::string_view::npos) throw ParseError("malformed header token '" + std::string(token) + "'", line_no);
        const auto key = token.substr(0, eq);
        const auto value = text::parse_int(token.substr(eq + 1));
        if (!value || *value <= 0) throw ParseError("header value for '" + std::string(key) + "' must be a positive integer", line_no);
        if (key == "services") {
            if (static_cast<std::size_t>(*value) != expected_services)
                throw ParseError("trace declares " + std::to_string(*value) + " services but the catalog has " +
                                     std::to_string(expected_services),
                                 line_no);
            saw_services = true;
        } else if (key == "period_seconds") {
            trace.period_seconds = *value;
        } else {
            throw ParseError("unknown header key '" + std::string(key) + "'", line_no);
        }
    }
    if (!saw_services) throw ParseError("header is missing services=<S>", line_no);
}

}  // namespace

WorkloadTrace parse_trace(const std::string& content, const ServiceCatalog& catalog) {
    if (text::trim(content).empty()) throw ParseError("trace file is empty");
    WorkloadTrace trace;
    trace.services = catalog.services();
    const auto all = text::lines(content);
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto line = text::trim(all[i]);
        const std::size_t line_no = i + 1;
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (i != 0) throw ParseError("header is only allowed on the first line", line_no);
            parse_header(line, line_no, trace, catalog.services());
            continue;
        }
        const auto fields = text::split(line, ',');
        if (fields.size() != trace.services)
            throw ParseError("expected " + std::to_string(trace.services) + " counts, got " + std::to_string(fields.size()), line_no);
        Counts row;
        row.reserve(fields.size());
        for (auto field : fields) {
            const auto v = text::parse_int(field);
            if (!v) throw ParseError("count '" + std::string(text::trim(field)) + "' is not an integer", line_no);
            if (*v < 0) throw ParseError("count " + std::to_string(*v) + " is negative", line_no);
            row.push_back(*v);
        }
        trace.periods.push_back(std::move(row));
    }
    return trace;
}

WorkloadTrace load_trace(const std::filesystem::path& path, const ServiceCatalog& catalog) {
    return parse_trace(read_file(path), catalog);
}

std::string format_trace(const WorkloadTrace& trace) {
    std::string out = "# services=" + std::to_string(trace.services) +
                      " period_seconds=" + std::to_string(trace.period_seconds) + "\n";
    for (const auto& row : trace.periods) {
        for (std::size_t s = 0; s < row.size(); ++s) {
            if (s) out += ',';
            out += std::to_string(row[s]);
        }
        out += '\n';
    }
    return out;
}

void save_trace(const WorkloadTrace& trace, const std::filesystem::path& path) {
    write_file(path, format_trace(trace));
}

LabeledTrace generate_labeled_trace(const SyntheticSpec& spec, const ServiceCatalog& catalog) {
    if (spec.mode_centers.empty()) throw InvalidArgument("synthetic spec needs at least one mode");
    if (spec.periods == 0) throw InvalidArgument("synthetic spec needs at least one period");
    if (!(spec.noise_sigma >= 0.0)) throw InvalidArgument("noise sigma must be >= 0");
    if (spec.period_seconds <= 0) throw InvalidArgument("period length must be positive");
    const std::size_t services = catalog.services();
    for (const auto& c : spec.mode_centers)
        if (c.size() != services)
            throw InvalidArgument("mode center width " + std::to_string(c.size()) + " does not match " +
                                  std::to_string(services) + " services");

    Rng rng(spec.seed);
    LabeledTrace out;
    out.trace.services = services;
    out.trace.period_seconds = spec.period_seconds;
    out.trace.periods.reserve(spec.periods);
    out.modes.reserve(spec.periods);
    for (std::size_t t = 0; t < spec.periods; ++t) {
        const std::size_t mode = rng.uniform_index(spec.mode_centers.size());
        Counts row(services);
        for (std::size_t s = 0; s < services; ++s) {
            // always draw, so sigma = 0 consumes the same stream as sigma > 0
            const double noisy = rng.normal(spec.mode_centers[mode][s], spec.noise_sigma);
            row[s] = std::max<std::int64_t>(0, std::llround(spec.noise_sigma > 0.0 ? noisy : spec.mode_centers[mode][s]));
        }
        out.trace.periods.push_back(std::move(row));
        out.modes.push_back(mode);
    }
    return out;
}

WorkloadTrace generate_trace(const SyntheticSpec& spec, const ServiceCatalog& catalog) {
    return generate_labeled_trace(spec, catalog).trace;
}

std::vector<std::vector<double>> random_mode_centers(std::size_t services, std::size_t modes, double lo, double hi,
                                                     double min_separation, std::uint64_t seed) {
    if (services == 0 || modes == 0) throw InvalidArgument("need at least one service and one mode");
    if (!(hi >= lo) || lo < 0.0) throw InvalidArgument("center range must satisfy 0 <= lo <= hi");
    Rng rng(seed);
    std::vector<std::vector<double>> centers;
    constexpr int kMaxAttempts = 100000;
    for (int attempt = 0; centers.size() < modes; ++attempt) {
        if (attempt == kMaxAttempts)
            throw InvalidArgument("cannot place " + std::to_string(modes) + " centers with separation " +
                                  text::sig6(min_separation));
        std::vector<double> c(services);
        for (auto& v : c) v = std::round(lo + (hi - lo) * rng.uniform01());
        bool ok = true;
        for (const auto& other : centers) {
            double d2 = 0.0;
            for (std::size_t s = 0; s < services; ++s) d2 += (c[s] - other[s]) * (c[s] - other[s]);
            if (std::sqrt(d2) < min_separation) {
                ok = false;
                break;
            }
        }
        if (ok) centers.push_back(std::move(c));
    }
    return centers;
}

ServiceCatalog random_catalog(std::size_t services, std::size_t dimensions, double lo, double hi, std::uint64_t seed) {
    if (!(hi >= lo) || lo < 0.0 || hi <= 0.0) throw InvalidArgument("unit cost range must satisfy 0 <= lo <= hi, hi > 0");
    Rng rng(seed);
    std::vector<std::vector<double>> rows(services, std::vector<double>(dimensions));
    for (auto& row : rows)
        for (auto& v : row) v = std::round((lo + (hi - lo) * rng.uniform01()) * 1e4) / 1e4;
    for (auto& row : rows)
        if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) row[0] = hi;
    return ServiceCatalog(std::move(rows));
}

}  // namespace packwise
