#pragma once

// Metric reports (per anomaly type plus cross-type averages), score histograms and
// metric-bias tables.

#include <wsauroc/error.hpp>
#include <wsauroc/io.hpp>
#include <wsauroc/roc_metrics.hpp>
#include <wsauroc/severity_scores.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace wsauroc {

enum class SchemeKind { uniform, index, physics };

inline auto parse_scheme_kind(std::string_view name) -> SchemeKind
{
    if (name == "uniform") return SchemeKind::uniform;
    if (name == "index") return SchemeKind::index;
    if (name == "physics") return SchemeKind::physics;
    throw Error{ErrorKind::parse_error, "unknown penalty scheme '" + std::string{name} + "'"};
}

/// Report key of a WS-AUROC column.
inline auto metric_key(SchemeKind kind) -> std::string
{
    switch (kind)
    {
    case SchemeKind::uniform: return "ws_auroc_u";
    case SchemeKind::index: return "ws_auroc_i";
    case SchemeKind::physics: return "ws_auroc_p";
    }
    return "";
}

struct TypeMetrics
{
    std::string name;
    std::vector<std::size_t> group_sizes;
    std::optional<PhysicalQuantityMap> quantities;
    double auroc{};
    std::vector<std::pair<SchemeKind, double>> ws_auroc;
    PairwiseAurocMatrix pairwise;
};

struct MetricReport
{
    std::vector<SchemeKind> schemes;
    std::vector<TypeMetrics> types;
    double average_auroc{};
    std::vector<std::pair<SchemeKind, double>> average_ws_auroc;
};

/// Quantities for a type: an exact name match, else the unnamed entry of a file without a fault column.
inline auto quantities_for(std::map<std::string, PhysicalQuantityMap> const& quantities, std::string const& name)
    -> std::optional<PhysicalQuantityMap>
{
    if (auto it = quantities.find(name); it != quantities.end()) return it->second;
    if (auto it = quantities.find(""); it != quantities.end()) return it->second;
    return std::nullopt;
}

inline auto compute_report(io::TypedScoreSets const& sets, std::map<std::string, PhysicalQuantityMap> const& quantities,
                           std::vector<SchemeKind> schemes) -> MetricReport
{
    if (sets.empty()) throw Error{ErrorKind::empty_input, "no anomaly types to report"};
    std::sort(schemes.begin(), schemes.end());
    schemes.erase(std::unique(schemes.begin(), schemes.end()), schemes.end());

    MetricReport report;
    report.schemes = schemes;
    for (auto const& [name, set] : sets)
    {
        TypeMetrics t;
        t.name = name;
        t.group_sizes = set.group_sizes();
        t.quantities = quantities_for(quantities, name);
        t.auroc = normal_vs_pooled_auroc(set);
        t.pairwise = pairwise_auroc(set);
        for (auto kind : schemes)
        {
            PenaltyScheme scheme = UniformPenalty{};
            if (kind == SchemeKind::index) scheme = IndexPenalty{};
            if (kind == SchemeKind::physics)
            {
                if (!t.quantities)
                    throw Error{ErrorKind::invalid_argument, "physics scheme needs physical quantities for '" + name + "'"};
                try
                {
                    validate_quantities(set, *t.quantities);
                }
                catch (Error const& e)
                {
                    throw Error{e.kind(), "quantities for '" + name + "': " + e.what(), e.where()};
                }
                scheme = PhysicsPenalty{*t.quantities};
            }
            t.ws_auroc.emplace_back(kind, ws_auroc(t.pairwise, penalty_weights(scheme, set.max_index())));
        }
        report.types.push_back(std::move(t));
    }

    auto const count = static_cast<double>(report.types.size());
    for (auto const& t : report.types) report.average_auroc += t.auroc;
    report.average_auroc /= count;
    for (std::size_t s = 0; s < schemes.size(); ++s)
    {
        double sum = 0.0;
        for (auto const& t : report.types) sum += t.ws_auroc[s].second;
        report.average_ws_auroc.emplace_back(schemes[s], sum / count);
    }
    return report;
}

inline auto to_json(MetricReport const& report) -> nlohmann::ordered_json
{
    nlohmann::ordered_json j;
    auto& schemes = j["schemes"] = nlohmann::ordered_json::array();
    for (auto kind : report.schemes) schemes.push_back(metric_key(kind));

    auto& types = j["types"] = nlohmann::ordered_json::array();
    for (auto const& t : report.types)
    {
        nlohmann::ordered_json e;
        e["name"] = t.name;
        e["max_index"] = t.group_sizes.size() - 1;
        e["group_sizes"] = t.group_sizes;
        if (t.quantities)
            e["quantities"] = {{"unit", t.quantities->unit}, {"values", t.quantities->quantities}};
        e["auroc"] = t.auroc;
        for (auto const& [kind, value] : t.ws_auroc) e[metric_key(kind)] = value;
        auto& pairs = e["pairwise"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < t.pairwise.max_index(); ++i)
            for (std::size_t jj = i + 1; jj <= t.pairwise.max_index(); ++jj)
                pairs.push_back({{"i", i}, {"j", jj}, {"auroc", t.pairwise.at(i, jj)}});
        types.push_back(std::move(e));
    }

    auto& avg = j["average"];
    avg["auroc"] = report.average_auroc;
    for (auto const& [kind, value] : report.average_ws_auroc) avg[metric_key(kind)] = value;
    return j;
}

inline auto to_text(MetricReport const& report) -> std::string
{
    std::vector<std::string> headers{"type", "levels", "auroc"};
    for (auto kind : report.schemes) headers.push_back(metric_key(kind));

    std::vector<std::vector<std::string>> rows;
    auto fixed = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << v;
        return s.str();
    };
    for (auto const& t : report.types)
    {
        std::vector<std::string> row{t.name, std::to_string(t.group_sizes.size()), fixed(t.auroc)};
        for (auto const& ws : t.ws_auroc) row.push_back(fixed(ws.second));
        rows.push_back(std::move(row));
    }
    std::vector<std::string> avg{"average", "", fixed(report.average_auroc)};
    for (auto const& ws : report.average_ws_auroc) avg.push_back(fixed(ws.second));
    rows.push_back(std::move(avg));

    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c)
    {
        width[c] = headers[c].size();
        for (auto const& r : rows) width[c] = std::max(width[c], r[c].size());
    }
    std::ostringstream out;
    auto emit = [&](std::vector<std::string> const& r) {
        for (std::size_t c = 0; c < r.size(); ++c)
        {
            if (c == 0) out << std::left << std::setw(static_cast<int>(width[c])) << r[c];
            else out << "  " << std::right << std::setw(static_cast<int>(width[c])) << r[c];
        }
        out << '\n';
    };
    emit(headers);
    std::vector<std::string> rule;
    for (auto w : width) rule.emplace_back(w, '-');
    emit(rule);
    for (auto const& r : rows) emit(r);
    return out.str();
}

// --------------------------------------------------------------------------------------------------------------------
// Histograms
// --------------------------------------------------------------------------------------------------------------------

/// Equal-width bins shared by all levels; counts[level][bin].
struct HistogramExport
{
    std::vector<double> edges; // bins + 1 edges
    std::vector<std::vector<std::size_t>> counts;
};

inline auto score_histogram(SeverityScoreSet const& set, std::size_t bins) -> HistogramExport
{
    if (bins < 1) throw Error{ErrorKind::invalid_argument, "need at least one histogram bin"};
    double lo = set.group(0).front();
    double hi = lo;
    for (auto const& g : set.groups())
        for (double s : g)
        {
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    if (!(hi > lo) && bins > 1)
        throw Error{ErrorKind::degenerate_bounds, "all scores are equal; cannot split a zero-width range into bins"};

    HistogramExport h;
    double const width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b)
        h.edges.push_back(b == bins ? hi : lo + width * static_cast<double>(b));
    for (auto const& g : set.groups())
    {
        std::vector<std::size_t> counts(bins, 0);
        for (double s : g)
        {
            std::size_t b = 0;
            if (hi > lo) b = std::min(bins - 1, static_cast<std::size_t>((s - lo) / width));
            ++counts[b];
        }
        h.counts.push_back(std::move(counts));
    }
    return h;
}

inline auto write_histogram(std::ostream& out, HistogramExport const& h) -> void
{
    out << "severity,bin,bin_low,bin_high,count\n";
    for (std::size_t level = 0; level < h.counts.size(); ++level)
        for (std::size_t b = 0; b < h.counts[level].size(); ++b)
            out << level << ',' << b << ',' << io::format_double(h.edges[b]) << ',' << io::format_double(h.edges[b + 1])
                << ',' << h.counts[level][b] << '\n';
}

// --------------------------------------------------------------------------------------------------------------------
// Metric bias
// --------------------------------------------------------------------------------------------------------------------

struct BiasRow
{
    std::string source;
    std::string type;
    double auroc{};
    double x{};
    double y{};
};

struct BiasTable
{
    std::string x_metric;
    std::string y_metric;
    std::vector<BiasRow> rows;
    double bias{};
    std::optional<double> bias_auroc_one; // rows whose AUROC is exactly 1
    std::size_t auroc_one_rows{};
};

/// One row per (report, anomaly type).
inline auto collect_bias_rows(std::vector<std::pair<std::string, nlohmann::json>> const& reports,
                              std::string const& x_metric, std::string const& y_metric) -> std::vector<BiasRow>
{
    std::vector<BiasRow> rows;
    for (auto const& [source, report] : reports)
    {
        if (!report.contains("types") || !report["types"].is_array())
            throw Error{ErrorKind::parse_error, source + ": not a metric report"};
        for (auto const& t : report["types"])
        {
            auto const name = t.value("name", std::string{"?"});
            auto metric = [&](std::string const& key) {
                if (!t.contains(key) || !t[key].is_number())
                    throw Error{ErrorKind::invalid_argument,
                                source + ": metric '" + key + "' not found for anomaly type '" + name + "'"};
                return t[key].get<double>();
            };
            rows.push_back(BiasRow{source, name, metric("auroc"), metric(x_metric), metric(y_metric)});
        }
    }
    return rows;
}

inline auto bias_table(std::vector<BiasRow> rows, std::string x_metric, std::string y_metric) -> BiasTable
{
    BiasTable table{std::move(x_metric), std::move(y_metric), std::move(rows), 0.0, std::nullopt, 0};
    std::vector<double> xs, ys, xs1, ys1;
    for (auto const& r : table.rows)
    {
        xs.push_back(r.x);
        ys.push_back(r.y);
        if (r.auroc == 1.0)
        {
            xs1.push_back(r.x);
            ys1.push_back(r.y);
        }
    }
    table.bias = metric_bias(xs, ys);
    table.auroc_one_rows = xs1.size();
    if (!xs1.empty()) table.bias_auroc_one = metric_bias(xs1, ys1);
    return table;
}

inline auto to_json(BiasTable const& table) -> nlohmann::ordered_json
{
    nlohmann::ordered_json j;
    j["x"] = table.x_metric;
    j["y"] = table.y_metric;
    j["rows"] = table.rows.size();
    j["bias"] = table.bias;
    j["auroc_one_rows"] = table.auroc_one_rows;
    j["bias_auroc_one"] = table.bias_auroc_one ? nlohmann::ordered_json(*table.bias_auroc_one) : nlohmann::ordered_json(nullptr);
    return j;
}

inline auto to_text(BiasTable const& table) -> std::string
{
    std::ostringstream out;
    out << std::left << std::setw(24) << "source" << std::setw(16) << "type" << std::right << std::setw(10)
        << table.x_metric << std::setw(12) << table.y_metric << std::setw(10) << "y - x" << '\n';
    out << std::fixed << std::setprecision(4);
    for (auto const& r : table.rows)
        out << std::left << std::setw(24) << r.source << std::setw(16) << r.type << std::right << std::setw(10) << r.x
            << std::setw(12) << r.y << std::setw(10) << (r.y - r.x) << '\n';
    out << "bias: " << table.bias << " (" << table.rows.size() << " rows)\n";
    out << "bias where auroc = 1: ";
    if (table.bias_auroc_one) out << *table.bias_auroc_one;
    else out << "n/a";
    out << " (" << table.auroc_one_rows << " rows)\n";
    return out.str();
}

} // namespace wsauroc
