#pragma once

// File formats: score / quantity / frame / feature CSVs and the bundle manifest.

#include <wsauroc/error.hpp>
#include <wsauroc/knn_detector.hpp>
#include <wsauroc/severity_scores.hpp>
#include <wsauroc/vib_synth.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace wsauroc::io {

namespace fs = std::filesystem;

// --------------------------------------------------------------------------------------------------------------------
// Primitives
// --------------------------------------------------------------------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
inline auto format_double(double value) -> std::string
{
    char buffer[32];
    auto const [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, end);
}

inline auto trim(std::string_view s) -> std::string_view
{
    auto const first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    auto const last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline auto split_fields(std::string_view line) -> std::vector<std::string_view>
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true)
    {
        auto const comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

inline auto row_error(std::size_t row, std::string const& what) -> Error
{
    return Error{ErrorKind::parse_error, "row " + std::to_string(row) + ": " + what, row};
}

inline auto parse_real(std::string_view field, std::size_t row, std::string_view column) -> double
{
    double value{};
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    auto const [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty())
        throw row_error(row, "column '" + std::string{column} + "' is not a decimal number: '" + std::string{field} + "'");
    if (!std::isfinite(value)) throw row_error(row, "column '" + std::string{column} + "' is not finite");
    return value;
}

inline auto parse_count(std::string_view field, std::size_t row, std::string_view column) -> std::size_t
{
    std::size_t value{};
    auto const [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty())
        throw row_error(row, "column '" + std::string{column} + "' is not a non-negative integer: '" +
                                 std::string{field} + "'");
    return value;
}

/// Minimal header-driven CSV reader. Blank lines and lines starting with '#' are skipped; row numbers are
/// 1-based physical line numbers.
class CsvReader
{
public:
    explicit CsvReader(std::istream& in) : in_{in}
    {
        std::string line;
        while (std::getline(in_, line))
        {
            ++row_;
            auto const t = trim(line);
            if (t.empty()) continue;
            if (t.front() == '#')
            {
                comments_.emplace_back(t);
                continue;
            }
            for (auto f : split_fields(t)) header_.emplace_back(f);
            return;
        }
        throw Error{ErrorKind::parse_error, "missing CSV header row"};
    }

    auto column(std::string_view name) const -> std::optional<std::size_t>
    {
        for (std::size_t k = 0; k < header_.size(); ++k)
            if (header_[k] == name) return k;
        return std::nullopt;
    }

    auto require_column(std::string_view name) const -> std::size_t
    {
        if (auto c = column(name)) return *c;
        throw Error{ErrorKind::parse_error, "CSV header lacks required column '" + std::string{name} + "'"};
    }

    auto header() const noexcept -> std::vector<std::string> const& { return header_; }
    auto comments() const noexcept -> std::vector<std::string> const& { return comments_; }
    auto row() const noexcept -> std::size_t { return row_; }

    /// Next data row; false at end of input.
    auto next(std::vector<std::string_view>& fields) -> bool
    {
        while (std::getline(in_, line_))
        {
            ++row_;
            auto const t = trim(line_);
            if (t.empty() || t.front() == '#') continue;
            fields = split_fields(t);
            if (fields.size() != header_.size())
                throw row_error(row_, "expected " + std::to_string(header_.size()) + " fields, found " +
                                          std::to_string(fields.size()));
            return true;
        }
        return false;
    }

private:
    std::istream& in_;
    std::vector<std::string> header_;
    std::vector<std::string> comments_;
    std::string line_;
    std::size_t row_{};
};

inline auto open_input(fs::path const& path) -> std::ifstream
{
    std::ifstream in{path};
    if (!in) throw Error{ErrorKind::io_error, "cannot open '" + path.string() + "'"};
    return in;
}

/// Writes via a sibling temporary file and renames it into place.
inline auto atomic_write(fs::path const& path, std::string const& content) -> void
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        if (!out) throw Error{ErrorKind::io_error, "cannot write '" + tmp.string() + "'"};
        out << content;
        if (!out.flush()) throw Error{ErrorKind::io_error, "write failed for '" + tmp.string() + "'"};
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error{ErrorKind::io_error, "cannot move '" + tmp.string() + "' into place: " + ec.message()};
}

// --------------------------------------------------------------------------------------------------------------------
// Scores and quantities
// --------------------------------------------------------------------------------------------------------------------

inline constexpr std::string_view default_type_name = "all";

struct ScoreRecord
{
    double score{};
    std::size_t severity{};
    std::string fault; // empty when the file has no fault column
};

/// Columns `score`, `severity`, optional `fault`.
inline auto read_scores(std::istream& in) -> std::vector<ScoreRecord>
{
    CsvReader csv{in};
    auto const score_col = csv.require_column("score");
    auto const severity_col = csv.require_column("severity");
    auto const fault_col = csv.column("fault");

    std::vector<ScoreRecord> records;
    std::vector<std::string_view> fields;
    while (csv.next(fields))
    {
        ScoreRecord r{parse_real(fields[score_col], csv.row(), "score"),
                      parse_count(fields[severity_col], csv.row(), "severity"), {}};
        if (fault_col)
        {
            r.fault = std::string{fields[*fault_col]};
            if (r.fault.empty()) throw row_error(csv.row(), "empty fault name");
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) throw Error{ErrorKind::empty_input, "score file has no data rows"};
    return records;
}

inline auto read_scores(fs::path const& path) -> std::vector<ScoreRecord>
{
    auto in = open_input(path);
    return read_scores(in);
}

/// Named score sets in order of first appearance.
using TypedScoreSets = std::vector<std::pair<std::string, SeverityScoreSet>>;

inline auto group_by_type(std::vector<ScoreRecord> const& records) -> TypedScoreSets
{
    std::vector<std::string> order;
    std::map<std::string, std::vector<ScoreSample>> samples;
    for (auto const& r : records)
    {
        auto name = r.fault.empty() ? std::string{default_type_name} : r.fault;
        auto [it, inserted] = samples.try_emplace(name);
        if (inserted) order.push_back(name);
        it->second.push_back(ScoreSample{r.score, SeverityIndex{r.severity}});
    }

    TypedScoreSets sets;
    for (auto const& name : order)
    {
        try
        {
            sets.emplace_back(name, build_score_set(samples.at(name)));
        }
        catch (Error const& e)
        {
            throw Error{e.kind(), "anomaly type '" + name + "': " + e.what(), e.where()};
        }
    }
    return sets;
}

inline auto write_scores(std::ostream& out, std::vector<ScoreRecord> const& records) -> void
{
    bool const typed = !records.empty() && !records.front().fault.empty();
    out << (typed ? "score,severity,fault\n" : "score,severity\n");
    for (auto const& r : records)
    {
        out << format_double(r.score) << ',' << r.severity;
        if (typed) out << ',' << r.fault;
        out << '\n';
    }
}

/// Columns `severity`, `quantity`, optional `fault` and `unit`. Keyed by fault name ("" without a fault column).
inline auto read_quantities(std::istream& in) -> std::map<std::string, PhysicalQuantityMap>
{
    CsvReader csv{in};
    auto const severity_col = csv.require_column("severity");
    auto const quantity_col = csv.require_column("quantity");
    auto const fault_col = csv.column("fault");
    auto const unit_col = csv.column("unit");

    std::map<std::string, std::map<std::size_t, double>> levels;
    std::map<std::string, std::string> units;
    std::vector<std::string_view> fields;
    while (csv.next(fields))
    {
        auto const fault = fault_col ? std::string{fields[*fault_col]} : std::string{};
        auto const level = parse_count(fields[severity_col], csv.row(), "severity");
        auto const quantity = parse_real(fields[quantity_col], csv.row(), "quantity");
        if (!levels[fault].emplace(level, quantity).second)
            throw row_error(csv.row(), "duplicate quantity for severity " + std::to_string(level));
        if (unit_col) units[fault] = std::string{fields[*unit_col]};
    }
    if (levels.empty()) throw Error{ErrorKind::empty_input, "quantity file has no data rows"};

    std::map<std::string, PhysicalQuantityMap> out;
    for (auto const& [fault, by_level] : levels)
    {
        PhysicalQuantityMap q{{}, units[fault]};
        std::size_t expected = 0;
        for (auto const& [level, quantity] : by_level)
        {
            if (level != expected)
                throw Error{ErrorKind::non_contiguous_levels,
                            "quantity file misses severity " + std::to_string(expected) +
                                (fault.empty() ? std::string{} : " for '" + fault + "'"),
                            expected};
            q.quantities.push_back(quantity);
            ++expected;
        }
        out.emplace(fault, std::move(q));
    }
    return out;
}

inline auto read_quantities(fs::path const& path) -> std::map<std::string, PhysicalQuantityMap>
{
    auto in = open_input(path);
    return read_quantities(in);
}

inline auto write_quantities(std::ostream& out, std::map<FaultType, PhysicalQuantityMap> const& quantities) -> void
{
    out << "fault,severity,quantity,unit\n";
    for (auto type : all_fault_types)
    {
        auto const it = quantities.find(type);
        if (it == quantities.end()) continue;
        for (std::size_t level = 0; level < it->second.quantities.size(); ++level)
            out << to_string(type) << ',' << level << ',' << format_double(it->second.quantities[level]) << ','
                << it->second.unit << '\n';
    }
}

// --------------------------------------------------------------------------------------------------------------------
// Frames and features
// --------------------------------------------------------------------------------------------------------------------

/// Columns `t,ch0..ch{C-1}`.
inline auto write_frame(std::ostream& out, SignalFrame const& frame, double sample_rate) -> void
{
    out << 't';
    for (std::size_t ch = 0; ch < frame.channel_count(); ++ch) out << ",ch" << ch;
    out << '\n';
    for (std::size_t n = 0; n < frame.sample_count(); ++n)
    {
        out << format_double(static_cast<double>(n) / sample_rate);
        for (auto const& channel : frame.channels) out << ',' << format_double(channel[n]);
        out << '\n';
    }
}

inline auto read_frame(std::istream& in) -> SignalFrame
{
    CsvReader csv{in};
    std::vector<std::size_t> columns;
    for (std::size_t ch = 0;; ++ch)
    {
        auto c = csv.column("ch" + std::to_string(ch));
        if (!c) break;
        columns.push_back(*c);
    }
    if (columns.empty()) throw Error{ErrorKind::parse_error, "frame file has no channel columns"};

    SignalFrame frame;
    frame.channels.resize(columns.size());
    std::vector<std::string_view> fields;
    while (csv.next(fields))
        for (std::size_t ch = 0; ch < columns.size(); ++ch)
            frame.channels[ch].push_back(parse_real(fields[columns[ch]], csv.row(), csv.header()[columns[ch]]));
    if (frame.sample_count() == 0) throw Error{ErrorKind::empty_input, "frame file has no samples"};
    return frame;
}

inline auto layout_comment(FeatureLayout const& layout) -> std::string
{
    if (layout.values_per_slot == 2)
        return "# layout: channels=" + std::to_string(layout.channels) + " harmonics=" +
               std::to_string(layout.harmonics) + " interleave=mag,phase";
    return "# layout: channels=" + std::to_string(layout.channels) + " bands=" + std::to_string(layout.harmonics) +
           " interleave=energy";
}

inline auto parse_layout_comment(std::string_view line) -> FeatureLayout
{
    std::istringstream in{std::string{line}};
    std::string hash, tag, token;
    in >> hash >> tag;
    if (hash != "#" || tag != "layout:") throw Error{ErrorKind::parse_error, "not a layout comment"};
    FeatureLayout layout{0, 0, 0};
    while (in >> token)
    {
        auto const eq = token.find('=');
        if (eq == std::string::npos) throw Error{ErrorKind::parse_error, "malformed layout token '" + token + "'"};
        auto const key = token.substr(0, eq);
        auto const value = token.substr(eq + 1);
        if (key == "channels") layout.channels = parse_count(value, 0, key);
        else if (key == "harmonics" || key == "bands") layout.harmonics = parse_count(value, 0, key);
        else if (key == "interleave") layout.values_per_slot = value == "mag,phase" ? 2 : value == "energy" ? 1 : 0;
    }
    if (layout.channels == 0 || layout.harmonics == 0 || layout.values_per_slot == 0)
        throw Error{ErrorKind::parse_error, "incomplete layout comment"};
    return layout;
}

/// Flat layout: one vector per row, columns v0..v{L-1}, layout stored in a leading comment line.
inline auto write_features(std::ostream& out, std::vector<FeatureVector> const& vectors) -> void
{
    if (vectors.empty()) throw Error{ErrorKind::empty_input, "no feature vectors to write"};
    auto const layout = vectors.front().layout;
    out << layout_comment(layout) << '\n';
    for (std::size_t k = 0; k < layout.length(); ++k) out << (k ? ",v" : "v") << k;
    out << '\n';
    for (auto const& v : vectors)
    {
        if (!(v.layout == layout) || v.size() != layout.length())
            throw Error{ErrorKind::length_mismatch, "feature vectors disagree on layout"};
        for (std::size_t k = 0; k < v.size(); ++k) out << (k ? "," : "") << format_double(v.values[k]);
        out << '\n';
    }
}

inline auto read_features(std::istream& in) -> std::vector<FeatureVector>
{
    CsvReader csv{in};
    std::optional<FeatureLayout> layout;
    for (auto const& c : csv.comments())
        if (c.find("layout:") != std::string::npos) layout = parse_layout_comment(c);
    if (!layout) throw Error{ErrorKind::parse_error, "feature file lacks a '# layout:' comment"};
    if (csv.header().size() != layout->length())
        throw Error{ErrorKind::parse_error, "feature header has " + std::to_string(csv.header().size()) +
                                                " columns, layout implies " + std::to_string(layout->length())};
    for (std::size_t k = 0; k < csv.header().size(); ++k)
        if (csv.header()[k] != "v" + std::to_string(k))
            throw Error{ErrorKind::parse_error, "unexpected feature column '" + csv.header()[k] + "'"};

    std::vector<FeatureVector> vectors;
    std::vector<std::string_view> fields;
    while (csv.next(fields))
    {
        FeatureVector v{{}, *layout};
        for (std::size_t k = 0; k < fields.size(); ++k) v.values.push_back(parse_real(fields[k], csv.row(), csv.header()[k]));
        vectors.push_back(std::move(v));
    }
    return vectors;
}

// --------------------------------------------------------------------------------------------------------------------
// Bundles
// --------------------------------------------------------------------------------------------------------------------

inline constexpr std::string_view bundle_format = "wsauroc-bundle/1";

inline auto config_to_json(SynthConfig const& c) -> nlohmann::ordered_json
{
    nlohmann::ordered_json j;
    j["sample_rate"] = c.sample_rate;
    j["duration"] = c.duration;
    j["sample_count"] = c.sample_count();
    j["channels"] = c.channels;
    j["rotation_freq"] = c.rotation_freq;
    j["bpfi_freq"] = c.bpfi_freq;
    j["bpfo_freq"] = c.bpfo_freq;
    j["effective_bpfi"] = c.effective_bpfi();
    j["effective_bpfo"] = c.effective_bpfo();
    j["noise_sigma"] = c.noise_sigma;
    j["baseline_harmonic_amps"] = c.baseline_harmonic_amps;
    j["fault_gain"] = {{"unbalance", c.fault_gain.unbalance},
                       {"misalignment", c.fault_gain.misalignment},
                       {"bpfi", c.fault_gain.bpfi},
                       {"bpfo", c.fault_gain.bpfo}};
    j["bearing_rolloff"] = c.bearing_rolloff;
    j["seed"] = c.seed;
    return j;
}

inline auto config_from_json(nlohmann::json const& j) -> SynthConfig
{
    SynthConfig c;
    c.sample_rate = j.at("sample_rate").get<double>();
    c.duration = j.at("duration").get<double>();
    c.channels = j.at("channels").get<std::size_t>();
    c.rotation_freq = j.at("rotation_freq").get<double>();
    c.bpfi_freq = j.at("bpfi_freq").get<double>();
    c.bpfo_freq = j.at("bpfo_freq").get<double>();
    c.noise_sigma = j.at("noise_sigma").get<double>();
    c.baseline_harmonic_amps = j.at("baseline_harmonic_amps").get<std::vector<double>>();
    auto const& g = j.at("fault_gain");
    c.fault_gain = FaultGains{g.at("unbalance").get<double>(), g.at("misalignment").get<double>(),
                              g.at("bpfi").get<double>(), g.at("bpfo").get<double>()};
    c.bearing_rolloff = j.at("bearing_rolloff").get<std::array<double, feature_harmonics>>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline auto frame_file_name(std::uint64_t frame_index) -> std::string
{
    char name[32];
    std::snprintf(name, sizeof name, "frames/frame_%05llu.csv", static_cast<unsigned long long>(frame_index));
    return name;
}

inline auto manifest_json(ExperimentBundle const& bundle) -> nlohmann::ordered_json
{
    nlohmann::ordered_json j;
    j["format"] = bundle_format;
    j["seed"] = bundle.config.seed;
    j["config"] = config_to_json(bundle.config);
    auto& q = j["quantities"] = nlohmann::ordered_json::object();
    for (auto type : all_fault_types)
        if (auto it = bundle.quantities.find(type); it != bundle.quantities.end())
            q[to_string(type)] = {{"unit", it->second.unit}, {"values", it->second.quantities}};
    q["file"] = "quantities.csv";
    auto& frames = j["frames"] = nlohmann::ordered_json::array();
    for (auto const& f : bundle.frames)
    {
        nlohmann::ordered_json e;
        e["file"] = frame_file_name(f.frame_index);
        e["split"] = to_string(f.split);
        e["fault"] = f.fault ? nlohmann::ordered_json(to_string(*f.fault)) : nlohmann::ordered_json(nullptr);
        e["severity_index"] = f.severity_index;
        e["severity_quantity"] = f.severity_quantity;
        e["frame_index"] = f.frame_index;
        frames.push_back(std::move(e));
    }
    return j;
}

/// Writes frame CSVs, quantities.csv and finally manifest.json (its presence marks a complete bundle).
inline auto write_bundle(fs::path const& dir, ExperimentBundle const& bundle) -> void
{
    std::error_code ec;
    fs::create_directories(dir / "frames", ec);
    if (ec) throw Error{ErrorKind::io_error, "cannot create '" + (dir / "frames").string() + "': " + ec.message()};
    fs::remove(dir / "manifest.json", ec);

    for (auto const& f : bundle.frames)
    {
        std::ostringstream out;
        write_frame(out, f.signal, bundle.config.sample_rate);
        atomic_write(dir / frame_file_name(f.frame_index), out.str());
    }
    std::ostringstream quantities;
    write_quantities(quantities, bundle.quantities);
    atomic_write(dir / "quantities.csv", quantities.str());
    atomic_write(dir / "manifest.json", manifest_json(bundle).dump(2) + "\n");
}

inline auto read_bundle(fs::path const& dir) -> ExperimentBundle
{
    auto in = open_input(dir / "manifest.json");
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(in);
        if (j.at("format").get<std::string>() != bundle_format)
            throw Error{ErrorKind::parse_error, "unsupported bundle format"};

        ExperimentBundle bundle;
        bundle.config = config_from_json(j.at("config"));
        for (auto const& [name, q] : j.at("quantities").items())
        {
            if (name == "file") continue;
            bundle.quantities[parse_fault_type(name)] =
                PhysicalQuantityMap{q.at("values").get<std::vector<double>>(), q.at("unit").get<std::string>()};
        }
        for (auto const& e : j.at("frames"))
        {
            LabeledFrame f;
            f.split = parse_split(e.at("split").get<std::string>());
            if (!e.at("fault").is_null()) f.fault = parse_fault_type(e.at("fault").get<std::string>());
            f.severity_index = e.at("severity_index").get<std::size_t>();
            f.severity_quantity = e.at("severity_quantity").get<double>();
            f.frame_index = e.at("frame_index").get<std::uint64_t>();
            auto frame_in = open_input(dir / e.at("file").get<std::string>());
            try
            {
                f.signal = read_frame(frame_in);
            }
            catch (Error const& err)
            {
                throw Error{err.kind(), e.at("file").get<std::string>() + ": " + err.what(), err.where()};
            }
            if (f.signal.channel_count() != bundle.config.channels)
                throw Error{ErrorKind::parse_error, e.at("file").get<std::string>() + ": channel count differs from manifest"};
            bundle.frames.push_back(std::move(f));
        }
        return bundle;
    }
    catch (nlohmann::json::exception const& e)
    {
        throw Error{ErrorKind::parse_error, std::string{"malformed manifest: "} + e.what()};
    }
}

} // namespace wsauroc::io
