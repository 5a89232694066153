// wsauroc command-line tool: metrics, synth, detect, histogram, bias, features.
//
// Exit status: 0 success, 2 usage or data error, 1 internal error.

#include <wsauroc/detect.hpp>
#include <wsauroc/io.hpp>
#include <wsauroc/report.hpp>
#include <wsauroc/vib_synth.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace wsauroc;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_usage = 2;

auto write_output(std::optional<std::string> const& path, std::string const& content) -> void
{
    if (path) io::atomic_write(*path, content);
    else std::cout << content;
}

struct MetricsArgs
{
    std::string scores;
    std::optional<std::string> quantities;
    std::vector<std::string> schemes;
    std::optional<std::string> out;
    bool json = false;
};

auto run_metrics(MetricsArgs const& args) -> int
{
    auto const sets = io::group_by_type(io::read_scores(fs::path{args.scores}));
    std::map<std::string, PhysicalQuantityMap> quantities;
    if (args.quantities) quantities = io::read_quantities(fs::path{*args.quantities});

    std::vector<SchemeKind> schemes;
    for (auto const& s : args.schemes) schemes.push_back(parse_scheme_kind(s));
    if (schemes.empty())
    {
        schemes = {SchemeKind::uniform, SchemeKind::index};
        if (args.quantities) schemes.push_back(SchemeKind::physics);
    }
    for (auto kind : schemes)
        if (kind == SchemeKind::physics && !args.quantities)
            throw Error{ErrorKind::invalid_argument, "--scheme physics requires --quantities <file>"};

    auto const report = compute_report(sets, quantities, schemes);
    auto const json = to_json(report).dump(2) + "\n";
    if (args.out) io::atomic_write(*args.out, json);
    std::cout << (args.json ? json : to_text(report));
    return exit_ok;
}

struct SynthArgs
{
    std::string out;
    std::uint64_t seed = 0;
    bool full_scale = false;
    std::optional<double> sample_rate;
    std::optional<double> duration;
    std::optional<double> noise_sigma;
    std::optional<std::size_t> channels;
};

auto run_synth(SynthArgs const& args) -> int
{
    SynthConfig config;
    config.seed = args.seed;
    if (args.sample_rate) config.sample_rate = *args.sample_rate;
    if (args.duration) config.duration = *args.duration;
    if (args.noise_sigma) config.noise_sigma = *args.noise_sigma;
    if (args.channels) config.channels = *args.channels;
    config.validate();

    auto const design = args.full_scale ? ExperimentDesign::full_scale() : ExperimentDesign{};
    auto const bundle = make_experiment(config, design);
    io::write_bundle(args.out, bundle);

    std::size_t train = 0, val = 0, test = 0;
    for (auto const& f : bundle.frames)
        (f.split == Split::train ? train : f.split == Split::val ? val : test) += 1;
    std::cout << "wrote " << bundle.frames.size() << " frames (" << train << " train, " << val << " val, " << test
              << " test) to " << args.out << "\n";
    return exit_ok;
}

struct DetectArgs
{
    std::string bundle;
    std::vector<std::string> members;
    std::optional<std::string> out;
};

auto run_detect(DetectArgs const& args) -> int
{
    std::vector<Member> members;
    for (auto const& m : args.members) members.push_back(parse_member(m));
    if (members.empty()) throw Error{ErrorKind::invalid_argument, "--members needs at least one member"};

    auto const bundle = io::read_bundle(args.bundle);
    BundleSpectra const spectra{bundle};
    auto const events = spectra.ensemble_scores(members);

    std::vector<io::ScoreRecord> records;
    records.reserve(events.size());
    for (auto const& e : events) records.push_back(io::ScoreRecord{e.score, e.severity_index, to_string(e.fault)});
    std::ostringstream csv;
    io::write_scores(csv, records);
    write_output(args.out, csv.str());
    return exit_ok;
}

struct HistogramArgs
{
    std::string scores;
    std::size_t bins = 10;
    std::optional<std::string> fault;
    std::optional<std::string> out;
};

auto run_histogram(HistogramArgs const& args) -> int
{
    if (args.bins < 1) throw Error{ErrorKind::invalid_argument, "--bins must be at least 1"};
    auto const sets = io::group_by_type(io::read_scores(fs::path{args.scores}));

    SeverityScoreSet const* chosen = nullptr;
    if (args.fault)
    {
        for (auto const& [name, set] : sets)
            if (name == *args.fault) chosen = &set;
        if (!chosen) throw Error{ErrorKind::invalid_argument, "no anomaly type '" + *args.fault + "' in score file"};
    }
    else
    {
        if (sets.size() != 1)
            throw Error{ErrorKind::invalid_argument, "score file holds several anomaly types; pick one with --fault"};
        chosen = &sets.front().second;
    }

    std::ostringstream csv;
    write_histogram(csv, score_histogram(*chosen, args.bins));
    write_output(args.out, csv.str());
    return exit_ok;
}

struct BiasArgs
{
    std::vector<std::string> reports;
    std::string x = "auroc";
    std::string y = "ws_auroc_p";
    std::optional<std::string> out;
};

auto run_bias(BiasArgs const& args) -> int
{
    if (args.reports.size() < 2) throw Error{ErrorKind::invalid_argument, "bias needs at least two metric reports"};
    std::vector<std::pair<std::string, nlohmann::json>> reports;
    for (auto const& path : args.reports)
    {
        auto in = io::open_input(path);
        try
        {
            reports.emplace_back(fs::path{path}.filename().string(), nlohmann::json::parse(in));
        }
        catch (nlohmann::json::exception const& e)
        {
            throw Error{ErrorKind::parse_error, path + ": " + e.what()};
        }
    }
    auto const table = bias_table(collect_bias_rows(reports, args.x, args.y), args.x, args.y);
    if (args.out) io::atomic_write(*args.out, to_json(table).dump(2) + "\n");
    std::cout << to_text(table);
    return exit_ok;
}

struct FeaturesArgs
{
    std::string bundle;
    std::string member = "rotation";
    std::string split = "test";
    std::optional<std::string> out;
};

auto run_features(FeaturesArgs const& args) -> int
{
    auto const member = parse_member(args.member);
    if (member == Member::band) throw Error{ErrorKind::invalid_argument, "feature export covers harmonic members only"};
    auto const split = parse_split(args.split);
    auto const bundle = io::read_bundle(args.bundle);
    auto const& c = bundle.config;
    double const base = member == Member::rotation ? c.rotation_freq
                        : member == Member::bpfi   ? c.effective_bpfi()
                                                   : c.effective_bpfo();

    std::vector<FeatureVector> vectors;
    for (auto const& f : bundle.frames)
        if (f.split == split)
            vectors.push_back(harmonic_features(extract_spectrum(f.signal, c.sample_rate), base, feature_harmonics));
    std::ostringstream csv;
    io::write_features(csv, vectors);
    write_output(args.out, csv.str());
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Severity-aware evaluation of anomaly detectors (WS-AUROC) with a synthetic vibration test bed"};
    app.require_subcommand(1);

    MetricsArgs metrics;
    auto* metrics_cmd = app.add_subcommand("metrics", "AUROC and WS-AUROC report for a score file");
    metrics_cmd->add_option("scores", metrics.scores, "CSV with columns score,severity[,fault]")->required();
    metrics_cmd->add_option("--quantities", metrics.quantities, "CSV with columns [fault,]severity,quantity[,unit]");
    metrics_cmd->add_option("--scheme", metrics.schemes, "uniform|index|physics (repeatable)")
        ->check(CLI::IsMember({"uniform", "index", "physics"}));
    metrics_cmd->add_option("--out", metrics.out, "write the JSON report here");
    metrics_cmd->add_flag("--json", metrics.json, "print JSON instead of the text table");

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic vibration bundle");
    synth_cmd->add_option("--out", synth.out, "bundle directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "64-bit seed");
    synth_cmd->add_flag("--full-scale", synth.full_scale, "test-bed sample counts instead of desk scale");
    synth_cmd->add_option("--sample-rate", synth.sample_rate, "Hz");
    synth_cmd->add_option("--duration", synth.duration, "seconds");
    synth_cmd->add_option("--noise-sigma", synth.noise_sigma, "white noise standard deviation");
    synth_cmd->add_option("--channels", synth.channels, "accelerometer channels");

    DetectArgs detect;
    auto* detect_cmd = app.add_subcommand("detect", "score a bundle's test frames with a KNN ensemble");
    detect_cmd->add_option("bundle", detect.bundle, "bundle directory")->required();
    detect_cmd->add_option("--members", detect.members, "rotation,bpfi,bpfo,band")->delimiter(',')->required();
    detect_cmd->add_option("--out", detect.out, "score CSV (stdout if omitted)");

    HistogramArgs histogram;
    auto* histogram_cmd = app.add_subcommand("histogram", "per-severity score histogram with shared bins");
    histogram_cmd->add_option("scores", histogram.scores, "score CSV")->required();
    histogram_cmd->add_option("--bins", histogram.bins, "number of equal-width bins");
    histogram_cmd->add_option("--fault", histogram.fault, "anomaly type to export");
    histogram_cmd->add_option("--out", histogram.out, "CSV output (stdout if omitted)");

    BiasArgs bias;
    auto* bias_cmd = app.add_subcommand("bias", "mean(y - x) over metric reports");
    bias_cmd->add_option("reports", bias.reports, "metric report JSON files")->required();
    bias_cmd->add_option("--x", bias.x, "x metric (auroc, ws_auroc_u, ws_auroc_i, ws_auroc_p)");
    bias_cmd->add_option("--y", bias.y, "y metric");
    bias_cmd->add_option("--out", bias.out, "write the bias summary as JSON");

    FeaturesArgs features;
    auto* features_cmd = app.add_subcommand("features", "export harmonic feature vectors of a bundle split");
    features_cmd->add_option("bundle", features.bundle, "bundle directory")->required();
    features_cmd->add_option("--member", features.member, "rotation|bpfi|bpfo");
    features_cmd->add_option("--split", features.split, "train|val|test");
    features_cmd->add_option("--out", features.out, "feature CSV (stdout if omitted)");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        auto const code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try
    {
        if (*metrics_cmd) return run_metrics(metrics);
        if (*synth_cmd) return run_synth(synth);
        if (*detect_cmd) return run_detect(detect);
        if (*histogram_cmd) return run_histogram(histogram);
        if (*bias_cmd) return run_bias(bias);
        if (*features_cmd) return run_features(features);
    }
    catch (Error const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    catch (std::exception const& e)
    {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
    return exit_internal;
}
