#pragma once

// Seeded synthetic multichannel vibration with injected machine faults, plus the spectral
// front end (one-sided FFT, band energies) used by the detectors.
//
// Each channel is a harmonic series at the rotation frequency f_r, plus a fault component,
// plus white Gaussian noise:
//   unbalance     raises f_r                         (in phase with the baseline)
//   misalignment  raises 2 f_r and 4 f_r             (in phase with the baseline)
//   BPFI / BPFO   adds harmonics 1..4 of the bearing frequency with rolloff 1, 1/2, 1/4, 1/8
// Fault amplitude is gain * physical quantity. The default configuration places f_r exactly on
// DFT bin 32 and rounds the bearing frequencies to the nearest bin, so nearest-bin feature
// lookup sees no leakage.
//
// Randomness: baseline and bearing phases come from a per-seed stream shared by all frames;
// noise comes from a per-(seed, frame index) stream. Streams are std::mt19937_64 seeded
// through splitmix64; Gaussian draws use Box-Muller on 53-bit uniforms.

#include <wsauroc/error.hpp>
#include <wsauroc/knn_detector.hpp>
#include <wsauroc/severity_scores.hpp>

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wsauroc {

enum class FaultType { unbalance, misalignment, bpfi, bpfo };

inline constexpr std::array all_fault_types{FaultType::unbalance, FaultType::bpfi, FaultType::bpfo,
                                            FaultType::misalignment};

inline auto to_string(FaultType type) -> std::string
{
    switch (type)
    {
    case FaultType::unbalance: return "unbalance";
    case FaultType::misalignment: return "misalignment";
    case FaultType::bpfi: return "bpfi";
    case FaultType::bpfo: return "bpfo";
    }
    return "unknown";
}

inline auto parse_fault_type(std::string_view name) -> FaultType
{
    for (auto type : all_fault_types)
        if (to_string(type) == name) return type;
    throw Error{ErrorKind::parse_error, "unknown fault type '" + std::string{name} + "'"};
}

/// Physical quantity unit per fault type.
inline auto quantity_unit(FaultType type) -> std::string { return type == FaultType::unbalance ? "mg" : "mm"; }

struct FaultSpec
{
    FaultType type{FaultType::unbalance};
    double severity_quantity{}; // 0 = normal condition
};

/// Amplitude added per unit physical quantity (per mg for unbalance, per mm otherwise).
struct FaultGains
{
    double unbalance{1.0e-4};
    double misalignment{1.0};
    double bpfi{10.0};
    double bpfo{10.0};

    auto of(FaultType type) const -> double
    {
        switch (type)
        {
        case FaultType::unbalance: return unbalance;
        case FaultType::misalignment: return misalignment;
        case FaultType::bpfi: return bpfi;
        case FaultType::bpfo: return bpfo;
        }
        return 0.0;
    }
};

inline constexpr std::size_t feature_harmonics = 4;

struct SynthConfig
{
    static constexpr double default_rotation = 50.17;
    static constexpr std::size_t default_cycles = 32;
    static constexpr std::size_t default_samples = 4096;

    // duration spans an integer number of rotation cycles so f_r lands on a bin
    double duration{static_cast<double>(default_cycles) / default_rotation};
    double sample_rate{static_cast<double>(default_samples) * default_rotation / static_cast<double>(default_cycles)};
    std::size_t channels{4};
    double rotation_freq{default_rotation};
    double bpfi_freq{272.07};
    double bpfo_freq{179.43};
    double noise_sigma{0.05};
    std::vector<double> baseline_harmonic_amps{1.0, 0.5, 0.25, 0.1};
    FaultGains fault_gain{};
    std::array<double, feature_harmonics> bearing_rolloff{1.0, 0.5, 0.25, 0.125};
    std::uint64_t seed{0};

    /// Config with `samples` points covering exactly `cycles` rotations.
    static auto bin_aligned(double rotation_freq, std::size_t cycles, std::size_t samples) -> SynthConfig
    {
        SynthConfig config;
        config.rotation_freq = rotation_freq;
        config.duration = static_cast<double>(cycles) / rotation_freq;
        config.sample_rate = static_cast<double>(samples) * rotation_freq / static_cast<double>(cycles);
        return config;
    }

    auto sample_count() const -> std::size_t { return static_cast<std::size_t>(std::llround(sample_rate * duration)); }

    auto frequency_resolution() const -> double { return sample_rate / static_cast<double>(sample_count()); }

    /// `frequency` rounded to the nearest DFT bin centre.
    auto bin_aligned_frequency(double frequency) const -> double
    {
        double const df = frequency_resolution();
        return std::round(frequency / df) * df;
    }

    auto effective_bpfi() const -> double { return bin_aligned_frequency(bpfi_freq); }
    auto effective_bpfo() const -> double { return bin_aligned_frequency(bpfo_freq); }

    auto validate() const -> void
    {
        if (!(duration > 0.0)) throw Error{ErrorKind::invalid_argument, "duration must be positive"};
        if (!(sample_rate > 0.0)) throw Error{ErrorKind::invalid_argument, "sample rate must be positive"};
        if (channels < 1) throw Error{ErrorKind::invalid_argument, "need at least one channel"};
        if (!(rotation_freq > 0.0 && bpfi_freq > 0.0 && bpfo_freq > 0.0))
            throw Error{ErrorKind::invalid_argument, "fault frequencies must be positive"};
        if (!(noise_sigma >= 0.0)) throw Error{ErrorKind::invalid_argument, "noise sigma must be non-negative"};

        double const max_freq = std::max({rotation_freq, bpfi_freq, bpfo_freq});
        double const min_freq = std::min({rotation_freq, bpfi_freq, bpfo_freq});
        if (!(sample_rate > 2.0 * static_cast<double>(feature_harmonics) * max_freq))
            throw Error{ErrorKind::invalid_argument,
                        "sample rate " + std::to_string(sample_rate) + " Hz violates Nyquist for harmonic " +
                            std::to_string(feature_harmonics) + " of " + std::to_string(max_freq) + " Hz"};
        if (duration * min_freq < 1.0)
            throw Error{ErrorKind::invalid_argument, "duration shorter than one period of the slowest fault frequency"};
        if (sample_count() < 2) throw Error{ErrorKind::invalid_argument, "fewer than two samples per frame"};
    }
};

/// channels x samples time series
struct SignalFrame
{
    std::vector<std::vector<double>> channels;

    auto channel_count() const noexcept -> std::size_t { return channels.size(); }
    auto sample_count() const noexcept -> std::size_t { return channels.empty() ? 0 : channels.front().size(); }
};

namespace detail {

inline auto splitmix64(std::uint64_t x) -> std::uint64_t
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline auto stream_engine(std::uint64_t seed, std::uint64_t stream) -> std::mt19937_64
{
    return std::mt19937_64{splitmix64(splitmix64(seed) ^ stream)};
}

// uniform in [0, 1)
inline auto uniform53(std::mt19937_64& rng) -> double { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline auto uniform_phase(std::mt19937_64& rng) -> double
{
    return (2.0 * uniform53(rng) - 1.0) * std::numbers::pi;
}

inline auto gaussian_pair(std::mt19937_64& rng) -> std::array<double, 2>
{
    double const u1 = 1.0 - uniform53(rng); // (0, 1]
    double const u2 = uniform53(rng);
    double const radius = std::sqrt(-2.0 * std::log(u1));
    double const angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

// streams 0..2^32 are frame noise; phase tables live above
inline constexpr std::uint64_t phase_stream = 0xFFFF'0000'0000'0001ull;

struct PhaseTable
{
    std::vector<std::vector<double>> baseline;                                 // [channel][harmonic]
    std::map<FaultType, std::vector<std::array<double, feature_harmonics>>> bearing; // [channel][harmonic]
};

inline auto make_phase_table(SynthConfig const& config) -> PhaseTable
{
    auto rng = stream_engine(config.seed, phase_stream);
    PhaseTable table;
    std::size_t const harmonics = std::max(config.baseline_harmonic_amps.size(), feature_harmonics);
    table.baseline.assign(config.channels, std::vector<double>(harmonics));
    for (auto& channel : table.baseline)
        for (auto& phase : channel) phase = uniform_phase(rng);
    for (auto type : {FaultType::bpfi, FaultType::bpfo})
    {
        auto& channels = table.bearing[type];
        channels.resize(config.channels);
        for (auto& channel : channels)
            for (auto& phase : channel) phase = uniform_phase(rng);
    }
    return table;
}

inline auto add_tone(std::vector<double>& signal, double sample_rate, double frequency, double amplitude,
                     double phase) -> void
{
    if (amplitude == 0.0) return;
    double const omega = 2.0 * std::numbers::pi * frequency / sample_rate;
    for (std::size_t n = 0; n < signal.size(); ++n)
        signal[n] += amplitude * std::cos(omega * static_cast<double>(n) + phase);
}

} // namespace detail

/// Deterministic in (config, fault, frame_index).
inline auto synthesize(SynthConfig const& config, FaultSpec const& fault, std::uint64_t frame_index = 0) -> SignalFrame
{
    config.validate();
    if (!(fault.severity_quantity >= 0.0) || !std::isfinite(fault.severity_quantity))
        throw Error{ErrorKind::invalid_argument, "severity quantity must be finite and non-negative"};

    auto const phases = detail::make_phase_table(config);
    auto const samples = config.sample_count();
    double const fs = config.sample_rate;
    double const fr = config.rotation_freq;
    double const amplitude = config.fault_gain.of(fault.type) * fault.severity_quantity;

    SignalFrame frame;
    frame.channels.assign(config.channels, std::vector<double>(samples, 0.0));
    for (std::size_t ch = 0; ch < config.channels; ++ch)
    {
        auto& signal = frame.channels[ch];
        auto const& base_phase = phases.baseline[ch];
        for (std::size_t h = 0; h < config.baseline_harmonic_amps.size(); ++h)
            detail::add_tone(signal, fs, static_cast<double>(h + 1) * fr, config.baseline_harmonic_amps[h], base_phase[h]);

        if (amplitude > 0.0)
        {
            switch (fault.type)
            {
            case FaultType::unbalance: detail::add_tone(signal, fs, fr, amplitude, base_phase[0]); break;
            case FaultType::misalignment:
                detail::add_tone(signal, fs, 2.0 * fr, amplitude, base_phase[1]);
                detail::add_tone(signal, fs, 4.0 * fr, amplitude, base_phase[3]);
                break;
            case FaultType::bpfi:
            case FaultType::bpfo:
            {
                double const fb = fault.type == FaultType::bpfi ? config.effective_bpfi() : config.effective_bpfo();
                auto const& bearing_phase = phases.bearing.at(fault.type)[ch];
                for (std::size_t k = 0; k < feature_harmonics; ++k)
                    detail::add_tone(signal, fs, static_cast<double>(k + 1) * fb, amplitude * config.bearing_rolloff[k],
                                     bearing_phase[k]);
                break;
            }
            }
        }
    }

    if (config.noise_sigma > 0.0)
    {
        auto rng = detail::stream_engine(config.seed, frame_index);
        for (auto& signal : frame.channels)
            for (std::size_t n = 0; n < samples; n += 2)
            {
                auto const [g0, g1] = detail::gaussian_pair(rng);
                signal[n] += config.noise_sigma * g0;
                if (n + 1 < samples) signal[n + 1] += config.noise_sigma * g1;
            }
    }
    return frame;
}

namespace detail {

inline auto fftw_planner_mutex() -> std::mutex&
{
    static std::mutex m;
    return m;
}

} // namespace detail

/// One-sided amplitude spectrum: bins 0..N/2 at k * sample_rate / N. Interior bins are scaled by 2/N and
/// DC/Nyquist by 1/N, so a unit-amplitude on-bin sinusoid reads 1.
inline auto extract_spectrum(SignalFrame const& frame, double sample_rate) -> SpectrumFrame
{
    if (frame.channel_count() == 0) throw Error{ErrorKind::empty_input, "signal frame has no channels"};
    auto const n = frame.sample_count();
    if (n < 2) throw Error{ErrorKind::empty_input, "signal frame needs at least two samples"};
    if (!(sample_rate > 0.0)) throw Error{ErrorKind::invalid_argument, "sample rate must be positive"};
    for (auto const& ch : frame.channels)
        if (ch.size() != n) throw Error{ErrorKind::length_mismatch, "signal channels differ in length"};

    auto const bins = n / 2 + 1;
    auto* in = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins));
    fftw_plan plan{};
    {
        std::lock_guard lock{detail::fftw_planner_mutex()};
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }

    SpectrumFrame spectrum;
    spectrum.frequencies.resize(bins);
    for (std::size_t k = 0; k < bins; ++k)
        spectrum.frequencies[k] = static_cast<double>(k) * sample_rate / static_cast<double>(n);

    for (auto const& channel : frame.channels)
    {
        std::copy(channel.begin(), channel.end(), in);
        fftw_execute(plan);
        std::vector<double> magnitude(bins);
        std::vector<double> phase(bins);
        for (std::size_t k = 0; k < bins; ++k)
        {
            bool const edge = k == 0 || (n % 2 == 0 && k == n / 2);
            double const scale = (edge ? 1.0 : 2.0) / static_cast<double>(n);
            magnitude[k] = scale * std::hypot(out[k][0], out[k][1]);
            phase[k] = wrap_phase(std::atan2(out[k][1], out[k][0]));
        }
        spectrum.magnitudes.push_back(std::move(magnitude));
        spectrum.phases.push_back(std::move(phase));
    }

    {
        std::lock_guard lock{detail::fftw_planner_mutex()};
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return spectrum;
}

/// 16 equal bands over [0, 1000] Hz.
inline auto default_band_edges() -> std::vector<double>
{
    std::vector<double> edges;
    for (int k = 0; k <= 16; ++k) edges.push_back(62.5 * k);
    return edges;
}

/// log(1 + summed magnitude) per band, one feature vector per channel. Bands are [lo, hi) except the
/// last, which includes its upper edge.
inline auto band_energy_features(SpectrumFrame const& frame, std::span<double const> band_edges,
                                 double max_freq = 1000.0) -> std::vector<FeatureVector>
{
    if (frame.channel_count() == 0 || frame.bin_count() == 0)
        throw Error{ErrorKind::empty_input, "spectrum frame is empty"};
    if (band_edges.size() < 2) throw Error{ErrorKind::invalid_argument, "need at least two band edges"};
    for (std::size_t k = 0; k + 1 < band_edges.size(); ++k)
        if (!(band_edges[k] < band_edges[k + 1]))
            throw Error{ErrorKind::invalid_argument, "band edges must be strictly increasing", k};
    if (band_edges.front() < 0.0 || band_edges.back() > max_freq || band_edges.back() > frame.frequencies.back())
        throw Error{ErrorKind::out_of_range, "band edges outside [0, max_freq] or beyond the spectrum"};

    auto const bands = band_edges.size() - 1;
    auto const& grid = frame.frequencies;
    std::vector<std::size_t> first(bands), last(bands); // bin range [first, last)
    for (std::size_t b = 0; b < bands; ++b)
    {
        first[b] = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), band_edges[b]) - grid.begin());
        auto const upper = b + 1 == bands ? std::upper_bound(grid.begin(), grid.end(), band_edges[b + 1])
                                          : std::lower_bound(grid.begin(), grid.end(), band_edges[b + 1]);
        last[b] = static_cast<std::size_t>(upper - grid.begin());
        if (first[b] >= last[b])
            throw Error{ErrorKind::invalid_argument, "band " + std::to_string(b) + " contains no frequency bins", b};
    }

    std::vector<FeatureVector> out;
    out.reserve(frame.channel_count());
    for (auto const& magnitude : frame.magnitudes)
    {
        FeatureVector fv{{}, FeatureLayout{1, bands, 1}};
        fv.values.reserve(bands);
        for (std::size_t b = 0; b < bands; ++b)
        {
            double sum = 0.0;
            for (auto k = first[b]; k < last[b]; ++k) sum += magnitude[k];
            fv.values.push_back(std::log1p(sum));
        }
        out.push_back(std::move(fv));
    }
    return out;
}

// --------------------------------------------------------------------------------------------------------------------
// Experiment bundles
// --------------------------------------------------------------------------------------------------------------------

enum class Split { train, val, test };

inline auto to_string(Split split) -> std::string
{
    switch (split)
    {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "unknown";
}

inline auto parse_split(std::string_view name) -> Split
{
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    throw Error{ErrorKind::parse_error, "unknown split '" + std::string{name} + "'"};
}

/// Severity ladders (physical quantities of levels 1..n) used by the test bed.
inline auto default_severity_ladder(FaultType type) -> std::vector<double>
{
    switch (type)
    {
    case FaultType::unbalance: return {583.0, 1169.0, 1751.0, 2239.0, 3318.0};
    case FaultType::misalignment: return {0.1, 0.3, 0.5};
    case FaultType::bpfi:
    case FaultType::bpfo: return {0.3, 1.0, 3.0};
    }
    return {};
}

struct ExperimentDesign
{
    std::size_t train_normals{48};
    std::size_t val_normals{6};
    std::size_t test_normals_per_type{6};
    std::size_t test_per_level{6};
    std::vector<FaultType> fault_types{all_fault_types.begin(), all_fault_types.end()};

    /// Counts of the original test bed (desk scale x 9).
    static auto full_scale() -> ExperimentDesign { return ExperimentDesign{432, 54, 54, 54}; }
};

struct LabeledFrame
{
    SignalFrame signal;
    Split split{Split::train};
    std::optional<FaultType> fault; // empty for train/val normals
    std::size_t severity_index{};
    double severity_quantity{};
    std::uint64_t frame_index{};
};

struct ExperimentBundle
{
    SynthConfig config;
    std::vector<LabeledFrame> frames;
    std::map<FaultType, PhysicalQuantityMap> quantities; // w_0 = 0 prepended
};

/// Train/validation normals followed by, per fault type, its test normals and test_per_level frames per
/// severity level. Frame indices are assigned in that order and seed the per-frame noise.
inline auto make_experiment(SynthConfig const& config, ExperimentDesign const& design = {}) -> ExperimentBundle
{
    config.validate();
    if (design.train_normals < 1 || design.val_normals < 1 || design.test_normals_per_type < 1 ||
        design.test_per_level < 1)
        throw Error{ErrorKind::invalid_argument, "experiment counts must be at least 1"};

    ExperimentBundle bundle;
    bundle.config = config;
    std::uint64_t index = 0;
    auto add = [&](Split split, std::optional<FaultType> fault, std::size_t level, double quantity) {
        FaultSpec const spec{fault.value_or(FaultType::unbalance), quantity};
        bundle.frames.push_back(LabeledFrame{synthesize(config, spec, index), split, fault, level, quantity, index});
        ++index;
    };

    for (std::size_t k = 0; k < design.train_normals; ++k) add(Split::train, std::nullopt, 0, 0.0);
    for (std::size_t k = 0; k < design.val_normals; ++k) add(Split::val, std::nullopt, 0, 0.0);
    for (auto type : design.fault_types)
    {
        auto const ladder = default_severity_ladder(type);
        PhysicalQuantityMap q{{0.0}, quantity_unit(type)};
        q.quantities.insert(q.quantities.end(), ladder.begin(), ladder.end());
        bundle.quantities[type] = q;

        for (std::size_t k = 0; k < design.test_normals_per_type; ++k) add(Split::test, type, 0, 0.0);
        for (std::size_t level = 1; level <= ladder.size(); ++level)
            for (std::size_t k = 0; k < design.test_per_level; ++k) add(Split::test, type, level, ladder[level - 1]);
    }
    return bundle;
}

} // namespace wsauroc
