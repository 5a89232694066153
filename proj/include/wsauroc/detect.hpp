#pragma once

// Ensemble detector over an experiment bundle. Members:
//   rotation, bpfi, bpfo  harmonic magnitude/phase vectors (all channels concatenated) at f_r or the
//                         bin-aligned bearing frequency, one KNN per member
//   band                  log band energies up to 1 kHz, scored per channel and summed; a plain
//                         spectral substitute for a learned feature extractor
// Each member is normalised with its own validation bounds; the ensemble score is their sum.

#include <wsauroc/error.hpp>
#include <wsauroc/knn_detector.hpp>
#include <wsauroc/severity_scores.hpp>
#include <wsauroc/vib_synth.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wsauroc {

enum class Member { rotation, bpfi, bpfo, band };

inline auto to_string(Member member) -> std::string
{
    switch (member)
    {
    case Member::rotation: return "rotation";
    case Member::bpfi: return "bpfi";
    case Member::bpfo: return "bpfo";
    case Member::band: return "band";
    }
    return "unknown";
}

inline auto parse_member(std::string_view name) -> Member
{
    for (auto m : {Member::rotation, Member::bpfi, Member::bpfo, Member::band})
        if (to_string(m) == name) return m;
    throw Error{ErrorKind::parse_error, "unknown ensemble member '" + std::string{name} + "'"};
}

/// Test-frame score with its labels.
struct ScoredEvent
{
    FaultType fault{};
    std::size_t severity_index{};
    double score{};
};

/// Spectra of every frame of a bundle plus the split bookkeeping the detectors need.
class BundleSpectra
{
public:
    explicit BundleSpectra(ExperimentBundle const& bundle) : config_{bundle.config}
    {
        for (auto const& frame : bundle.frames)
        {
            auto spectrum = extract_spectrum(frame.signal, bundle.config.sample_rate);
            switch (frame.split)
            {
            case Split::train: train_.push_back(std::move(spectrum)); break;
            case Split::val: val_.push_back(std::move(spectrum)); break;
            case Split::test:
                if (!frame.fault) throw Error{ErrorKind::invalid_argument, "test frame without a fault type"};
                test_.push_back(std::move(spectrum));
                labels_.push_back(ScoredEvent{*frame.fault, frame.severity_index, 0.0});
                break;
            }
        }
        if (train_.empty() || val_.empty() || test_.empty())
            throw Error{ErrorKind::empty_input, "bundle needs train, validation and test frames"};
    }

    auto config() const noexcept -> SynthConfig const& { return config_; }
    auto test_labels() const noexcept -> std::vector<ScoredEvent> const& { return labels_; }

    /// Normalised scores of one member for every test frame, in bundle order.
    auto member_scores(Member member) const -> std::vector<double>
    {
        try
        {
            if (member == Member::band) return band_scores();
            double const base = member == Member::rotation ? config_.rotation_freq
                                : member == Member::bpfi   ? config_.effective_bpfi()
                                                           : config_.effective_bpfo();
            auto features = [&](std::vector<SpectrumFrame> const& spectra) {
                std::vector<FeatureVector> out;
                out.reserve(spectra.size());
                for (auto const& s : spectra) out.push_back(harmonic_features(s, base, feature_harmonics));
                return out;
            };
            return knn_normalized_scores(features(train_), features(val_), features(test_));
        }
        catch (Error const& e)
        {
            throw Error{e.kind(), "member " + to_string(member) + ": " + e.what(), e.where()};
        }
    }

    auto ensemble_scores(std::span<Member const> members) const -> std::vector<ScoredEvent>
    {
        if (members.empty()) throw Error{ErrorKind::empty_input, "no ensemble members selected"};
        std::vector<std::vector<double>> lists;
        for (auto m : members) lists.push_back(member_scores(m));
        auto const summed = ensemble_sum(lists);

        auto events = labels_;
        for (std::size_t k = 0; k < events.size(); ++k) events[k].score = summed[k];
        return events;
    }

    std::vector<double> band_edges{default_band_edges()};

private:
    auto band_scores() const -> std::vector<double>
    {
        auto features = [&](std::vector<SpectrumFrame> const& spectra) {
            ChannelFeatures out(config_.channels);
            for (auto const& s : spectra)
            {
                auto per_channel = band_energy_features(s, band_edges);
                for (std::size_t ch = 0; ch < per_channel.size(); ++ch) out[ch].push_back(std::move(per_channel[ch]));
            }
            return out;
        };
        return channelwise_score(features(train_), features(val_), features(test_));
    }

    SynthConfig config_;
    std::vector<SpectrumFrame> train_;
    std::vector<SpectrumFrame> val_;
    std::vector<SpectrumFrame> test_;
    std::vector<ScoredEvent> labels_;
};

/// Score set of one fault type out of scored events.
inline auto score_set_for(std::span<ScoredEvent const> events, FaultType type) -> SeverityScoreSet
{
    std::vector<ScoreSample> samples;
    for (auto const& e : events)
        if (e.fault == type) samples.push_back(ScoreSample{e.score, SeverityIndex{e.severity_index}});
    return build_score_set(samples);
}

} // namespace wsauroc
