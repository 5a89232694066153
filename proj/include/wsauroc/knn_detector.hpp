#pragma once

// Nearest-neighbour (k = 1) anomaly scoring on spectral feature vectors.
//
// Scores are Euclidean distances to the closest normal training vector, rescaled by the
// minimum and maximum distance seen on normal validation data. Rescaling is affine and is
// never clamped, so test scores can leave [0, 1] and ranks are preserved.

#include <wsauroc/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wsauroc {

/// One-sided spectrum of several channels on a shared frequency grid.
struct SpectrumFrame
{
    std::vector<double> frequencies;             // Hz, strictly increasing
    std::vector<std::vector<double>> magnitudes; // [channel][bin], >= 0
    std::vector<std::vector<double>> phases;     // [channel][bin], radians in (-pi, pi]

    auto channel_count() const noexcept -> std::size_t { return magnitudes.size(); }
    auto bin_count() const noexcept -> std::size_t { return frequencies.size(); }
};

/// Describes how a flat feature vector is laid out: channel-major, then harmonic (or band), then
/// `values_per_slot` entries (2 = magnitude, phase; 1 = band energy).
struct FeatureLayout
{
    std::size_t channels{};
    std::size_t harmonics{};
    std::size_t values_per_slot{2};

    constexpr auto length() const noexcept -> std::size_t { return channels * harmonics * values_per_slot; }
    constexpr auto operator==(FeatureLayout const&) const noexcept -> bool = default;
};

struct FeatureVector
{
    std::vector<double> values;
    FeatureLayout layout;

    auto size() const noexcept -> std::size_t { return values.size(); }
};

struct NormalizationBounds
{
    double min{};
    double max{};

    static auto from_distances(std::span<double const> distances) -> NormalizationBounds
    {
        if (distances.empty()) throw Error{ErrorKind::empty_input, "no validation distances for normalization"};
        auto const [lo, hi] = std::minmax_element(distances.begin(), distances.end());
        return NormalizationBounds{*lo, *hi};
    }
};

/// Nearest bin to `frequency`; ties go to the lower bin.
inline auto nearest_bin(std::span<double const> grid, double frequency) -> std::size_t
{
    auto const upper = std::lower_bound(grid.begin(), grid.end(), frequency);
    if (upper == grid.begin()) return 0;
    if (upper == grid.end()) return grid.size() - 1;
    auto const above = static_cast<std::size_t>(upper - grid.begin());
    return (frequency - grid[above - 1] <= grid[above] - frequency) ? above - 1 : above;
}

/// (magnitude, phase) at the bins nearest to k * base_frequency, k = 1..harmonics, for every channel.
inline auto harmonic_features(SpectrumFrame const& frame, double base_frequency, std::size_t harmonics = 4)
    -> FeatureVector
{
    if (frame.channel_count() == 0 || frame.bin_count() == 0)
        throw Error{ErrorKind::empty_input, "spectrum frame is empty"};
    if (!(base_frequency > 0.0)) throw Error{ErrorKind::invalid_argument, "base frequency must be positive"};
    if (harmonics < 1) throw Error{ErrorKind::invalid_argument, "need at least one harmonic"};

    auto const& grid = frame.frequencies;
    std::vector<std::size_t> bins;
    for (std::size_t k = 1; k <= harmonics; ++k)
    {
        double const f = static_cast<double>(k) * base_frequency;
        if (f < grid.front() || f > grid.back())
            throw Error{ErrorKind::out_of_range, "harmonic " + std::to_string(k) + " at " + std::to_string(f) +
                                                     " Hz lies outside the spectrum",
                        k};
        bins.push_back(nearest_bin(grid, f));
    }

    FeatureVector out{{}, FeatureLayout{frame.channel_count(), harmonics, 2}};
    out.values.reserve(out.layout.length());
    for (std::size_t ch = 0; ch < frame.channel_count(); ++ch)
        for (auto bin : bins)
        {
            out.values.push_back(frame.magnitudes[ch][bin]);
            out.values.push_back(frame.phases[ch][bin]);
        }
    return out;
}

inline auto euclidean_distance(std::span<double const> a, std::span<double const> b) -> double
{
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
    {
        double const d = a[k] - b[k];
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// Distance from `query` to its nearest neighbour in `train`.
inline auto knn_min_distance(std::span<FeatureVector const> train, FeatureVector const& query) -> double
{
    if (train.empty()) throw Error{ErrorKind::empty_input, "training set is empty"};
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < train.size(); ++k)
    {
        if (train[k].size() != query.size())
            throw Error{ErrorKind::length_mismatch,
                        "training vector " + std::to_string(k) + " has dimension " + std::to_string(train[k].size()) +
                            ", query has " + std::to_string(query.size()),
                        k};
        best = std::min(best, euclidean_distance(train[k].values, query.values));
    }
    return best;
}

inline auto knn_min_distances(std::span<FeatureVector const> train, std::span<FeatureVector const> queries)
    -> std::vector<double>
{
    std::vector<double> out;
    out.reserve(queries.size());
    for (auto const& q : queries) out.push_back(knn_min_distance(train, q));
    return out;
}

inline auto normalize_scores(std::span<double const> distances, NormalizationBounds bounds) -> std::vector<double>
{
    if (!(bounds.max > bounds.min))
        throw Error{ErrorKind::degenerate_bounds, "normalization bounds are degenerate (max <= min)"};
    double const range = bounds.max - bounds.min;
    std::vector<double> out;
    out.reserve(distances.size());
    for (std::size_t k = 0; k < distances.size(); ++k)
    {
        if (!std::isfinite(distances[k])) throw Error{ErrorKind::non_finite_value, "non-finite distance", k};
        out.push_back((distances[k] - bounds.min) / range);
    }
    return out;
}

/// Elementwise sum of member scores.
inline auto ensemble_sum(std::span<std::vector<double> const> score_lists) -> std::vector<double>
{
    if (score_lists.empty()) throw Error{ErrorKind::empty_input, "ensemble has no members"};
    std::vector<double> out(score_lists.front().size(), 0.0);
    for (std::size_t m = 0; m < score_lists.size(); ++m)
    {
        if (score_lists[m].size() != out.size())
            throw Error{ErrorKind::length_mismatch, "ensemble member " + std::to_string(m) + " has a different length", m};
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += score_lists[m][k];
    }
    return out;
}

/// Normal-only scoring pipeline for one feature space: fit on train, bound on validation, score test.
inline auto knn_normalized_scores(std::span<FeatureVector const> train, std::span<FeatureVector const> val,
                                  std::span<FeatureVector const> test) -> std::vector<double>
{
    auto const bounds = NormalizationBounds::from_distances(knn_min_distances(train, val));
    return normalize_scores(knn_min_distances(train, test), bounds);
}

/// Per-channel feature sets indexed [channel][event].
using ChannelFeatures = std::vector<std::vector<FeatureVector>>;

/// Scores each channel separately (own training set and validation bounds) and sums the channels per event.
inline auto channelwise_score(ChannelFeatures const& train, ChannelFeatures const& val, ChannelFeatures const& test)
    -> std::vector<double>
{
    if (train.empty()) throw Error{ErrorKind::empty_input, "no channels"};
    if (val.size() != train.size() || test.size() != train.size())
        throw Error{ErrorKind::length_mismatch, "train, validation and test disagree on channel count"};

    std::vector<std::vector<double>> per_channel;
    per_channel.reserve(train.size());
    for (std::size_t ch = 0; ch < train.size(); ++ch)
    {
        if (ch > 0 && test[ch].size() != test[0].size())
            throw Error{ErrorKind::length_mismatch, "channel " + std::to_string(ch) + " has a different event count", ch};
        try
        {
            per_channel.push_back(knn_normalized_scores(train[ch], val[ch], test[ch]));
        }
        catch (Error const& e)
        {
            throw Error{e.kind(), "channel " + std::to_string(ch) + ": " + e.what(), ch};
        }
    }
    return ensemble_sum(per_channel);
}

/// Phase wrapped into (-pi, pi].
inline auto wrap_phase(double radians) -> double
{
    double const wrapped = std::remainder(radians, 2.0 * std::numbers::pi);
    return wrapped <= -std::numbers::pi ? wrapped + 2.0 * std::numbers::pi : wrapped;
}

} // namespace wsauroc
