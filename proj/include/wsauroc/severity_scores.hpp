#pragma once

// Severity-labelled anomaly scores: the input data model for every metric.

#include <wsauroc/error.hpp>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wsauroc {

/// Discrete severity grade; 0 is the normal condition, larger values are more severe anomalies.
struct SeverityIndex
{
    std::size_t value{};

    constexpr auto is_normal() const noexcept -> bool { return value == 0; }

    constexpr auto operator<=>(SeverityIndex const&) const noexcept = default;
};

struct ScoreSample
{
    double score{};
    SeverityIndex severity{};
};

/// Physical cause magnitude per severity level (w_0..w_n), e.g. unbalance mass in mg.
struct PhysicalQuantityMap
{
    std::vector<double> quantities;
    std::string unit;
};

/// Scores grouped by severity. Levels 0..n are all present and non-empty, n >= 1, all scores finite.
class SeverityScoreSet
{
public:
    /// Validates and adopts `groups`, where groups[i] holds the scores of level i.
    static auto from_groups(std::vector<std::vector<double>> groups) -> SeverityScoreSet
    {
        if (groups.empty()) throw Error{ErrorKind::empty_input, "score set has no severity levels"};
        for (std::size_t level = 0; level < groups.size(); ++level)
        {
            if (groups[level].empty())
            {
                if (level == 0) throw Error{ErrorKind::missing_normal_level, "severity level 0 (normal) has no samples", 0};
                throw Error{ErrorKind::non_contiguous_levels,
                            "severity level " + std::to_string(level) + " has no samples", level};
            }
            for (double score : groups[level])
                if (!std::isfinite(score))
                    throw Error{ErrorKind::non_finite_value,
                                "non-finite score at severity level " + std::to_string(level), level};
        }
        if (groups.size() < 2)
            throw Error{ErrorKind::invalid_argument, "score set needs at least one anomaly level besides normal"};
        return SeverityScoreSet{std::move(groups)};
    }

    auto max_index() const noexcept -> std::size_t { return groups_.size() - 1; }
    auto level_count() const noexcept -> std::size_t { return groups_.size(); }

    auto group(std::size_t level) const -> std::span<double const> { return groups_.at(level); }
    auto groups() const noexcept -> std::vector<std::vector<double>> const& { return groups_; }

    auto group_sizes() const -> std::vector<std::size_t>
    {
        std::vector<std::size_t> sizes;
        sizes.reserve(groups_.size());
        for (auto const& g : groups_) sizes.push_back(g.size());
        return sizes;
    }

private:
    explicit SeverityScoreSet(std::vector<std::vector<double>> groups) : groups_{std::move(groups)} {}

    std::vector<std::vector<double>> groups_;
};

/// Groups samples by severity index. Within-group order follows input order.
inline auto build_score_set(std::span<ScoreSample const> samples) -> SeverityScoreSet
{
    if (samples.empty()) throw Error{ErrorKind::empty_input, "no score samples"};

    std::size_t max_level = 0;
    for (std::size_t record = 0; record < samples.size(); ++record)
    {
        if (!std::isfinite(samples[record].score))
            throw Error{ErrorKind::non_finite_value, "non-finite score in record " + std::to_string(record), record};
        max_level = std::max(max_level, samples[record].severity.value);
    }

    std::vector<std::vector<double>> groups(max_level + 1);
    for (auto const& sample : samples) groups[sample.severity.value].push_back(sample.score);
    return SeverityScoreSet::from_groups(std::move(groups));
}

/// Accepts q iff it has one quantity per level of `set` and is strictly increasing.
inline auto validate_quantities(std::size_t max_index, PhysicalQuantityMap const& q) -> void
{
    auto const& w = q.quantities;
    if (w.size() != max_index + 1)
        throw Error{ErrorKind::length_mismatch, "expected " + std::to_string(max_index + 1) +
                                                    " physical quantities, got " + std::to_string(w.size())};
    for (std::size_t i = 0; i < w.size(); ++i)
        if (!std::isfinite(w[i]))
            throw Error{ErrorKind::non_finite_value, "non-finite physical quantity at level " + std::to_string(i), i};
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (!(w[i] < w[i + 1]))
            throw Error{ErrorKind::non_monotone_quantities,
                        "physical quantities not strictly increasing at levels (" + std::to_string(i) + "," +
                            std::to_string(i + 1) + ")",
                        i};
}

inline auto validate_quantities(SeverityScoreSet const& set, PhysicalQuantityMap const& q) -> void
{
    validate_quantities(set.max_index(), q);
}

} // namespace wsauroc
