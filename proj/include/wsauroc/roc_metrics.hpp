#pragma once

// Exact AUROC, pairwise AUROC between severity levels, penalty weights and the
// weighted-sum AUROC (WS-AUROC) built from them.

#include <wsauroc/error.hpp>
#include <wsauroc/severity_scores.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wsauroc {

// --------------------------------------------------------------------------------------------------------------------
// Level pair tables
// --------------------------------------------------------------------------------------------------------------------

/// Values for every level pair (i, j), 0 <= i < j <= n, stored in lexicographic order.
template <typename Tag> class LevelPairTable
{
public:
    LevelPairTable() = default;

    explicit LevelPairTable(std::size_t max_index) : max_index_{max_index}, values_(pair_count(max_index), 0.0) {}

    static constexpr auto pair_count(std::size_t max_index) noexcept -> std::size_t
    {
        return max_index * (max_index + 1) / 2;
    }

    auto max_index() const noexcept -> std::size_t { return max_index_; }
    auto size() const noexcept -> std::size_t { return values_.size(); }

    auto at(std::size_t i, std::size_t j) const -> double { return values_[offset(i, j)]; }
    auto at(std::size_t i, std::size_t j) -> double& { return values_[offset(i, j)]; }

    /// values in lexicographic (i, j) order
    auto values() const noexcept -> std::span<double const> { return values_; }

private:
    auto offset(std::size_t i, std::size_t j) const -> std::size_t
    {
        if (!(i < j && j <= max_index_))
            throw Error{ErrorKind::out_of_range,
                        "level pair (" + std::to_string(i) + "," + std::to_string(j) + ") out of range"};
        // rows 0..i-1 hold (n - r) entries each
        return i * max_index_ - i * (i - 1) / 2 + (j - i - 1);
    }

    std::size_t max_index_{};
    std::vector<double> values_;
};

struct penalty_tag;
struct auroc_tag;

using PenaltyMatrix = LevelPairTable<penalty_tag>;
using PairwiseAurocMatrix = LevelPairTable<auroc_tag>;

// --------------------------------------------------------------------------------------------------------------------
// Penalty schemes
// --------------------------------------------------------------------------------------------------------------------

struct UniformPenalty
{};

struct IndexPenalty
{};

struct PhysicsPenalty
{
    PhysicalQuantityMap quantities;
};

using PenaltyScheme = std::variant<UniformPenalty, IndexPenalty, PhysicsPenalty>;

inline auto scheme_name(PenaltyScheme const& scheme) -> std::string
{
    struct
    {
        auto operator()(UniformPenalty const&) const -> std::string { return "uniform"; }
        auto operator()(IndexPenalty const&) const -> std::string { return "index"; }
        auto operator()(PhysicsPenalty const&) const -> std::string { return "physics"; }
    } visitor;
    return std::visit(visitor, scheme);
}

/// Builds p_ij for the given scheme. Weights are non-negative and sum to 1.
inline auto penalty_weights(PenaltyScheme const& scheme, std::size_t max_index) -> PenaltyMatrix
{
    if (max_index < 1) throw Error{ErrorKind::invalid_argument, "penalty weights need at least two severity levels"};

    auto const n = static_cast<double>(max_index);
    PenaltyMatrix weights{max_index};

    if (std::holds_alternative<UniformPenalty>(scheme))
    {
        double const p = 2.0 / (n * (n + 1.0));
        for (std::size_t i = 0; i < max_index; ++i)
            for (std::size_t j = i + 1; j <= max_index; ++j) weights.at(i, j) = p;
    }
    else if (std::holds_alternative<IndexPenalty>(scheme))
    {
        double const denominator = n * (n + 1.0) * (n + 2.0);
        for (std::size_t i = 0; i < max_index; ++i)
            for (std::size_t j = i + 1; j <= max_index; ++j)
                weights.at(i, j) = 6.0 * static_cast<double>(j - i) / denominator;
    }
    else
    {
        auto const& q = std::get<PhysicsPenalty>(scheme).quantities;
        validate_quantities(max_index, q);
        auto const& w = q.quantities;

        // sum of w_b - w_a over every pair a < b
        double denominator = 0.0;
        for (std::size_t a = 0; a < max_index; ++a)
            for (std::size_t b = a + 1; b <= max_index; ++b) denominator += w[b] - w[a];

        for (std::size_t i = 0; i < max_index; ++i)
            for (std::size_t j = i + 1; j <= max_index; ++j) weights.at(i, j) = (w[j] - w[i]) / denominator;
    }
    return weights;
}

// --------------------------------------------------------------------------------------------------------------------
// AUROC
// --------------------------------------------------------------------------------------------------------------------

namespace detail {

inline auto require_finite(std::span<double const> values, char const* what) -> void
{
    if (values.empty()) throw Error{ErrorKind::empty_input, std::string{what} + " list is empty"};
    for (std::size_t k = 0; k < values.size(); ++k)
        if (!std::isfinite(values[k]))
            throw Error{ErrorKind::non_finite_value, std::string{"non-finite value in "} + what + " list", k};
}

} // namespace detail

/// Mann-Whitney AUROC: (wins + 0.5 * ties) / (|neg| * |pos|), where a win is a (neg, pos) pair with pos > neg.
inline auto auroc(std::span<double const> negatives, std::span<double const> positives) -> double
{
    detail::require_finite(negatives, "negative");
    detail::require_finite(positives, "positive");

    std::vector<double> sorted(negatives.begin(), negatives.end());
    std::sort(sorted.begin(), sorted.end());

    std::uint64_t wins = 0;
    std::uint64_t ties = 0;
    for (double pos : positives)
    {
        auto const [lo, hi] = std::equal_range(sorted.begin(), sorted.end(), pos);
        wins += static_cast<std::uint64_t>(lo - sorted.begin());
        ties += static_cast<std::uint64_t>(hi - lo);
    }
    return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
           (static_cast<double>(negatives.size()) * static_cast<double>(positives.size()));
}

/// a_ij for every i < j; the lower level is always the negative class.
inline auto pairwise_auroc(SeverityScoreSet const& set) -> PairwiseAurocMatrix
{
    auto const n = set.max_index();
    PairwiseAurocMatrix result{n};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j <= n; ++j) result.at(i, j) = auroc(set.group(i), set.group(j));
    return result;
}

/// Sum of p_ij * a_ij. Normalised by the accumulated weight total, which is 1 up to rounding, so that a
/// perfectly ordered set scores exactly 1 and a two-level set reproduces its AUROC exactly.
inline auto ws_auroc(PairwiseAurocMatrix const& pairwise, PenaltyMatrix const& weights) -> double
{
    if (pairwise.max_index() != weights.max_index())
        throw Error{ErrorKind::length_mismatch, "pairwise AUROC and penalty matrices cover different level counts"};

    auto const a = pairwise.values();
    auto const p = weights.values();
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
    {
        weighted += p[k] * a[k];
        total += p[k];
    }
    return weighted / total;
}

inline auto ws_auroc(SeverityScoreSet const& set, PenaltyScheme const& scheme) -> double
{
    auto const weights = penalty_weights(scheme, set.max_index());
    return ws_auroc(pairwise_auroc(set), weights);
}

/// AUROC of the normal level against all anomaly levels pooled.
inline auto normal_vs_pooled_auroc(SeverityScoreSet const& set) -> double
{
    std::vector<double> pooled;
    for (std::size_t level = 1; level <= set.max_index(); ++level)
    {
        auto const g = set.group(level);
        pooled.insert(pooled.end(), g.begin(), g.end());
    }
    return auroc(set.group(0), pooled);
}

/// mean(y - x); negative means the y metric reads lower, i.e. is the more sensitive one.
inline auto metric_bias(std::span<double const> x_values, std::span<double const> y_values) -> double
{
    if (x_values.size() != y_values.size())
        throw Error{ErrorKind::length_mismatch, "bias needs equally many x and y values"};
    if (x_values.empty()) throw Error{ErrorKind::empty_input, "bias of an empty comparison"};
    detail::require_finite(x_values, "x");
    detail::require_finite(y_values, "y");

    double sum = 0.0;
    for (std::size_t k = 0; k < x_values.size(); ++k) sum += y_values[k] - x_values[k];
    return sum / static_cast<double>(x_values.size());
}

} // namespace wsauroc
