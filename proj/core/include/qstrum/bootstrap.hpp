#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qstrum {

/// One resampling unit: the judgments of a single query (both presentation orders)
/// for one criterion, counted from the side whose rate is being estimated.
struct OutcomeUnit {
    long wins = 0;
    long losses = 0;
    long ties = 0;

    long total() const { return wins + losses + ties; }
    bool operator==(const OutcomeUnit&) const = default;
};

struct ConfidenceInterval {
    double low = 0.0;
    double high = 0.0;

    bool operator==(const ConfidenceInterval&) const = default;
};

inline constexpr int kDefaultBootstrapIterations = 10000;
inline constexpr double kDefaultConfidenceLevel = 0.95;

/// Tie-weighted rate pooled over units: (wins + 0.5 ties) / judgments.
/// Throws NumericDomainError when there are no judgments.
double pooled_win_rate(std::span<const OutcomeUnit> units);

/// Linear-interpolation quantile of sorted values (Hyndman-Fan type 7).
double quantile_sorted(std::span<const double> sorted, double p);

/// Percentile bootstrap over query-level units. Each iteration draws as many units
/// as there are, with replacement, and pools them. Returns the (1-level)/2 and
/// (1+level)/2 quantiles of the resampled rates. Units without judgments are
/// ignored. Deterministic for a fixed seed. Throws NumericDomainError when no unit
/// carries a judgment, Error on iterations < 1 or level outside (0, 1).
ConfidenceInterval bootstrap_ci(std::span<const OutcomeUnit> units, int iterations = kDefaultBootstrapIterations,
                                double level = kDefaultConfidenceLevel, std::uint64_t seed = 0);

}  // namespace qstrum
