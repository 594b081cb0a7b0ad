#include "qstrum/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qstrum/errors.hpp"

namespace qstrum {

double pooled_win_rate(std::span<const OutcomeUnit> units) {
    long wins = 0, ties = 0, total = 0;
    for (const auto& u : units) {
        wins += u.wins;
        ties += u.ties;
        total += u.total();
    }
    if (total == 0) throw NumericDomainError("win rate is undefined without judgments");
    return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) / static_cast<double>(total);
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw NumericDomainError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw NumericDomainError("quantile probability outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ConfidenceInterval bootstrap_ci(std::span<const OutcomeUnit> units, int iterations, double level,
                                std::uint64_t seed) {
    if (iterations < 1) throw Error("bootstrap needs at least one iteration");
    if (!(level > 0.0 && level < 1.0)) throw Error("confidence level must lie in (0, 1)");
    std::vector<OutcomeUnit> live;
    for (const auto& u : units) {
        if (u.total() > 0) live.push_back(u);
    }
    if (live.empty()) throw NumericDomainError("bootstrap needs at least one judged query");

    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
    std::vector<double> rates;
    rates.reserve(static_cast<std::size_t>(iterations));
    for (int it = 0; it < iterations; ++it) {
        long wins = 0, ties = 0, total = 0;
        for (std::size_t i = 0; i < live.size(); ++i) {
            const auto& u = live[pick(gen)];
            wins += u.wins;
            ties += u.ties;
            total += u.total();
        }
        rates.push_back((static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) / static_cast<double>(total));
    }
    std::sort(rates.begin(), rates.end());
    const double tail = (1.0 - level) / 2.0;
    return {quantile_sorted(rates, tail), quantile_sorted(rates, 1.0 - tail)};
}

}  // namespace qstrum
