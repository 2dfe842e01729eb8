#pragma once

// Submodularity audit: exhaustive (S, T, i) triple enumeration with S a
// proper subset of T and i outside T, violation detection (gain at the
// superset strictly exceeding gain at the subset), gap histograms, the
// submodularity ratio gamma, and sign-flip classification.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "colat/lattice.hpp"
#include "colat/stats.hpp"

namespace colat {

// Float ties: a gap (or marginal) within this band of zero counts as zero,
// so exactly-additive tables stay violation- and flip-free under roundoff.
inline constexpr double kGapEpsilon = 1e-12;

struct Triple {
    Mask subset_mask;    // S
    Mask superset_mask;  // T, S proper subset of T, i not in T
    std::size_t component;
    double gain_subset;    // f(S+i) - f(S)
    double gain_superset;  // f(T+i) - f(T)
    double gap;            // gain_superset - gain_subset
    bool violation;        // gap > kGapEpsilon
    bool sign_flip;        // gains strictly opposite in sign (zero is no flip)
};

// k * (3^(k-1) - 2^(k-1)) valid triples over k components.
std::uint64_t triple_count(std::size_t k);

// Visits every triple in deterministic order: component ascending, superset
// mask ascending, subset submask ascending.
template <typename Fn>
void for_each_triple(std::size_t k, Fn&& fn) {
    for (std::size_t i = 0; i < k; ++i) {
        Mask bit = Mask{1} << i;
        Mask all = static_cast<Mask>((Mask{1} << k) - 1u) & ~bit;
        for (Mask t = 0; t <= all; ++t) {
            if (t & bit) continue;
            if ((t & all) != t) continue;
            Mask s = 0;
            while (true) {
                if (s != t) fn(s, t, i);
                if (s == t) break;
                s = (s - t) & t;
            }
        }
    }
}

enum class GammaVariant {
    positive_gains,  // all triples with both gains > 0 (default, documented)
    violating_only,  // additionally require the triple to be a violation
};
std::string to_string(GammaVariant variant);

struct GapHistogram {
    std::vector<double> thresholds;       // non-negative, ascending
    std::vector<std::size_t> counts;      // violations with gap > threshold
};

struct SubmodularityAudit {
    Universe universe;
    std::vector<Triple> triples;
    std::size_t n_violations = 0;
    GapHistogram gap_histogram;
    GammaVariant gamma_variant = GammaVariant::positive_gains;
    std::vector<double> gamma_values;  // gain_subset / gain_superset per qualifying triple
    std::optional<double> gamma_median;

    std::size_t n_triples() const { return triples.size(); }
    double violation_rate() const {
        return triples.empty() ? 0.0
                               : static_cast<double>(n_violations) /
                                     static_cast<double>(triples.size());
    }
};

// Full audit of a complete table. Universes with more than 10M triples
// (k >= 14) are rejected ("AuditTooLarge") since the triple list is
// materialized.
SubmodularityAudit audit(const CoalitionTable& table, std::span<const double> gap_thresholds,
                         GammaVariant gamma_variant = GammaVariant::positive_gains);

struct TopViolationsReport {
    Universe universe;
    std::vector<Triple> triples;  // gap descending; ties by (|T|, T, S, i)
    double sign_flip_fraction = 0.0;
    std::optional<double> min_gap;
    // Fraction of top triples whose context (S or T; S is inside T) contains
    // the designated component.
    std::optional<std::size_t> designated_component;
    std::optional<double> designated_context_fraction;
};

TopViolationsReport top_violations(const SubmodularityAudit& audit_result, std::size_t n,
                                   std::optional<std::string> designated_component = {});

// Streaming violation rate (no triple materialization); used by the cluster
// bootstrap and valid at any k <= 20.
double violation_rate(const CoalitionTable& table);

struct ViolationRateEstimate {
    double rate;  // on the full-matrix mean table
    std::uint64_t n_triples;
    BootstrapCI ci;
};

// Task-level cluster bootstrap of the violation rate: resamples whole tasks,
// recomputes the mean table and its violation rate per resample, percentile
// interval. Deterministic under (seed, resamples) for any thread count.
ViolationRateEstimate cluster_bootstrap_violation_rate(const TaskMatrix& matrix,
                                                       std::size_t resamples,
                                                       std::uint64_t seed,
                                                       double level = 0.95,
                                                       unsigned threads = 1);

}  // namespace colat
