#include "colat/submod.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "colat/error.hpp"

namespace colat {

namespace {

constexpr std::uint64_t kMaxMaterializedTriples = 10'000'000;

int gain_sign(double g) {
    if (g > kGapEpsilon) return 1;
    if (g < -kGapEpsilon) return -1;
    return 0;
}

}  // namespace

std::uint64_t triple_count(std::size_t k) {
    if (k == 0) return 0;
    std::uint64_t pow3 = 1, pow2 = 1;
    for (std::size_t j = 0; j + 1 < k; ++j) {
        pow3 *= 3;
        pow2 *= 2;
    }
    return static_cast<std::uint64_t>(k) * (pow3 - pow2);
}

std::string to_string(GammaVariant variant) {
    return variant == GammaVariant::positive_gains ? "positive-gains" : "violating-only";
}

SubmodularityAudit audit(const CoalitionTable& table, std::span<const double> gap_thresholds,
                         GammaVariant gamma_variant) {
    table.require_complete();
    for (std::size_t i = 0; i < gap_thresholds.size(); ++i) {
        if (gap_thresholds[i] < 0.0 ||
            (i > 0 && gap_thresholds[i] < gap_thresholds[i - 1])) {
            throw Error("InvalidThresholds", "gap thresholds must be non-negative ascending");
        }
    }
    std::size_t k = table.num_components();
    std::uint64_t expected = triple_count(k);
    if (expected > kMaxMaterializedTriples) {
        throw Error("AuditTooLarge",
                    "audit would materialize " + std::to_string(expected) + " triples");
    }

    SubmodularityAudit out;
    out.universe = table.universe();
    out.triples.reserve(expected);
    out.gamma_variant = gamma_variant;
    out.gap_histogram.thresholds.assign(gap_thresholds.begin(), gap_thresholds.end());
    out.gap_histogram.counts.assign(gap_thresholds.size(), 0);

    const auto& f = table.dense_values();
    for_each_triple(k, [&](Mask s, Mask t, std::size_t i) {
        Mask bit = Mask{1} << i;
        Triple rec;
        rec.subset_mask = s;
        rec.superset_mask = t;
        rec.component = i;
        rec.gain_subset = f[s | bit] - f[s];
        rec.gain_superset = f[t | bit] - f[t];
        rec.gap = rec.gain_superset - rec.gain_subset;
        rec.violation = rec.gap > kGapEpsilon;
        int sign_sub = gain_sign(rec.gain_subset);
        int sign_sup = gain_sign(rec.gain_superset);
        rec.sign_flip = sign_sub * sign_sup == -1;

        if (rec.violation) {
            ++out.n_violations;
            for (std::size_t h = 0; h < out.gap_histogram.thresholds.size(); ++h) {
                if (rec.gap > out.gap_histogram.thresholds[h]) {
                    ++out.gap_histogram.counts[h];
                }
            }
        }
        bool qualifies = sign_sub == 1 && sign_sup == 1 &&
                         (gamma_variant == GammaVariant::positive_gains || rec.violation);
        if (qualifies) {
            out.gamma_values.push_back(rec.gain_subset / rec.gain_superset);
        }
        out.triples.push_back(rec);
    });

    if (!out.gamma_values.empty()) {
        std::vector<double> sorted(out.gamma_values);
        std::sort(sorted.begin(), sorted.end());
        std::size_t n = sorted.size();
        out.gamma_median =
            n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    }
    return out;
}

TopViolationsReport top_violations(const SubmodularityAudit& audit_result, std::size_t n,
                                   std::optional<std::string> designated_component) {
    if (n < 1) throw Error("InvalidArgument", "top_violations needs n >= 1");

    TopViolationsReport out;
    out.universe = audit_result.universe;
    if (designated_component) {
        out.designated_component =
            audit_result.universe.require_index(*designated_component);
    }

    for (const Triple& t : audit_result.triples) {
        if (t.violation) out.triples.push_back(t);
    }
    std::sort(out.triples.begin(), out.triples.end(), [](const Triple& x, const Triple& y) {
        if (x.gap != y.gap) return x.gap > y.gap;
        auto kx = std::popcount(x.superset_mask);
        auto ky = std::popcount(y.superset_mask);
        if (kx != ky) return kx < ky;
        if (x.superset_mask != y.superset_mask) return x.superset_mask < y.superset_mask;
        if (x.subset_mask != y.subset_mask) return x.subset_mask < y.subset_mask;
        return x.component < y.component;
    });
    if (out.triples.size() > n) out.triples.resize(n);

    if (!out.triples.empty()) {
        std::size_t flips = 0;
        std::size_t with_designated = 0;
        for (const Triple& t : out.triples) {
            if (t.sign_flip) ++flips;
            if (out.designated_component) {
                Mask bit = Mask{1} << *out.designated_component;
                // S is inside T, so the context contains the component iff T does.
                if ((t.superset_mask | t.subset_mask) & bit) ++with_designated;
            }
        }
        out.sign_flip_fraction =
            static_cast<double>(flips) / static_cast<double>(out.triples.size());
        out.min_gap = out.triples.back().gap;
        if (out.designated_component) {
            out.designated_context_fraction = static_cast<double>(with_designated) /
                                              static_cast<double>(out.triples.size());
        }
    }
    return out;
}

double violation_rate(const CoalitionTable& table) {
    table.require_complete();
    std::size_t k = table.num_components();
    std::uint64_t total = triple_count(k);
    if (total == 0) return 0.0;
    const auto& f = table.dense_values();
    std::uint64_t violations = 0;
    for_each_triple(k, [&](Mask s, Mask t, std::size_t i) {
        Mask bit = Mask{1} << i;
        double gap = (f[t | bit] - f[t]) - (f[s | bit] - f[s]);
        if (gap > kGapEpsilon) ++violations;
    });
    return static_cast<double>(violations) / static_cast<double>(total);
}

ViolationRateEstimate cluster_bootstrap_violation_rate(const TaskMatrix& matrix,
                                                       std::size_t resamples,
                                                       std::uint64_t seed, double level,
                                                       unsigned threads) {
    if (!matrix.covers_full_lattice()) {
        throw Error("IncompleteMatrix",
                    "violation-rate bootstrap needs every coalition column per task");
    }
    if (matrix.num_tasks() < 2) {
        throw Error("TooFewUnits", "cluster bootstrap needs at least 2 tasks");
    }
    ViolationRateEstimate out;
    out.n_triples = triple_count(matrix.universe().size());
    out.ci = bootstrap_ci(
        matrix, [](const CoalitionTable& t) { return violation_rate(t); },
        CiMethod::cluster_percentile, level, resamples, seed, threads);
    out.rate = out.ci.point_estimate;
    return out;
}

}  // namespace colat
