#pragma once

// Inference battery: paired t, exact Wilcoxon signed-rank, JZS Bayes factor,
// exact McNemar, Holm / Benjamini-Hochberg corrections, and percentile /
// BCa / cluster bootstrap intervals.
//
// Every bootstrap draws resample r from stream_rng(seed, r), so output is
// bit-identical for a fixed seed regardless of worker thread count.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "colat/lattice.hpp"

namespace colat {

struct PairedSample {
    std::vector<std::string> labels;  // optional unit identifiers
    std::vector<double> a;
    std::vector<double> b;
};

struct TestResult {
    std::string method;
    double statistic = 0.0;
    std::optional<double> df;
    double p_one_sided = 1.0;
    double p_two_sided = 1.0;
    std::optional<double> effect_size;  // Cohen's d_z for paired t
    std::optional<double> bf10;
    bool approximate = false;  // true when a large-n normal approximation was used
    std::string note;
};

enum class Sidedness { greater, less };

// t on the differences a - b, df = n-1, d_z = t/sqrt(n). One-sided p is for
// the alternative mean(a - b) > 0.
TestResult paired_t(const PairedSample& sample);

// W = smaller signed-rank sum after dropping zero differences (ties get
// midranks). Exact p enumerates all 2^n sign assignments for n <= 25; larger
// n uses the tie-corrected normal approximation with continuity correction
// and sets `approximate`. One-sided p targets the alternative a > b by
// default (small negative-rank sum).
TestResult wilcoxon_exact(const PairedSample& sample,
                          Sidedness sidedness = Sidedness::greater);

// One-sample JZS Bayes factor: Cauchy(0, r) prior on the standardized effect
// size, marginalized by adaptive quadrature (relative error < 1e-6).
double jzs_bf10(double t, std::size_t n, double cauchy_scale);

// Exact binomial McNemar test on discordant pair counts (b, c).
TestResult mcnemar_exact(std::uint64_t b, std::uint64_t c);

struct MultiTestResult {
    std::string method;
    double alpha;
    std::vector<double> adjusted_p;  // original order, monotonicity enforced
    std::vector<bool> reject;
};

MultiTestResult holm(std::span<const double> p_values, double alpha = 0.05);
MultiTestResult bh(std::span<const double> p_values, double alpha = 0.05);

enum class CiMethod { percentile, bca, cluster_percentile, cluster_bca };
std::string to_string(CiMethod method);

struct BootstrapCI {
    CiMethod method;  // effective method (a degenerate BCa falls back, with a warning)
    double level;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t resamples;
    std::uint64_t seed;
    double point_estimate = 0.0;
    std::optional<double> p_one_sided;  // filled by harsanyi_bootstrap
    std::vector<std::string> warnings;
};

using VectorStatistic = std::function<double(std::span<const double>)>;
using TableStatistic = std::function<double(const CoalitionTable&)>;

// Resamples the data vector with replacement. `method` must be percentile or
// bca; BCa applies the z0 bias correction and jackknife acceleration, and
// degrades to percentile (with a warning flag) when the jackknife is
// degenerate.
BootstrapCI bootstrap_ci(std::span<const double> data, const VectorStatistic& statistic,
                         CiMethod method, double level, std::size_t resamples,
                         std::uint64_t seed, unsigned threads = 1);

// Cluster bootstrap: resamples whole tasks of a TaskMatrix with replacement
// and evaluates `statistic` on each resample's mean table. `method` percentile
// or bca selects cluster-percentile / cluster-bca.
BootstrapCI bootstrap_ci(const TaskMatrix& matrix, const TableStatistic& statistic,
                         CiMethod method, double level, std::size_t resamples,
                         std::uint64_t seed, unsigned threads = 1);

// CI for the Harsanyi dividend of `coalition` under task resampling, plus a
// one-sided bootstrap p against zero. The matrix must cover the coalition's
// sub-lattice in every task.
BootstrapCI harsanyi_bootstrap(const TaskMatrix& matrix, const ComponentSet& coalition,
                               CiMethod method, std::size_t resamples, std::uint64_t seed,
                               double level = 0.95, unsigned threads = 1);

// Convenience statistics for CLI use.
double mean_statistic(std::span<const double> data);
double median_statistic(std::span<const double> data);

}  // namespace colat
