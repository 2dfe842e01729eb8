#include "colat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "colat/error.hpp"
#include "colat/mathfn.hpp"
#include "colat/rng.hpp"

namespace colat {

namespace {

void check_paired(const PairedSample& sample) {
    if (sample.a.size() != sample.b.size()) {
        throw Error("InvalidArgument", "paired sample vectors differ in length");
    }
    if (sample.a.empty()) {
        throw Error("TooFewUnits", "paired sample is empty");
    }
    for (std::size_t i = 0; i < sample.a.size(); ++i) {
        if (!std::isfinite(sample.a[i]) || !std::isfinite(sample.b[i])) {
            throw Error("NonFiniteValue", "paired sample holds a non-finite score");
        }
    }
}

std::vector<double> differences(const PairedSample& sample) {
    std::vector<double> d(sample.a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = sample.a[i] - sample.b[i];
    return d;
}

// Midranks of |d| (1-based; ties share the average rank).
std::vector<double> midranks(const std::vector<double>& abs_d) {
    std::vector<std::size_t> order(abs_d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return abs_d[x] < abs_d[y]; });
    std::vector<double> ranks(abs_d.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
        double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

// P(signed-rank sum <= w) under the null, by counting rank subsets with a
// sum table over doubled ranks (midranks are half-integers at worst).
double exact_signed_rank_cdf(const std::vector<double>& ranks, double w) {
    std::vector<long long> r2(ranks.size());
    long long total = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        r2[i] = llround(2.0 * ranks[i]);
        total += r2[i];
    }
    std::vector<std::uint64_t> count(static_cast<std::size_t>(total) + 1, 0);
    count[0] = 1;
    long long reach = 0;
    for (long long r : r2) {
        reach += r;
        for (long long s = reach; s >= r; --s) {
            count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r)];
        }
    }
    long long w2 = static_cast<long long>(std::floor(2.0 * w + 1e-9));
    w2 = std::min(w2, total);
    std::uint64_t below = 0;
    for (long long s = 0; s <= w2; ++s) below += count[static_cast<std::size_t>(s)];
    return static_cast<double>(below) / std::ldexp(1.0, static_cast<int>(ranks.size()));
}

}  // namespace

TestResult paired_t(const PairedSample& sample) {
    check_paired(sample);
    std::vector<double> d = differences(sample);
    std::size_t n = d.size();
    if (n < 2) throw Error("TooFewUnits", "paired t needs at least 2 units");

    bool all_same = std::all_of(d.begin(), d.end(), [&](double x) { return x == d[0]; });
    if (all_same) {
        throw Error("ZeroVariance", "all paired differences are identical");
    }

    double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    double t = mean / (sd / std::sqrt(static_cast<double>(n)));
    double df = static_cast<double>(n - 1);

    TestResult res;
    res.method = "paired-t";
    res.statistic = t;
    res.df = df;
    res.p_two_sided = student_t_two_sided_p(t, df);
    res.p_one_sided = 1.0 - student_t_cdf(t, df);
    res.effect_size = t / std::sqrt(static_cast<double>(n));  // Cohen's d_z
    return res;
}

TestResult wilcoxon_exact(const PairedSample& sample, Sidedness sidedness) {
    check_paired(sample);
    std::vector<double> d = differences(sample);

    std::vector<double> abs_d;
    std::vector<int> sign;
    for (double x : d) {
        if (x == 0.0) continue;  // zero differences dropped
        abs_d.push_back(std::fabs(x));
        sign.push_back(x > 0.0 ? 1 : -1);
    }
    if (abs_d.empty()) {
        throw Error("AllZeroDifferences", "every paired difference is zero");
    }
    std::size_t n = abs_d.size();
    std::vector<double> ranks = midranks(abs_d);

    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        (sign[i] > 0 ? w_plus : w_minus) += ranks[i];
    }
    double w_min = std::min(w_plus, w_minus);
    // Alternative "a > b" leaves a small negative-rank sum, and vice versa.
    double w_test = sidedness == Sidedness::greater ? w_minus : w_plus;

    TestResult res;
    res.method = "wilcoxon-signed-rank";
    res.statistic = w_min;
    if (n <= 25) {
        res.p_one_sided = exact_signed_rank_cdf(ranks, w_test);
        res.p_two_sided = std::min(1.0, 2.0 * exact_signed_rank_cdf(ranks, w_min));
    } else {
        res.approximate = true;
        res.note = "normal approximation (n > 25)";
        double nn = static_cast<double>(n);
        double mu = nn * (nn + 1.0) / 4.0;
        // Tie correction: subtract sum(t^3 - t)/48 over tie groups.
        double tie = 0.0;
        std::vector<double> sorted(abs_d);
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            double tlen = static_cast<double>(j - i + 1);
            tie += tlen * tlen * tlen - tlen;
            i = j + 1;
        }
        double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie / 48.0;
        double sd = std::sqrt(var);
        res.p_one_sided = normal_cdf((w_test - mu + 0.5) / sd);
        res.p_two_sided = std::min(1.0, 2.0 * normal_cdf((w_min - mu + 0.5) / sd));
    }
    return res;
}

double jzs_bf10(double t, std::size_t n, double cauchy_scale) {
    if (n < 2) throw Error("TooFewUnits", "jzs_bf10 needs n >= 2");
    if (!(cauchy_scale > 0.0)) throw Error("InvalidArgument", "Cauchy scale must be positive");
    if (!std::isfinite(t)) throw Error("NonFiniteValue", "t statistic is not finite");

    double nu = static_cast<double>(n - 1);
    double nn = static_cast<double>(n);
    double r2 = cauchy_scale * cauchy_scale;
    double log_den = -0.5 * (nu + 1.0) * std::log1p(t * t / nu);

    // delta ~ Cauchy(0, r) as the scale mixture delta|g ~ N(0, g r^2),
    // g ~ InverseGamma(1/2, 1/2); integrate over u = g/(1+g).
    auto integrand = [&](double u) {
        if (u <= 0.0 || u >= 1.0) return 0.0;
        double g = u / (1.0 - u);
        double q = 1.0 + nn * g * r2;
        double log_num = -0.5 * std::log(q) -
                         0.5 * (nu + 1.0) * std::log1p(t * t / (q * nu)) -
                         0.5 * std::log(2.0 * M_PI) - 1.5 * std::log(g) - 0.5 / g;
        return std::exp(log_num - log_den) / ((1.0 - u) * (1.0 - u));
    };

    return integrate_adaptive(integrand, 0.0, 1.0 - 1e-12, 1e-8);
}

TestResult mcnemar_exact(std::uint64_t b, std::uint64_t c) {
    std::uint64_t m = b + c;
    if (m == 0) throw Error("NoDiscordantPairs", "b + c must be at least 1");
    std::uint64_t k = std::min(b, c);
    double mm = static_cast<double>(m);
    double tail = 0.0;
    for (std::uint64_t i = 0; i <= k; ++i) {
        tail += std::exp(log_choose(mm, static_cast<double>(i)) - mm * std::log(2.0));
    }
    TestResult res;
    res.method = "mcnemar-exact";
    res.statistic = static_cast<double>(k);
    res.p_one_sided = std::min(1.0, tail);
    res.p_two_sided = std::min(1.0, 2.0 * tail);
    return res;
}

namespace {

void check_pvalues(std::span<const double> p) {
    for (double x : p) {
        if (!(x >= 0.0 && x <= 1.0)) {
            throw Error("InvalidArgument", "p-values must lie in [0,1]");
        }
    }
}

std::vector<std::size_t> ascending_order(std::span<const double> p) {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return p[x] < p[y]; });
    return order;
}

}  // namespace

MultiTestResult holm(std::span<const double> p_values, double alpha) {
    check_pvalues(p_values);
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("InvalidArgument", "alpha must be in (0,1)");
    std::size_t m = p_values.size();
    MultiTestResult res;
    res.method = "holm";
    res.alpha = alpha;
    res.adjusted_p.resize(m);
    res.reject.resize(m);
    auto order = ascending_order(p_values);
    double running = 0.0;  // step-down: adjusted p is monotone nondecreasing
    for (std::size_t rank = 0; rank < m; ++rank) {
        std::size_t i = order[rank];
        running = std::max(running, static_cast<double>(m - rank) * p_values[i]);
        res.adjusted_p[i] = std::min(1.0, running);
        res.reject[i] = res.adjusted_p[i] <= alpha;
    }
    return res;
}

MultiTestResult bh(std::span<const double> p_values, double alpha) {
    check_pvalues(p_values);
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("InvalidArgument", "alpha must be in (0,1)");
    std::size_t m = p_values.size();
    MultiTestResult res;
    res.method = "benjamini-hochberg";
    res.alpha = alpha;
    res.adjusted_p.resize(m);
    res.reject.resize(m);
    auto order = ascending_order(p_values);
    double running = 1.0;  // step-up: sweep from the largest p downwards
    for (std::size_t rank = m; rank-- > 0;) {
        std::size_t i = order[rank];
        double candidate =
            static_cast<double>(m) * p_values[i] / static_cast<double>(rank + 1);
        running = std::min(running, candidate);
        res.adjusted_p[i] = std::min(1.0, running);
        res.reject[i] = res.adjusted_p[i] <= alpha;
    }
    return res;
}

namespace {

// Runs fn(0..count-1) on `threads` workers; each index writes its own slot,
// so scheduling cannot change the result.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

// ceil(q*B)-th order statistic (1-based), clamped to the valid range.
double empirical_quantile(const std::vector<double>& sorted, double q) {
    auto b = static_cast<double>(sorted.size());
    auto idx = static_cast<long long>(std::ceil(q * b)) - 1;
    idx = std::clamp<long long>(idx, 0, static_cast<long long>(sorted.size()) - 1);
    return sorted[static_cast<std::size_t>(idx)];
}

struct BcaInputs {
    double point;
    std::vector<double> jackknife;
};

// Shared percentile/BCa interval construction over an already-computed
// resample distribution. `bca` supplies the jackknife values on demand.
BootstrapCI finish_interval(std::vector<double> boot, CiMethod requested, bool cluster,
                            double level, std::size_t resamples, std::uint64_t seed,
                            double point,
                            const std::function<BcaInputs()>& bca_inputs) {
    BootstrapCI ci;
    ci.level = level;
    ci.resamples = resamples;
    ci.seed = seed;
    ci.point_estimate = point;

    double alpha = 1.0 - level;
    bool use_bca = requested == CiMethod::bca || requested == CiMethod::cluster_bca;

    std::vector<double> sorted(boot);
    std::sort(sorted.begin(), sorted.end());

    double q_lo = alpha / 2.0;
    double q_hi = 1.0 - alpha / 2.0;

    if (use_bca) {
        BcaInputs in = bca_inputs();
        bool degenerate = std::all_of(in.jackknife.begin(), in.jackknife.end(),
                                      [&](double x) { return x == in.jackknife[0]; });
        if (degenerate) {
            ci.warnings.push_back("degenerate_jackknife_percentile_fallback");
            use_bca = false;
        } else {
            double below = 0.0;
            for (double x : boot) {
                if (x < point) below += 1.0;
            }
            if (below == 0.0 || below == static_cast<double>(boot.size())) {
                ci.warnings.push_back("z0_clamped");
                below = std::clamp(below, 0.5, static_cast<double>(boot.size()) - 0.5);
            }
            double z0 = normal_quantile(below / static_cast<double>(boot.size()));

            double jbar = std::accumulate(in.jackknife.begin(), in.jackknife.end(), 0.0) /
                          static_cast<double>(in.jackknife.size());
            double num = 0.0, den = 0.0;
            for (double x : in.jackknife) {
                double d = jbar - x;
                num += d * d * d;
                den += d * d;
            }
            double accel = num / (6.0 * std::pow(den, 1.5));

            auto adjust = [&](double z_alpha) {
                double z = z0 + (z0 + z_alpha) / (1.0 - accel * (z0 + z_alpha));
                return normal_cdf(z);
            };
            q_lo = adjust(normal_quantile(alpha / 2.0));
            q_hi = adjust(normal_quantile(1.0 - alpha / 2.0));
        }
    }

    ci.method = use_bca ? (cluster ? CiMethod::cluster_bca : CiMethod::bca)
                        : (cluster ? CiMethod::cluster_percentile : CiMethod::percentile);
    ci.lo = empirical_quantile(sorted, q_lo);
    ci.hi = empirical_quantile(sorted, q_hi);
    return ci;
}

void check_bootstrap_args(std::size_t n_units, CiMethod method, double level,
                          std::size_t resamples) {
    if (n_units < 2) throw Error("TooFewUnits", "bootstrap needs at least 2 units");
    if (resamples < 100) throw Error("TooFewResamples", "bootstrap needs at least 100 resamples");
    if (!(level > 0.0 && level < 1.0)) throw Error("InvalidArgument", "level must be in (0,1)");
    if ((method == CiMethod::bca || method == CiMethod::cluster_bca) && n_units < 3) {
        throw Error("TooFewUnits", "BCa jackknife needs at least 3 units");
    }
}

}  // namespace

std::string to_string(CiMethod method) {
    switch (method) {
        case CiMethod::percentile: return "percentile";
        case CiMethod::bca: return "bca";
        case CiMethod::cluster_percentile: return "cluster-percentile";
        case CiMethod::cluster_bca: return "cluster-bca";
    }
    return "?";
}

BootstrapCI bootstrap_ci(std::span<const double> data, const VectorStatistic& statistic,
                         CiMethod method, double level, std::size_t resamples,
                         std::uint64_t seed, unsigned threads) {
    if (method == CiMethod::cluster_percentile || method == CiMethod::cluster_bca) {
        throw Error("InvalidArgument", "cluster methods need a TaskMatrix");
    }
    check_bootstrap_args(data.size(), method, level, resamples);
    for (double x : data) {
        if (!std::isfinite(x)) throw Error("NonFiniteValue", "bootstrap data is not finite");
    }

    std::size_t n = data.size();
    double point = statistic(data);

    std::vector<double> boot(resamples);
    parallel_for(resamples, threads, [&](std::size_t r) {
        SplitMix64 rng = stream_rng(seed, r);
        std::vector<double> draw(n);
        for (std::size_t j = 0; j < n; ++j) draw[j] = data[rng.next_below(n)];
        boot[r] = statistic(draw);
    });

    auto jack = [&]() {
        BcaInputs in;
        in.point = point;
        in.jackknife.resize(n);
        std::vector<double> loo(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t w = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) loo[w++] = data[j];
            }
            in.jackknife[i] = statistic(loo);
        }
        return in;
    };

    return finish_interval(std::move(boot), method, false, level, resamples, seed, point,
                           jack);
}

BootstrapCI bootstrap_ci(const TaskMatrix& matrix, const TableStatistic& statistic,
                         CiMethod method, double level, std::size_t resamples,
                         std::uint64_t seed, unsigned threads) {
    CiMethod base = method;
    if (method == CiMethod::cluster_percentile) base = CiMethod::percentile;
    if (method == CiMethod::cluster_bca) base = CiMethod::bca;
    check_bootstrap_args(matrix.num_tasks(), base, level, resamples);

    std::size_t n = matrix.num_tasks();
    double point = statistic(matrix.mean_table());

    std::vector<double> boot(resamples);
    parallel_for(resamples, threads, [&](std::size_t r) {
        SplitMix64 rng = stream_rng(seed, r);
        std::vector<std::size_t> draw(n);
        for (std::size_t j = 0; j < n; ++j) draw[j] = rng.next_below(n);
        boot[r] = statistic(matrix.mean_table(draw));
    });

    auto jack = [&]() {
        BcaInputs in;
        in.point = point;
        in.jackknife.resize(n);
        std::vector<std::size_t> loo(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t w = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) loo[w++] = j;
            }
            in.jackknife[i] = statistic(matrix.mean_table(loo));
        }
        return in;
    };

    return finish_interval(std::move(boot), base, true, level, resamples, seed, point, jack);
}

BootstrapCI harsanyi_bootstrap(const TaskMatrix& matrix, const ComponentSet& coalition,
                               CiMethod method, std::size_t resamples, std::uint64_t seed,
                               double level, unsigned threads) {
    if (!(coalition.universe() == matrix.universe())) {
        throw Error("UniverseMismatch", "coalition and matrix use different universes");
    }
    if (!matrix.covers_sublattice(coalition.mask())) {
        throw Error("IncompleteMatrix",
                    "matrix is missing coalitions from the sub-lattice of " + coalition.label());
    }
    CiMethod base = method;
    if (method == CiMethod::cluster_percentile) base = CiMethod::percentile;
    if (method == CiMethod::cluster_bca) base = CiMethod::bca;
    check_bootstrap_args(matrix.num_tasks(), base, level, resamples);

    Mask mask = coalition.mask();
    auto stat = [mask](const CoalitionTable& table) {
        return harsanyi_dividend(table, mask);
    };
    std::size_t n = matrix.num_tasks();
    double point = stat(matrix.mean_table());

    std::vector<double> boot(resamples);
    parallel_for(resamples, threads, [&](std::size_t r) {
        SplitMix64 rng = stream_rng(seed, r);
        std::vector<std::size_t> draw(n);
        for (std::size_t j = 0; j < n; ++j) draw[j] = rng.next_below(n);
        boot[r] = stat(matrix.mean_table(draw));
    });

    // One-sided bootstrap p against zero: resample mass on the far side of 0
    // from the point estimate.
    std::size_t opposite = 0;
    for (double x : boot) {
        if (point >= 0.0 ? x <= 0.0 : x >= 0.0) ++opposite;
    }

    auto jack = [&]() {
        BcaInputs in;
        in.point = point;
        in.jackknife.resize(n);
        std::vector<std::size_t> loo(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t w = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) loo[w++] = j;
            }
            in.jackknife[i] = stat(matrix.mean_table(loo));
        }
        return in;
    };

    BootstrapCI ci =
        finish_interval(std::move(boot), base, true, level, resamples, seed, point, jack);
    ci.p_one_sided = static_cast<double>(opposite) / static_cast<double>(resamples);
    return ci;
}

double mean_statistic(std::span<const double> data) {
    double sum = 0.0;
    for (double x : data) sum += x;
    return sum / static_cast<double>(data.size());
}

double median_statistic(std::span<const double> data) {
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    std::size_t n = sorted.size();
    return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace colat
