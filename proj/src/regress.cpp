#include "colat/regress.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "colat/error.hpp"

namespace colat {

namespace {

constexpr double kEigenSignThreshold = 1e-9;
constexpr double kLeverageTol = 1e-10;

// Product-term subsets per model order, by subset size then lexicographic
// index order (matches nested i<j<... loops).
std::vector<Mask> product_masks(std::size_t k, ModelOrder order) {
    std::vector<Mask> out;
    if (order == ModelOrder::main) return out;
    if (order == ModelOrder::pairwise) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                out.push_back((Mask{1} << i) | (Mask{1} << j));
            }
        }
        return out;
    }
    // Saturated: every subset of size >= 2, grouped by size.
    for (std::size_t size = 2; size <= k; ++size) {
        std::vector<std::size_t> idx(size);
        for (std::size_t i = 0; i < size; ++i) idx[i] = i;
        while (true) {
            Mask m = 0;
            for (std::size_t i : idx) m |= Mask{1} << i;
            out.push_back(m);
            // Next lexicographic combination.
            std::size_t pos = size;
            while (pos > 0 && idx[pos - 1] == k - size + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t i = pos; i < size; ++i) idx[i] = idx[i - 1] + 1;
        }
    }
    return out;
}

std::string product_label(const Universe& universe, Mask mask) {
    std::string out;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        if ((mask >> i) & 1u) {
            if (!out.empty()) out += '*';
            out += universe.name(i);
        }
    }
    return out;
}

Eigen::VectorXd hat_diagonal(const Eigen::MatrixXd& x) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    Eigen::MatrixXd thin_q =
        qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), x.cols());
    return thin_q.rowwise().squaredNorm();
}

}  // namespace

std::string to_string(Encoding encoding) {
    return encoding == Encoding::binary ? "binary" : "spin";
}

std::string to_string(ModelOrder order) {
    switch (order) {
        case ModelOrder::main: return "main";
        case ModelOrder::pairwise: return "pairwise";
        case ModelOrder::full: return "full";
    }
    return "?";
}

DesignMatrix build_design(const CoalitionTable& table, DesignSpec spec, bool allow_partial) {
    if (!allow_partial) table.require_complete();

    DesignMatrix design;
    design.universe = table.universe();
    design.spec = spec;
    design.row_masks = table.present_masks();

    std::size_t k = table.num_components();
    std::vector<Mask> products = product_masks(k, spec.order);

    design.columns.push_back("intercept");
    for (std::size_t i = 0; i < k; ++i) design.columns.push_back(table.universe().name(i));
    for (Mask m : products) design.columns.push_back(product_label(table.universe(), m));

    std::size_t n = design.row_masks.size();
    std::size_t p = design.columns.size();
    if (n <= p && allow_partial) {
        throw Error("TooFewRows", "design has " + std::to_string(n) + " rows for " +
                                      std::to_string(p) + " parameters");
    }

    design.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    design.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        Mask mask = design.row_masks[r];
        auto row = static_cast<Eigen::Index>(r);
        design.x(row, 0) = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            bool on = (mask >> i) & 1u;
            design.x(row, static_cast<Eigen::Index>(1 + i)) =
                spec.encoding == Encoding::binary ? (on ? 1.0 : 0.0) : (on ? 1.0 : -1.0);
        }
        for (std::size_t c = 0; c < products.size(); ++c) {
            double prod = 1.0;
            Mask rest = products[c];
            while (rest) {
                std::size_t i = std::countr_zero(rest);
                prod *= design.x(row, static_cast<Eigen::Index>(1 + i));
                rest &= rest - 1;
            }
            design.x(row, static_cast<Eigen::Index>(1 + k + c)) = prod;
        }
        design.y(row) = table.value(mask);
    }
    return design;
}

RegressionFit fit_ols(const DesignMatrix& design) {
    auto n = static_cast<std::size_t>(design.x.rows());
    auto p = static_cast<std::size_t>(design.x.cols());
    if (n < p) {
        throw Error("TooFewRows", "design has " + std::to_string(n) + " rows for " +
                                      std::to_string(p) + " parameters");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
    if (static_cast<std::size_t>(qr.rank()) < p) {
        auto dependent = qr.colsPermutation().indices()(qr.rank());
        throw Error("RankDeficient",
                    "design columns are linearly dependent (first dependent column: '" +
                        design.columns[static_cast<std::size_t>(dependent)] + "')");
    }

    RegressionFit fit;
    fit.universe = design.universe;
    fit.spec = design.spec;
    fit.columns = design.columns;
    fit.n = n;
    fit.p = p;

    Eigen::VectorXd beta = qr.solve(design.y);
    Eigen::VectorXd fitted = design.x * beta;
    Eigen::VectorXd resid = design.y - fitted;

    fit.coefficients.assign(beta.data(), beta.data() + beta.size());
    fit.fitted.assign(fitted.data(), fitted.data() + fitted.size());
    fit.residuals.assign(resid.data(), resid.data() + resid.size());

    double mean = design.y.mean();
    fit.rss = resid.squaredNorm();
    fit.tss = (design.y.array() - mean).matrix().squaredNorm();
    fit.r2 = fit.tss == 0.0 ? 1.0 : 1.0 - fit.rss / fit.tss;
    fit.adj_r2 = n > p ? 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) /
                                   static_cast<double>(n - p)
                       : fit.r2;

    if (n > p) {
        Eigen::VectorXd h = hat_diagonal(design.x);
        bool leverage_one = false;
        for (Eigen::Index i = 0; i < h.size(); ++i) {
            if (h(i) >= 1.0 - kLeverageTol) leverage_one = true;
        }
        if (!leverage_one) fit.loocv_r2 = loocv_r2(design);
        InformationCriteria ic = information_criteria(fit);
        fit.aic = ic.aic;
        fit.bic = ic.bic;
    }
    return fit;
}

double loocv_r2(const DesignMatrix& design) {
    auto n = static_cast<std::size_t>(design.x.rows());
    auto p = static_cast<std::size_t>(design.x.cols());
    if (n <= p) throw Error("TooFewRows", "LOOCV needs n > p");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
    if (static_cast<std::size_t>(qr.rank()) < p) {
        throw Error("RankDeficient", "design columns are linearly dependent");
    }
    Eigen::VectorXd resid = design.y - design.x * qr.solve(design.y);
    Eigen::VectorXd h = hat_diagonal(design.x);

    double press = 0.0;
    for (Eigen::Index i = 0; i < resid.size(); ++i) {
        if (h(i) >= 1.0 - kLeverageTol) {
            throw Error("LeverageOne",
                        "row " + std::to_string(i) + " has leverage 1; its LOO prediction "
                        "is undefined",
                        ErrorCategory::numeric);
        }
        double e = resid(i) / (1.0 - h(i));
        press += e * e;
    }
    double mean = design.y.mean();
    double tss = (design.y.array() - mean).matrix().squaredNorm();
    if (tss == 0.0) {
        return press == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    }
    return 1.0 - press / tss;
}

double loocv_r2_refit(const DesignMatrix& design) {
    auto n = design.x.rows();
    auto p = design.x.cols();
    if (n <= p) throw Error("TooFewRows", "LOOCV needs n > p");

    double press = 0.0;
    Eigen::MatrixXd xr(n - 1, p);
    Eigen::VectorXd yr(n - 1);
    for (Eigen::Index leave = 0; leave < n; ++leave) {
        Eigen::Index w = 0;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == leave) continue;
            xr.row(w) = design.x.row(r);
            yr(w) = design.y(r);
            ++w;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xr);
        if (qr.rank() < p) {
            throw Error("LeverageOne",
                        "row " + std::to_string(leave) + " is pivotal; refit is rank-deficient "
                        "without it",
                        ErrorCategory::numeric);
        }
        Eigen::VectorXd beta = qr.solve(yr);
        double e = design.y(leave) - design.x.row(leave).dot(beta);
        press += e * e;
    }
    double mean = design.y.mean();
    double tss = (design.y.array() - mean).matrix().squaredNorm();
    if (tss == 0.0) {
        return press == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
    }
    return 1.0 - press / tss;
}

InformationCriteria information_criteria(const RegressionFit& fit) {
    if (fit.n <= fit.p) throw Error("InvalidArgument", "information criteria need n > p");
    double n = static_cast<double>(fit.n);
    double k_params = static_cast<double>(fit.p) + 1.0;  // + profiled error variance
    if (fit.rss == 0.0) {
        double inf = std::numeric_limits<double>::infinity();
        return InformationCriteria{-inf, -inf};
    }
    double minus_two_loglik =
        n * std::log(fit.rss / n) + n * (1.0 + std::log(2.0 * M_PI));
    return InformationCriteria{minus_two_loglik + 2.0 * k_params,
                               minus_two_loglik + k_params * std::log(n)};
}

double RegressionFit::coupling(std::size_t i, std::size_t j) const {
    if (spec.order == ModelOrder::main) {
        throw Error("NotPairwiseFit", "fit has no coupling terms");
    }
    std::size_t k = universe.size();
    if (i == j || i >= k || j >= k) throw Error("InvalidArgument", "bad coupling index pair");
    std::size_t lo = std::min(i, j);
    std::size_t hi = std::max(i, j);
    // Pair columns follow the k mains in lexicographic (lo,hi) order.
    std::size_t offset = 0;
    for (std::size_t a = 0; a < lo; ++a) offset += k - a - 1;
    offset += hi - lo - 1;
    double raw = coefficients[1 + k + offset];
    return spec.encoding == Encoding::spin ? 4.0 * raw : raw;
}

CouplingEigen coupling_eigen(const RegressionFit& fit) {
    if (fit.spec.order != ModelOrder::pairwise) {
        throw Error("NotPairwiseFit", "coupling_eigen needs a pairwise-order fit");
    }
    std::size_t k = fit.universe.size();
    if (k < 2) throw Error("InvalidArgument", "coupling_eigen needs k >= 2");

    CouplingEigen out;
    out.universe = fit.universe;
    out.j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    out.strongest_positive = {0, 0, -std::numeric_limits<double>::infinity()};
    out.strongest_negative = {0, 0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            double v = fit.coupling(i, j);
            out.j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            out.j(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
            if (v > out.strongest_positive.value) out.strongest_positive = {i, j, v};
            if (v < out.strongest_negative.value) out.strongest_negative = {i, j, v};
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.j);
    if (solver.info() != Eigen::Success) {
        throw Error("EigenSolverFailed", "symmetric eigensolver did not converge",
                    ErrorCategory::numeric);
    }
    out.eigenvalues.assign(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + solver.eigenvalues().size());
    for (double lambda : out.eigenvalues) {
        if (lambda < -kEigenSignThreshold) ++out.n_negative;
        else if (lambda > kEigenSignThreshold) ++out.n_positive;
        else ++out.n_zero;
    }
    return out;
}

}  // namespace colat
