#pragma once

// Factorial design matrices over coalition tables, OLS fits of
// main-effects / pairwise-coupling / saturated models, model comparison
// (adjusted R^2, hat-matrix LOOCV, AIC/BIC), and eigen-analysis of the
// symmetric coupling matrix J.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "colat/lattice.hpp"

namespace colat {

enum class Encoding { binary, spin };  // 0/1 vs -1/+1 component indicators
enum class ModelOrder { main, pairwise, full };

std::string to_string(Encoding encoding);
std::string to_string(ModelOrder order);

struct DesignSpec {
    Encoding encoding = Encoding::binary;
    ModelOrder order = ModelOrder::main;
};

struct DesignMatrix {
    Universe universe;
    DesignSpec spec;
    std::vector<std::string> columns;  // "intercept", mains, then "A*B" pairs...
    std::vector<Mask> row_masks;       // ascending mask order
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

// Rows in canonical mask order; columns: intercept, mains in universe order,
// then products by subset size in lexicographic index order. A partial table
// is accepted only when allow_partial is set and it still has > p rows.
DesignMatrix build_design(const CoalitionTable& table, DesignSpec spec,
                          bool allow_partial = false);

struct RegressionFit {
    Universe universe;
    DesignSpec spec;
    std::vector<std::string> columns;
    std::vector<double> coefficients;  // raw, in design encoding
    std::vector<double> fitted;
    std::vector<double> residuals;
    std::size_t n = 0;
    std::size_t p = 0;  // number of regression coefficients incl. intercept
    double rss = 0.0;
    double tss = 0.0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    std::optional<double> loocv_r2;  // absent for saturated fits (n == p)
    std::optional<double> aic;
    std::optional<double> bic;

    double intercept() const { return coefficients[0]; }
    // Raw main-effect coefficient of component i (design encoding units).
    double main_effect(std::size_t i) const { return coefficients[1 + i]; }
    // Pairwise coupling J_ij in presence (0/1) units, i.e. the coefficient of
    // x_i * x_j in the equivalent binary-basis polynomial. A spin fit's raw
    // coupling is exactly 1/4 of this, so the reported value is
    // encoding-invariant. Requires order >= pairwise.
    double coupling(std::size_t i, std::size_t j) const;
};

// Least squares via column-pivoted Householder QR; a rank-deficient design is
// an error naming the first dependent column. Fills loocv/aic/bic when n > p.
RegressionFit fit_ols(const DesignMatrix& design);

// LOOCV R^2 = 1 - PRESS/TSS with the hat-matrix shortcut e_i / (1 - h_ii).
// Throws LeverageOne(row) when some h_ii is 1.
double loocv_r2(const DesignMatrix& design);

// Brute-force n-refit LOOCV; the independent route for cross-checking the
// hat-matrix shortcut.
double loocv_r2_refit(const DesignMatrix& design);

struct InformationCriteria {
    double aic;
    double bic;
};

// Gaussian maximum-likelihood convention with the error variance counted as
// a parameter: AIC = n ln(RSS/n) + n(1 + ln 2pi) + 2(p+1) and BIC likewise
// with (p+1) ln n. RSS == 0 reports -infinity explicitly.
InformationCriteria information_criteria(const RegressionFit& fit);

struct ExtremeCoupling {
    std::size_t i, j;
    double value;
};

struct CouplingEigen {
    Universe universe;
    Eigen::MatrixXd j;                 // symmetric, zero diagonal, presence units
    std::vector<double> eigenvalues;   // ascending
    int n_negative = 0;                // |lambda| > 1e-9
    int n_zero = 0;
    int n_positive = 0;
    ExtremeCoupling strongest_positive;
    ExtremeCoupling strongest_negative;
};

// Assembles J from a pairwise fit and reports its eigen-structure.
CouplingEigen coupling_eigen(const RegressionFit& fit);

}  // namespace colat
