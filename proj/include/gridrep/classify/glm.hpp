#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridrep/core/matrix.hpp"

namespace gridrep::classify {

/// Critical value of the standard normal used for 95% intervals.
inline constexpr double kZ95 = 1.959964;

struct GlmOptions {
    double ridge = 0.0;  // L2 penalty on slopes; the intercept is never penalized
    std::size_t max_iter = 100;
    double tol = 1e-10;  // relative change of the penalized log-likelihood
    bool standardize = false;
    // Fits whose coefficient norm passes this are treated as perfectly
    // separated: iteration stops and the fit is flagged. A fit that ends with
    // every probability within 1e-6 of its label is flagged too.
    double separation_cap = 1e3;
};

/// Logistic regression fit. Index 0 is the intercept, index j+1 is feature j.
/// Statistics are missing for dropped (constant) features and whenever the
/// information matrix cannot be inverted.
struct GlmFit {
    std::vector<double> coefficients;
    std::vector<std::optional<double>> std_errors, z_scores, p_values, ci_low, ci_high;
    std::vector<std::size_t> dropped;   // constant feature columns, coefficient exactly 0
    std::vector<double> center, scale;  // per-feature standardization, empty when off
    bool converged = false;
    bool separated = false;
    std::size_t iterations = 0;
    double log_likelihood = 0.0;
    std::vector<double> objective_history;  // penalized log-likelihood after each iteration

    std::size_t n_features() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }
};

/// IRLS with step halving. Labels are 0/1; both classes must be present.
GlmFit fit_logistic(const Matrix& x, std::span<const int> y, const GlmOptions& opts = {});

/// sigmoid(intercept + x * coefficients) per row.
std::vector<double> predict_proba(const GlmFit& fit, const Matrix& x);

/// 1 where prob >= threshold (inclusive).
std::vector<int> classify(std::span<const double> probs, double threshold = 0.5);

/// Two-sided normal p-value, 2 * (1 - Phi(|z|)) = erfc(|z| / sqrt 2).
double two_sided_p(double z);

struct WaldStats {
    double z = 0.0, p = 1.0, ci_low = 0.0, ci_high = 0.0;
};
/// z = coef / se, its p-value and the 95% interval coef -/+ 1.959964 se.
WaldStats wald(double coef, double se);

struct SignificanceRow {
    std::string feature;
    double coefficient = 0.0;
    std::optional<double> std_error, z, p, ci_low, ci_high;
};

/// One row per feature (intercept excluded). Dropped features print as
/// coefficient 0, std error 0, z and p NA, interval [0, 0]. Empty names
/// default to the feature index.
std::vector<SignificanceRow> significance_table(const GlmFit& fit, const std::vector<std::string>& feature_names = {});

/// feature,coefficient,std_error,z,p,ci_low,ci_high with NA literals.
std::string significance_csv(const std::vector<SignificanceRow>& rows);

}  // namespace gridrep::classify
