#include "gridrep/classify/glm.hpp"

#include <cmath>

#include "gridrep/core/linalg.hpp"
#include "gridrep/core/text.hpp"
#include "gridrep/error.hpp"

namespace gridrep::classify {

namespace {

constexpr double kConstantVariance = 1e-12;
constexpr double kSeparatedResidual = 1e-6;

double sigmoid(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow.
double softplus(double eta) { return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))); }

void check_labels(std::span<const int> y, std::size_t n) {
    if (y.size() != n) throw InvalidInput("label count " + std::to_string(y.size()) + " does not match " + std::to_string(n) + " rows");
    std::size_t ones = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw InvalidInput("label " + std::to_string(i) + " is not 0/1");
        ones += static_cast<std::size_t>(y[i]);
    }
    if (ones == 0 || ones == y.size()) {
        throw DegenerateLabels("labels contain a single class (" + std::to_string(ones) + " positives of " +
                               std::to_string(y.size()) + ")");
    }
}

// Design matrix over the kept columns with a leading column of ones.
struct Design {
    std::size_t n = 0, p = 0;
    std::vector<double> z;  // row-major n x p
};

Design build_design(const Matrix& x, const std::vector<std::size_t>& keep, const GlmFit& fit) {
    Design d;
    d.n = x.rows();
    d.p = keep.size() + 1;
    d.z.resize(d.n * d.p);
    for (std::size_t i = 0; i < d.n; ++i) {
        double* row = d.z.data() + i * d.p;
        row[0] = 1.0;
        for (std::size_t j = 0; j < keep.size(); ++j) {
            const std::size_t c = keep[j];
            double v = x(i, c);
            if (!fit.center.empty()) v = (v - fit.center[c]) / fit.scale[c];
            row[j + 1] = v;
        }
    }
    return d;
}

double penalized_loglik(const Design& d, std::span<const int> y, const std::vector<double>& beta, double ridge,
                        double* loglik = nullptr) {
    double ll = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) {
        const double* row = d.z.data() + i * d.p;
        double eta = 0.0;
        for (std::size_t j = 0; j < d.p; ++j) eta += row[j] * beta[j];
        ll += y[i] * eta - softplus(eta);
    }
    if (loglik) *loglik = ll;
    double pen = 0.0;
    for (std::size_t j = 1; j < d.p; ++j) pen += beta[j] * beta[j];
    return ll - 0.5 * ridge * pen;
}

// Penalized information matrix and score at beta.
void information(const Design& d, std::span<const int> y, const std::vector<double>& beta, double ridge, Matrix& h,
                 std::vector<double>& g) {
    h = Matrix(d.p, d.p);
    g.assign(d.p, 0.0);
    for (std::size_t i = 0; i < d.n; ++i) {
        const double* row = d.z.data() + i * d.p;
        double eta = 0.0;
        for (std::size_t j = 0; j < d.p; ++j) eta += row[j] * beta[j];
        const double mu = sigmoid(eta);
        const double w = mu * (1.0 - mu);
        const double r = y[i] - mu;
        for (std::size_t a = 0; a < d.p; ++a) {
            g[a] += row[a] * r;
            const double wa = w * row[a];
            for (std::size_t b = 0; b <= a; ++b) h(a, b) += wa * row[b];
        }
    }
    for (std::size_t a = 0; a < d.p; ++a)
        for (std::size_t b = 0; b < a; ++b) h(b, a) = h(a, b);
    for (std::size_t j = 1; j < d.p; ++j) {
        h(j, j) += ridge;
        g[j] -= ridge * beta[j];
    }
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

}  // namespace

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

WaldStats wald(double coef, double se) {
    WaldStats w;
    w.z = coef / se;
    w.p = two_sided_p(w.z);
    w.ci_low = coef - kZ95 * se;
    w.ci_high = coef + kZ95 * se;
    return w;
}

GlmFit fit_logistic(const Matrix& x, std::span<const int> y, const GlmOptions& opts) {
    if (opts.ridge < 0.0 || !std::isfinite(opts.ridge)) throw InvalidInput("ridge must be a finite value >= 0");
    if (opts.max_iter < 1) throw InvalidInput("max_iter must be >= 1");
    check_labels(y, x.rows());
    const std::size_t n = x.rows(), dim = x.cols();

    GlmFit fit;
    std::vector<std::size_t> keep;
    std::vector<double> mean(dim, 0.0), sd(dim, 1.0);
    for (std::size_t c = 0; c < dim; ++c) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += x(i, c);
        m /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (x(i, c) - m) * (x(i, c) - m);
        var /= static_cast<double>(n);
        mean[c] = m;
        if (var < kConstantVariance) {
            fit.dropped.push_back(c);
        } else {
            keep.push_back(c);
            sd[c] = std::sqrt(var);
        }
    }
    if (opts.standardize) {
        fit.center = mean;
        fit.scale = sd;
    }

    const Design d = build_design(x, keep, fit);
    std::vector<double> beta(d.p, 0.0);
    double obj = penalized_loglik(d, y, beta, opts.ridge);
    Matrix h;
    std::vector<double> g, step;

    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        fit.iterations = it;
        information(d, y, beta, opts.ridge, h, g);
        if (!cholesky_solve(h, g, step)) {
            throw NumericalError("logistic regression information matrix is not positive definite (collinear features?)");
        }
        // Step halving keeps the penalized log-likelihood from decreasing.
        std::vector<double> trial(d.p);
        double trial_obj = obj;
        bool accepted = false;
        double t = 1.0;
        for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
            for (std::size_t j = 0; j < d.p; ++j) trial[j] = beta[j] + t * step[j];
            trial_obj = penalized_loglik(d, y, trial, opts.ridge);
            if (std::isfinite(trial_obj) && trial_obj >= obj) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // No ascent direction left at working precision.
            fit.converged = true;
            fit.objective_history.push_back(obj);
            break;
        }
        const double change = std::abs(trial_obj - obj);
        beta = trial;
        obj = trial_obj;
        fit.objective_history.push_back(obj);
        if (norm2(beta) > opts.separation_cap) {
            fit.separated = true;
            break;
        }
        if (change <= opts.tol * (std::abs(obj) + 0.1)) {
            fit.converged = true;
            break;
        }
    }
    penalized_loglik(d, y, beta, opts.ridge, &fit.log_likelihood);
    if (!fit.separated) {
        double worst = 0.0;
        for (std::size_t i = 0; i < d.n; ++i) {
            const double* row = d.z.data() + i * d.p;
            double eta = 0.0;
            for (std::size_t j = 0; j < d.p; ++j) eta += row[j] * beta[j];
            worst = std::max(worst, std::abs(y[i] - sigmoid(eta)));
        }
        fit.separated = worst < kSeparatedResidual;
    }

    fit.coefficients.assign(dim + 1, 0.0);
    fit.std_errors.assign(dim + 1, std::nullopt);
    fit.z_scores = fit.p_values = fit.ci_low = fit.ci_high = fit.std_errors;
    fit.coefficients[0] = beta[0];
    for (std::size_t j = 0; j < keep.size(); ++j) fit.coefficients[keep[j] + 1] = beta[j + 1];

    information(d, y, beta, opts.ridge, h, g);
    Matrix cov;
    if (cholesky_inverse(h, cov)) {
        auto set_stats = [&](std::size_t out, std::size_t in) {
            const double v = cov(in, in);
            if (!(v > 0.0) || !std::isfinite(v)) return;
            const double se = std::sqrt(v);
            const WaldStats w = wald(fit.coefficients[out], se);
            fit.std_errors[out] = se;
            fit.z_scores[out] = w.z;
            fit.p_values[out] = w.p;
            fit.ci_low[out] = w.ci_low;
            fit.ci_high[out] = w.ci_high;
        };
        set_stats(0, 0);
        for (std::size_t j = 0; j < keep.size(); ++j) set_stats(keep[j] + 1, j + 1);
    }
    return fit;
}

std::vector<double> predict_proba(const GlmFit& fit, const Matrix& x) {
    if (fit.coefficients.empty()) throw InvalidInput("model is not fitted");
    if (x.cols() != fit.n_features()) {
        throw InvalidInput("feature width " + std::to_string(x.cols()) + " does not match fitted width " +
                           std::to_string(fit.n_features()));
    }
    std::vector<double> p(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double eta = fit.coefficients[0];
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double b = fit.coefficients[c + 1];
            if (b == 0.0) continue;
            double v = x(i, c);
            if (!fit.center.empty()) v = (v - fit.center[c]) / fit.scale[c];
            eta += b * v;
        }
        p[i] = sigmoid(eta);
    }
    return p;
}

std::vector<int> classify(std::span<const double> probs, double threshold) {
    std::vector<int> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
    return out;
}

std::vector<SignificanceRow> significance_table(const GlmFit& fit, const std::vector<std::string>& feature_names) {
    const std::size_t dim = fit.n_features();
    if (!feature_names.empty() && feature_names.size() != dim) {
        throw InvalidInput(std::to_string(feature_names.size()) + " feature names for " + std::to_string(dim) + " features");
    }
    std::vector<bool> is_dropped(dim, false);
    for (std::size_t c : fit.dropped) is_dropped[c] = true;
    std::vector<SignificanceRow> rows;
    for (std::size_t c = 0; c < dim; ++c) {
        SignificanceRow r;
        r.feature = feature_names.empty() ? std::to_string(c) : feature_names[c];
        r.coefficient = fit.coefficients[c + 1];
        if (is_dropped[c]) {
            r.std_error = 0.0;
            r.ci_low = 0.0;
            r.ci_high = 0.0;
        } else {
            r.std_error = fit.std_errors[c + 1];
            r.z = fit.z_scores[c + 1];
            r.p = fit.p_values[c + 1];
            r.ci_low = fit.ci_low[c + 1];
            r.ci_high = fit.ci_high[c + 1];
        }
        rows.push_back(r);
    }
    return rows;
}

std::string significance_csv(const std::vector<SignificanceRow>& rows) {
    std::string out = "feature,coefficient,std_error,z,p,ci_low,ci_high\n";
    for (const auto& r : rows) {
        out += r.feature + "," + text::general(r.coefficient, 6);
        for (const auto* v : {&r.std_error, &r.z, &r.p, &r.ci_low, &r.ci_high}) out += "," + text::general_or_na(*v, 6);
        out += "\n";
    }
    return out;
}

}  // namespace gridrep::classify
