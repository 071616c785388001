#include "gridrep/classify/cv.hpp"

#include <numeric>

#include "gridrep/error.hpp"

namespace gridrep::classify {

namespace {

void shuffle(std::vector<std::size_t>& v, SeededRng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

void check_k(std::size_t n, std::size_t k) {
    if (k < 2) throw InvalidInput("cross-validation needs at least 2 folds");
    if (n < k) throw InvalidInput("cannot split " + std::to_string(n) + " samples into " + std::to_string(k) + " folds");
}

Matrix select_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = x.row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> FoldAssignment::members() const {
    std::vector<std::vector<std::size_t>> m(k);
    for (std::size_t i = 0; i < fold_of.size(); ++i) m[fold_of[i]].push_back(i);
    return m;
}

std::vector<std::size_t> FoldAssignment::sizes() const {
    std::vector<std::size_t> s(k, 0);
    for (std::size_t f : fold_of) ++s[f];
    return s;
}

FoldAssignment kfold_split(std::size_t n, std::size_t k, SeededRng& rng) {
    check_k(n, k);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    FoldAssignment a;
    a.k = k;
    a.fold_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) a.fold_of[order[i]] = i % k;
    return a;
}

FoldAssignment stratified_kfold_split(std::span<const int> y, std::size_t k, SeededRng& rng) {
    check_k(y.size(), k);
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);
    shuffle(pos, rng);
    shuffle(neg, rng);
    FoldAssignment a;
    a.k = k;
    a.fold_of.resize(y.size());
    // Negatives continue the deal where positives stopped, keeping sizes within one.
    std::size_t slot = 0;
    for (auto* group : {&pos, &neg})
        for (std::size_t i : *group) a.fold_of[i] = slot++ % k;
    return a;
}

std::size_t CvResult::degenerate_folds() const {
    std::size_t n = 0;
    for (const auto& f : folds) n += f.degenerate;
    return n;
}

CvResult cross_validate(const Matrix& x, std::span<const int> y, const CvOptions& opts, SeededRng& rng) {
    if (y.size() != x.rows()) {
        throw AlignmentError(std::to_string(y.size()) + " labels for " + std::to_string(x.rows()) + " feature rows");
    }
    std::size_t ones = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw InvalidInput("label " + std::to_string(i) + " is not 0/1");
        ones += static_cast<std::size_t>(y[i]);
    }
    if (ones == 0 || ones == y.size()) throw DegenerateLabels("labels contain a single class; cross-validation is undefined");

    const FoldAssignment assign = opts.stratified ? stratified_kfold_split(y, opts.folds, rng) : kfold_split(y.size(), opts.folds, rng);
    CvResult result;
    result.probabilities.assign(y.size(), std::nullopt);

    for (std::size_t f = 0; f < assign.k; ++f) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < y.size(); ++i) (assign.fold_of[i] == f ? test_idx : train_idx).push_back(i);
        FoldResult fr;
        fr.fold = f;
        fr.train_size = train_idx.size();
        fr.test_size = test_idx.size();

        std::vector<int> y_train, y_test;
        for (std::size_t i : train_idx) y_train.push_back(y[i]);
        for (std::size_t i : test_idx) y_test.push_back(y[i]);
        const std::size_t train_ones = static_cast<std::size_t>(std::accumulate(y_train.begin(), y_train.end(), 0));
        if (train_ones == 0 || train_ones == y_train.size()) {
            fr.degenerate = true;
            fr.note = "training split has only " + std::string(train_ones == 0 ? "negatives" : "positives");
            result.folds.push_back(fr);
            continue;
        }

        GlmFit fit = fit_logistic(select_rows(x, train_idx), y_train, opts.glm);
        fr.converged = fit.converged;
        fr.separated = fit.separated;
        if (fit.separated) fr.note = "perfect separation; coefficients capped";
        else if (!fit.converged) fr.note = "did not converge in " + std::to_string(fit.iterations) + " iterations";

        const auto probs = predict_proba(fit, select_rows(x, test_idx));
        for (std::size_t j = 0; j < test_idx.size(); ++j) result.probabilities[test_idx[j]] = probs[j];
        fr.table = verify::tabulate(classify(probs, opts.threshold), y_test);
        result.pooled += fr.table;
        result.folds.push_back(fr);
    }
    return result;
}

}  // namespace gridrep::classify
