#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridrep/classify/glm.hpp"
#include "gridrep/core/matrix.hpp"
#include "gridrep/core/rng.hpp"
#include "gridrep/verify/scores.hpp"

namespace gridrep::classify {

struct FoldAssignment {
    std::size_t k = 0;
    std::vector<std::size_t> fold_of;  // fold index per sample

    std::vector<std::vector<std::size_t>> members() const;
    std::vector<std::size_t> sizes() const;
};

/// Shuffled partition with fold sizes differing by at most one.
FoldAssignment kfold_split(std::size_t n, std::size_t k, SeededRng& rng);

/// Like kfold_split but deals each class round-robin, so every fold gets
/// its share of positives.
FoldAssignment stratified_kfold_split(std::span<const int> y, std::size_t k, SeededRng& rng);

struct CvOptions {
    std::size_t folds = 10;
    bool stratified = false;
    double threshold = 0.5;
    GlmOptions glm;
};

struct FoldResult {
    std::size_t fold = 0;
    std::size_t train_size = 0, test_size = 0;
    bool degenerate = false;  // training split had one class; excluded from pooling
    bool converged = false;
    bool separated = false;
    std::string note;
    verify::ContingencyTable table;
};

struct CvResult {
    std::vector<std::optional<double>> probabilities;  // held-out prediction per sample
    std::vector<FoldResult> folds;
    verify::ContingencyTable pooled;  // sum of non-degenerate fold tables

    std::size_t degenerate_folds() const;
};

CvResult cross_validate(const Matrix& x, std::span<const int> y, const CvOptions& opts, SeededRng& rng);

}  // namespace gridrep::classify
