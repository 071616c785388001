#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridrep/core/linalg.hpp"
#include "gridrep/core/matrix.hpp"

namespace gridrep::pca {

/// Principal axes of a dataset. Rows of `components` are orthonormal and each
/// row's largest-magnitude entry is non-negative (deterministic signs).
struct PcaModel {
    std::vector<double> mean;
    Matrix components;  // k×D
    std::vector<double> singular_values;
    std::uint64_t n_seen = 0;

    /// Unfitted model that will keep k components once data arrives.
    static PcaModel empty(std::size_t k);

    std::size_t n_components() const { return components.rows(); }
    std::size_t dim() const { return mean.size(); }
    bool fitted() const { return n_seen > 0; }

    /// Leading k components of this model.
    PcaModel truncated(std::size_t k) const;

    friend bool operator==(const PcaModel&, const PcaModel&) = default;
};

enum class SvdSolver { exact, randomized };

struct PcaOptions {
    SvdSolver solver = SvdSolver::randomized;
    RandomizedSvdOptions rsvd{};
    std::uint64_t seed = 0;
    std::size_t batch_size = 256;
};

/// Batch PCA through the exact SVD of the centered data.
PcaModel fit_batch(const Matrix& x, std::size_t k);

/// One incremental update (Ross et al.): the retained axes scaled by their
/// singular values, the centered batch, and a mean-correction row are stacked
/// and re-factorized; the top k axes are kept. An unfitted model is simply
/// fitted on the batch.
PcaModel partial_fit(const PcaModel& model, const Matrix& batch, const PcaOptions& opts = {});

/// Streams x through partial_fit in row batches of opts.batch_size.
PcaModel fit_incremental(const Matrix& x, std::size_t k, const PcaOptions& opts = {});

Matrix transform(const PcaModel& model, const Matrix& x);
Matrix inverse_transform(const PcaModel& model, const Matrix& z);
double reconstruction_rmse(const PcaModel& model, const Matrix& x);

/// GRPCA1 model file.
std::vector<char> serialize(const PcaModel& model);
PcaModel deserialize(std::span<const char> bytes);
void save(const PcaModel& model, const std::string& path);
PcaModel load(const std::string& path);

}  // namespace gridrep::pca
