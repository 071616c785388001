#include "gridrep/pca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridrep/core/binary_io.hpp"
#include "gridrep/error.hpp"

namespace gridrep::pca {

namespace {

constexpr std::string_view kMagic = "GRPCA1";

void normalize_signs(Matrix& components) {
    for (std::size_t r = 0; r < components.rows(); ++r) {
        auto row = components.row(r);
        std::size_t arg = 0;
        for (std::size_t c = 1; c < row.size(); ++c)
            if (std::abs(row[c]) > std::abs(row[arg])) arg = c;
        if (!row.empty() && row[arg] < 0.0)
            for (double& v : row) v = -v;
    }
}

// Extends k0 orthonormal rows to k rows with the canonical completion rule.
Matrix pad_components(const Matrix& rows, std::size_t k, std::size_t dim) {
    if (rows.rows() >= k) return rows.row_block(0, k);
    Matrix basis(dim, k);
    for (std::size_t r = 0; r < rows.rows(); ++r)
        for (std::size_t c = 0; c < dim; ++c) basis(c, r) = rows(r, c);
    Matrix q = qr_orthonormalize(basis);
    return transpose(q);
}

Matrix centered(const Matrix& x, const std::vector<double>& mean) {
    Matrix c = x;
    for (std::size_t r = 0; r < c.rows(); ++r) {
        auto row = c.row(r);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] -= mean[j];
    }
    return c;
}

// Top-k right singular structure of a, padded to exactly k axes.
void factorize(const Matrix& a, std::size_t k, const PcaOptions& opts, std::uint64_t stream, Matrix& components,
               std::vector<double>& sigma) {
    const std::size_t kavail = std::min({k, a.rows(), a.cols()});
    SvdResult s;
    if (opts.solver == SvdSolver::exact || kavail == std::min(a.rows(), a.cols())) {
        // Full rank is requested: the range finder would span everything anyway.
        s = exact_svd(a);
    } else {
        SeededRng rng(opts.seed ^ (stream * 0x9e3779b97f4a7c15ULL));
        s = randomized_svd(a, kavail, opts.rsvd.oversample, opts.rsvd.power_iters, rng);
    }
    Matrix top = s.vt.row_block(0, kavail);
    sigma.assign(s.singular_values.begin(), s.singular_values.begin() + static_cast<std::ptrdiff_t>(kavail));
    components = pad_components(top, k, a.cols());
    sigma.resize(k, 0.0);
    normalize_signs(components);
}

void check_fitted(const PcaModel& m) {
    if (!m.fitted()) throw InvalidInput("PCA model is not fitted");
}

}  // namespace

PcaModel PcaModel::empty(std::size_t k) {
    PcaModel m;
    m.components = Matrix(k, 0);
    return m;
}

PcaModel PcaModel::truncated(std::size_t k) const {
    if (k > n_components()) throw InvalidInput("cannot truncate to more components than the model holds");
    PcaModel m;
    m.mean = mean;
    m.components = components.row_block(0, k);
    m.singular_values.assign(singular_values.begin(), singular_values.begin() + static_cast<std::ptrdiff_t>(k));
    m.n_seen = n_seen;
    return m;
}

PcaModel fit_batch(const Matrix& x, std::size_t k) {
    if (x.rows() < 2) throw InvalidInput("fit_batch needs at least 2 samples");
    if (k > std::min(x.rows(), x.cols())) {
        throw InvalidInput("k = " + std::to_string(k) + " exceeds min(n, D) = " + std::to_string(std::min(x.rows(), x.cols())));
    }
    PcaModel m;
    m.mean = column_means(x);
    PcaOptions exact;
    exact.solver = SvdSolver::exact;
    factorize(centered(x, m.mean), k, exact, 0, m.components, m.singular_values);
    m.n_seen = x.rows();
    return m;
}

PcaModel partial_fit(const PcaModel& model, const Matrix& batch, const PcaOptions& opts) {
    const std::size_t k = model.n_components();
    if (batch.rows() == 0) throw InvalidInput("partial_fit with an empty batch");
    if (!model.fitted()) {
        if (k > batch.cols()) throw InvalidInput("k exceeds the feature dimension");
        PcaModel m;
        m.mean = column_means(batch);
        factorize(centered(batch, m.mean), k, opts, 0, m.components, m.singular_values);
        m.n_seen = batch.rows();
        return m;
    }
    if (batch.cols() != model.dim()) {
        throw InvalidInput("partial_fit batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                           std::to_string(model.dim()));
    }
    const std::size_t dim = model.dim();
    const double n_old = static_cast<double>(model.n_seen);
    const double n_b = static_cast<double>(batch.rows());
    const double n_tot = n_old + n_b;

    const std::vector<double> batch_mean = column_means(batch);
    PcaModel m;
    m.mean.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) m.mean[j] = (n_old * model.mean[j] + n_b * batch_mean[j]) / n_tot;

    Matrix aug(k + batch.rows() + 1, dim);
    for (std::size_t r = 0; r < k; ++r) {
        auto src = model.components.row(r);
        auto dst = aug.row(r);
        for (std::size_t j = 0; j < dim; ++j) dst[j] = model.singular_values[r] * src[j];
    }
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        auto src = batch.row(r);
        auto dst = aug.row(k + r);
        for (std::size_t j = 0; j < dim; ++j) dst[j] = src[j] - batch_mean[j];
    }
    const double scale = std::sqrt(n_old * n_b / n_tot);
    auto corr = aug.row(k + batch.rows());
    for (std::size_t j = 0; j < dim; ++j) corr[j] = scale * (model.mean[j] - batch_mean[j]);

    factorize(aug, k, opts, model.n_seen, m.components, m.singular_values);
    m.n_seen = model.n_seen + batch.rows();
    return m;
}

PcaModel fit_incremental(const Matrix& x, std::size_t k, const PcaOptions& opts) {
    if (opts.batch_size == 0) throw InvalidInput("batch size must be positive");
    PcaModel m = PcaModel::empty(k);
    for (std::size_t first = 0; first < x.rows(); first += opts.batch_size) {
        const std::size_t count = std::min(opts.batch_size, x.rows() - first);
        m = partial_fit(m, x.row_block(first, count), opts);
    }
    return m;
}

Matrix transform(const PcaModel& model, const Matrix& x) {
    check_fitted(model);
    if (x.cols() != model.dim()) throw InvalidInput("transform input has the wrong dimension");
    return matmul_nt(centered(x, model.mean), model.components);
}

Matrix inverse_transform(const PcaModel& model, const Matrix& z) {
    check_fitted(model);
    if (z.cols() != model.n_components()) throw InvalidInput("inverse_transform latent width mismatch");
    Matrix x = matmul(z, model.components);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += model.mean[j];
    }
    return x;
}

double reconstruction_rmse(const PcaModel& model, const Matrix& x) {
    Matrix xr = inverse_transform(model, transform(model, x));
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.values()[i] - xr.values()[i];
        s += d * d;
    }
    return x.size() == 0 ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

std::vector<char> serialize(const PcaModel& model) {
    binio::Writer w;
    w.magic(kMagic);
    w.u64(model.n_components());
    w.u64(model.dim());
    w.u64(model.n_seen);
    w.f64s(model.mean);
    w.f64s(model.singular_values);
    w.f64s(model.components.values());
    return w.bytes();
}

PcaModel deserialize(std::span<const char> bytes) {
    binio::Reader r(bytes, "PCA model");
    r.expect_magic(kMagic);
    const std::uint64_t k = r.u64();
    const std::uint64_t dim = r.u64();
    PcaModel m;
    m.n_seen = r.u64();
    m.mean = r.f64s(dim);
    m.singular_values = r.f64s(k);
    if (dim != 0 && k > r.remaining() / 8 / dim) throw FormatError("PCA model: truncated components");
    m.components = Matrix(k, dim, r.f64s(k * dim));
    r.expect_end();
    return m;
}

void save(const PcaModel& model, const std::string& path) { binio::write_file(path, serialize(model)); }

PcaModel load(const std::string& path) { return deserialize(binio::read_file(path)); }

}  // namespace gridrep::pca
