#include "gridrep/core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gridrep/error.hpp"

namespace gridrep {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double norm2(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// Two classical Gram-Schmidt passes of v against the given basis.
void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis, std::size_t count) {
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> coeff(count);
        for (std::size_t i = 0; i < count; ++i) coeff[i] = dot(basis[i], v);
        for (std::size_t i = 0; i < count; ++i) axpy(-coeff[i], basis[i], v);
    }
}

// Next canonical vector (scanning from *cursor) that is not numerically in the
// span of the basis, orthogonalized and normalized.
std::vector<double> canonical_completion(const std::vector<std::vector<double>>& basis, std::size_t count,
                                         std::size_t dim, std::size_t& cursor) {
    for (; cursor < dim; ++cursor) {
        std::vector<double> e(dim, 0.0);
        e[cursor] = 1.0;
        orthogonalize(e, basis, count);
        const double nrm = norm2(e);
        if (nrm > 1e-3) {
            ++cursor;
            for (double& x : e) x /= nrm;
            return e;
        }
    }
    throw NumericalError("canonical completion exhausted the basis");
}

std::vector<std::vector<double>> columns_of(const Matrix& a) {
    std::vector<std::vector<double>> cols(a.cols(), std::vector<double>(a.rows()));
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto row = a.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) cols[c][r] = row[c];
    }
    return cols;
}

Matrix from_columns(const std::vector<std::vector<double>>& cols, std::size_t rows) {
    Matrix m(rows, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t r = 0; r < rows; ++r) m(r, c) = cols[c][r];
    return m;
}

// One-sided Jacobi on the columns of w; v accumulates the rotations.
// Columns with norm at or below `negligible` are left alone: rotating a
// roundoff-level column against a large one re-pollutes it every time and
// the sweep never settles. They end up as zero singular values.
void hestenes_jacobi(std::vector<std::vector<double>>& w, std::vector<std::vector<double>>& v, double negligible) {
    const std::size_t n = w.size();
    if (n < 2) return;
    const double tol = kEps * std::sqrt(static_cast<double>(w[0].size()));
    const double floor2 = negligible * negligible;
    for (int sweep = 0; sweep < 100; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double alpha = dot(w[i], w[i]);
                const double beta = dot(w[j], w[j]);
                const double gamma = dot(w[i], w[j]);
                if (alpha <= floor2 || beta <= floor2) continue;
                if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                auto rotate = [c, s](std::vector<double>& x, std::vector<double>& y) {
                    for (std::size_t r = 0; r < x.size(); ++r) {
                        const double xr = x[r];
                        const double yr = y[r];
                        x[r] = c * xr - s * yr;
                        y[r] = s * xr + c * yr;
                    }
                };
                rotate(w[i], w[j]);
                rotate(v[i], v[j]);
            }
        }
        if (!rotated) return;
    }
    throw NumericalError("Jacobi SVD did not converge in 100 sweeps");
}

SvdResult svd_tall(const Matrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    QrResult qr = householder_qr(a);

    auto w = columns_of(qr.r);
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    double fro2 = 0.0;
    for (const auto& col : w) fro2 += dot(col, col);
    const double cutoff = std::sqrt(fro2) * kEps * static_cast<double>(std::max(m, n));
    hestenes_jacobi(w, v, cutoff);

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(w[j]);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    const double smax = sigma[order[0]];

    SvdResult out;
    out.singular_values.resize(n);
    std::vector<std::vector<double>> ur(n);
    std::size_t good = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        if (smax > 0.0 && sigma[j] > cutoff) {
            out.singular_values[k] = sigma[j];
            ur[k] = w[j];
            for (double& x : ur[k]) x /= sigma[j];
            ++good;
        } else {
            out.singular_values[k] = 0.0;
        }
    }
    std::size_t cursor = 0;
    for (std::size_t k = good; k < n; ++k) ur[k] = canonical_completion(ur, k, n, cursor);

    out.u = matmul(qr.q, from_columns(ur, n));
    out.vt = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& vk = v[order[k]];
        for (std::size_t c = 0; c < n; ++c) out.vt(k, c) = vk[c];
    }
    return out;
}

}  // namespace

QrResult householder_qr(const Matrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (m < n) throw InvalidInput("householder_qr needs rows >= cols");
    auto cols = columns_of(a);
    std::vector<std::vector<double>> reflectors(n);
    std::vector<double> betas(n, 0.0);
    Matrix r(n, n);

    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double>& x = cols[k];
        double sigma = 0.0;
        for (std::size_t i = k; i < m; ++i) sigma += x[i] * x[i];
        const double norm_x = std::sqrt(sigma);
        std::vector<double> vk(m, 0.0);
        double beta = 0.0;
        if (norm_x > 0.0) {
            const double alpha = x[k] >= 0.0 ? -norm_x : norm_x;
            for (std::size_t i = k; i < m; ++i) vk[i] = x[i];
            vk[k] -= alpha;
            double vnorm2 = 0.0;
            for (std::size_t i = k; i < m; ++i) vnorm2 += vk[i] * vk[i];
            beta = vnorm2 > 0.0 ? 2.0 / vnorm2 : 0.0;
        }
        reflectors[k] = std::move(vk);
        betas[k] = beta;
        // Apply H_k to the remaining columns (including column k itself).
        for (std::size_t j = k; j < n; ++j) {
            if (beta == 0.0) break;
            double s = 0.0;
            for (std::size_t i = k; i < m; ++i) s += reflectors[k][i] * cols[j][i];
            s *= beta;
            for (std::size_t i = k; i < m; ++i) cols[j][i] -= s * reflectors[k][i];
        }
        for (std::size_t i = 0; i <= k; ++i) r(i, k) = cols[k][i];
    }

    // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of the identity.
    std::vector<std::vector<double>> q(n, std::vector<double>(m, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        q[j][j] = 1.0;
        for (std::size_t kk = n; kk-- > 0;) {
            if (betas[kk] == 0.0) continue;
            const auto& vk = reflectors[kk];
            double s = 0.0;
            for (std::size_t i = kk; i < m; ++i) s += vk[i] * q[j][i];
            s *= betas[kk];
            for (std::size_t i = kk; i < m; ++i) q[j][i] -= s * vk[i];
        }
    }
    return {from_columns(q, m), std::move(r)};
}

SvdResult exact_svd(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) throw InvalidInput("exact_svd of an empty matrix");
    if (a.rows() >= a.cols()) return svd_tall(a);
    SvdResult t = svd_tall(transpose(a));
    return {transpose(t.vt), std::move(t.singular_values), transpose(t.u)};
}

Matrix qr_orthonormalize(const Matrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (m < n) throw InvalidInput("qr_orthonormalize needs rows >= cols, got " + std::to_string(m) + "x" + std::to_string(n));
    auto cols = columns_of(a);
    std::vector<std::vector<double>> q(n);
    std::size_t cursor = 0;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> v = std::move(cols[j]);
        const double norm0 = norm2(v);
        orthogonalize(v, q, j);
        const double nrm = norm2(v);
        if (norm0 > 0.0 && nrm > 1e-12 * norm0) {
            for (double& x : v) x /= nrm;
            q[j] = std::move(v);
        } else {
            q[j] = canonical_completion(q, j, m, cursor);
        }
    }
    return from_columns(q, m);
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, SeededRng& rng) {
    Matrix g(rows, cols);
    for (double& x : g.values()) x = rng.normal();
    return g;
}

SvdResult randomized_svd(const Matrix& a, std::size_t k, std::size_t oversample, std::size_t power_iters,
                         SeededRng& rng) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    const std::size_t kmax = std::min(m, n);
    if (k > kmax) {
        throw InvalidInput("randomized_svd rank " + std::to_string(k) + " exceeds min(rows, cols) = " +
                           std::to_string(kmax));
    }
    if (k == 0) return {Matrix(m, 0), {}, Matrix(0, n)};

    const std::size_t l = std::min(k + oversample, kmax);
    Matrix q = qr_orthonormalize(matmul(a, gaussian_matrix(n, l, rng)));
    for (std::size_t it = 0; it < power_iters; ++it) {
        Matrix z = qr_orthonormalize(matmul_tn(a, q));
        q = qr_orthonormalize(matmul(a, z));
    }
    SvdResult small = exact_svd(matmul_tn(q, a));

    SvdResult out;
    out.u = matmul(q, small.u).col_block(0, k);
    out.singular_values.assign(small.singular_values.begin(), small.singular_values.begin() + static_cast<std::ptrdiff_t>(k));
    out.vt = small.vt.row_block(0, k);
    return out;
}

namespace {

bool cholesky_factor(const Matrix& a, Matrix& l) {
    const std::size_t n = a.rows();
    l = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t p = 0; p < j; ++p) d -= l(j, p) * l(j, p);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t p = 0; p < j; ++p) s -= l(i, p) * l(j, p);
            l(i, j) = s / ljj;
        }
    }
    return true;
}

void cholesky_substitute(const Matrix& l, std::vector<double>& x) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t p = 0; p < i; ++p) s -= l(i, p) * x[p];
        x[i] = s / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t p = i + 1; p < n; ++p) s -= l(p, i) * x[p];
        x[i] = s / l(i, i);
    }
}

}  // namespace

bool cholesky_solve(const Matrix& a, std::vector<double> b, std::vector<double>& x) {
    if (a.rows() != a.cols() || b.size() != a.rows()) throw InvalidInput("cholesky_solve shape mismatch");
    Matrix l;
    if (!cholesky_factor(a, l)) return false;
    cholesky_substitute(l, b);
    x = std::move(b);
    return true;
}

bool cholesky_inverse(const Matrix& a, Matrix& inv) {
    if (a.rows() != a.cols()) throw InvalidInput("cholesky_inverse needs a square matrix");
    const std::size_t n = a.rows();
    Matrix l;
    if (!cholesky_factor(a, l)) return false;
    inv = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        cholesky_substitute(l, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = e[i];
    }
    return true;
}

}  // namespace gridrep
