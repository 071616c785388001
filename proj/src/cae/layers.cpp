#include "gridrep/cae/layers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gridrep/core/matrix.hpp"
#include "gridrep/error.hpp"

namespace gridrep::cae {

Tensor4::Tensor4(std::size_t n_, std::size_t c_, std::size_t h_, std::size_t w_, double fill)
    : n(n_), c(c_), h(h_), w(w_), values(n_ * c_ * h_ * w_, fill) {}

Tensor4::Tensor4(std::size_t n_, std::size_t c_, std::size_t h_, std::size_t w_, std::vector<double> v)
    : n(n_), c(c_), h(h_), w(w_), values(std::move(v)) {
    if (values.size() != n * c * h * w) throw InvalidInput("tensor payload does not match shape " + shape_string());
    for (double x : values)
        if (!std::isfinite(x)) throw InvalidInput("tensor value is not finite");
}

std::string Tensor4::shape_string() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
}

std::string to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv: return "conv";
        case LayerKind::conv_transpose: return "conv_transpose";
        case LayerKind::dense: return "dense";
        case LayerKind::relu: return "relu";
        case LayerKind::sigmoid: return "sigmoid";
        case LayerKind::flatten: return "flatten";
        case LayerKind::reshape: return "reshape";
    }
    return "?";
}

LayerKind parse_layer_kind(const std::string& s) {
    for (auto k : {LayerKind::conv, LayerKind::conv_transpose, LayerKind::dense, LayerKind::relu, LayerKind::sigmoid,
                   LayerKind::flatten, LayerKind::reshape})
        if (to_string(k) == s) return k;
    throw FormatError("unknown layer kind '" + s + "'");
}

LayerSpec LayerSpec::conv(std::size_t out, std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
    LayerSpec s;
    s.kind = LayerKind::conv;
    s.out_ch = out;
    s.in_ch = in;
    s.kh = s.kw = k;
    s.stride = stride;
    s.padding = pad;
    return s;
}

LayerSpec LayerSpec::conv_transpose(std::size_t out, std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
    LayerSpec s = conv(out, in, k, stride, pad);
    s.kind = LayerKind::conv_transpose;
    return s;
}

LayerSpec LayerSpec::dense(std::size_t width, std::size_t in_features) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.width = width;
    s.in_features = in_features;
    return s;
}

LayerSpec LayerSpec::reshape(std::size_t c, std::size_t h, std::size_t w) {
    LayerSpec s;
    s.kind = LayerKind::reshape;
    s.rc = c;
    s.rh = h;
    s.rw = w;
    return s;
}

LayerSpec LayerSpec::simple(LayerKind kind) {
    LayerSpec s;
    s.kind = kind;
    return s;
}

std::size_t LayerSpec::weight_count() const {
    switch (kind) {
        case LayerKind::conv:
        case LayerKind::conv_transpose: return out_ch * in_ch * kh * kw;
        case LayerKind::dense: return width * in_features;
        default: return 0;
    }
}

std::size_t LayerSpec::bias_count() const {
    switch (kind) {
        case LayerKind::conv:
        case LayerKind::conv_transpose: return out_ch;
        case LayerKind::dense: return width;
        default: return 0;
    }
}

void LayerSpec::validate() const {
    if (kind == LayerKind::conv || kind == LayerKind::conv_transpose) {
        if (stride < 1) throw InvalidInput("layer stride must be >= 1");
        if (out_ch < 1 || in_ch < 1 || kh < 1 || kw < 1) throw InvalidInput("kernel dimensions must be >= 1");
    } else if (kind == LayerKind::dense) {
        if (width < 1 || in_features < 1) throw InvalidInput("dense layer needs positive width and inputs");
    } else if (kind == LayerKind::reshape) {
        if (rc < 1 || rh < 1 || rw < 1) throw InvalidInput("reshape target must be positive");
    }
}

void LayerSpec::output_shape(std::size_t c, std::size_t h, std::size_t w, std::size_t& oc, std::size_t& oh,
                             std::size_t& ow) const {
    auto mismatch = [&](const std::string& why) {
        throw InvalidInput(describe() + ": " + why + " for input (" + std::to_string(c) + "," + std::to_string(h) + "," +
                           std::to_string(w) + ")");
    };
    switch (kind) {
        case LayerKind::conv:
            if (c != in_ch) mismatch("channel mismatch");
            if (h + 2 * padding < kh || w + 2 * padding < kw) mismatch("kernel larger than padded input");
            oc = out_ch;
            oh = (h + 2 * padding - kh) / stride + 1;
            ow = (w + 2 * padding - kw) / stride + 1;
            return;
        case LayerKind::conv_transpose:
            if (c != in_ch) mismatch("channel mismatch");
            if (h < 1 || w < 1 || (h - 1) * stride + kh <= 2 * padding || (w - 1) * stride + kw <= 2 * padding)
                mismatch("non-positive output size");
            oc = out_ch;
            oh = (h - 1) * stride + kh - 2 * padding;
            ow = (w - 1) * stride + kw - 2 * padding;
            return;
        case LayerKind::dense:
            if (c * h * w != in_features) mismatch("feature count mismatch");
            oc = width;
            oh = ow = 1;
            return;
        case LayerKind::flatten:
            oc = c * h * w;
            oh = ow = 1;
            return;
        case LayerKind::reshape:
            if (c * h * w != rc * rh * rw) mismatch("reshape size mismatch");
            oc = rc;
            oh = rh;
            ow = rw;
            return;
        case LayerKind::relu:
        case LayerKind::sigmoid:
            oc = c;
            oh = h;
            ow = w;
            return;
    }
}

std::string LayerSpec::describe() const {
    std::ostringstream os;
    os << to_string(kind);
    switch (kind) {
        case LayerKind::conv:
        case LayerKind::conv_transpose:
            os << " out=" << out_ch << " in=" << in_ch << " kh=" << kh << " kw=" << kw << " stride=" << stride
               << " pad=" << padding;
            break;
        case LayerKind::dense: os << " width=" << width << " in=" << in_features; break;
        case LayerKind::reshape: os << " c=" << rc << " h=" << rh << " w=" << rw; break;
        default: break;
    }
    return os.str();
}

namespace {

// Geometry of a correlation between a "wide" image (channels wc, wh×ww) and a
// "narrow" image (nc channels, nh×nw) with weights [nc][wc][kh][kw]. A conv maps
// wide -> narrow; its transpose maps narrow -> wide.
struct Geometry {
    std::size_t wc, wh, ww;
    std::size_t nc, nh, nw;
    std::size_t kh, kw, stride, pad;

    std::size_t col_rows() const { return wc * kh * kw; }
    std::size_t col_cols() const { return nh * nw; }
};

void im2col(const double* img, const Geometry& g, double* col) {
    const std::size_t ncols = g.col_cols();
    for (std::size_t ci = 0; ci < g.wc; ++ci)
        for (std::size_t ky = 0; ky < g.kh; ++ky)
            for (std::size_t kx = 0; kx < g.kw; ++kx) {
                double* dst = col + ((ci * g.kh + ky) * g.kw + kx) * ncols;
                const double* src = img + ci * g.wh * g.ww;
                for (std::size_t oy = 0; oy < g.nh; ++oy) {
                    const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
                    double* drow = dst + oy * g.nw;
                    if (iy < 0 || iy >= static_cast<long>(g.wh)) {
                        std::fill_n(drow, g.nw, 0.0);
                        continue;
                    }
                    const double* srow = src + static_cast<std::size_t>(iy) * g.ww;
                    for (std::size_t ox = 0; ox < g.nw; ++ox) {
                        const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
                        drow[ox] = (ix < 0 || ix >= static_cast<long>(g.ww)) ? 0.0 : srow[ix];
                    }
                }
            }
}

void col2im_add(const double* col, const Geometry& g, double* img) {
    const std::size_t ncols = g.col_cols();
    for (std::size_t ci = 0; ci < g.wc; ++ci)
        for (std::size_t ky = 0; ky < g.kh; ++ky)
            for (std::size_t kx = 0; kx < g.kw; ++kx) {
                const double* src = col + ((ci * g.kh + ky) * g.kw + kx) * ncols;
                double* dst = img + ci * g.wh * g.ww;
                for (std::size_t oy = 0; oy < g.nh; ++oy) {
                    const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
                    if (iy < 0 || iy >= static_cast<long>(g.wh)) continue;
                    double* drow = dst + static_cast<std::size_t>(iy) * g.ww;
                    const double* srow = src + oy * g.nw;
                    for (std::size_t ox = 0; ox < g.nw; ++ox) {
                        const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
                        if (ix >= 0 && ix < static_cast<long>(g.ww)) drow[ix] += srow[ox];
                    }
                }
            }
}

// narrow[nc × nhw] += W[nc × R] · im2col(wide)
void gather(const double* wide, const Geometry& g, const double* weights, double* narrow, std::vector<double>& col) {
    col.resize(g.col_rows() * g.col_cols());
    im2col(wide, g, col.data());
    gemm_nn_acc(g.nc, g.col_cols(), g.col_rows(), weights, col.data(), narrow);
}

// wide += col2im(Wᵀ · narrow)
void scatter(const double* narrow, const Geometry& g, const double* weights, double* wide, std::vector<double>& col) {
    col.assign(g.col_rows() * g.col_cols(), 0.0);
    gemm_tn_acc(g.col_rows(), g.col_cols(), g.nc, weights, narrow, col.data());
    col2im_add(col.data(), g, wide);
}

// dW[nc × R] += narrow · im2col(wide)ᵀ
void weight_grad(const double* wide, const double* narrow, const Geometry& g, double* grad_w, std::vector<double>& col) {
    col.resize(g.col_rows() * g.col_cols());
    im2col(wide, g, col.data());
    gemm_nt_acc(g.nc, g.col_rows(), g.col_cols(), narrow, col.data(), grad_w);
}

void check_params(const LayerSpec& spec, std::span<const double> weights, std::span<const double> bias) {
    spec.validate();
    if (weights.size() != spec.weight_count() || bias.size() != spec.bias_count()) {
        throw InvalidInput(spec.describe() + ": parameter count mismatch");
    }
}

void add_channel_bias(Tensor4& t, std::span<const double> bias) {
    const std::size_t plane = t.h * t.w;
    for (std::size_t i = 0; i < t.n; ++i)
        for (std::size_t ch = 0; ch < t.c; ++ch) {
            double* p = t.values.data() + (i * t.c + ch) * plane;
            for (std::size_t j = 0; j < plane; ++j) p[j] += bias[ch];
        }
}

void accumulate_channel_bias(const Tensor4& grad_out, std::vector<double>& grad_b) {
    const std::size_t plane = grad_out.h * grad_out.w;
    for (std::size_t i = 0; i < grad_out.n; ++i)
        for (std::size_t ch = 0; ch < grad_out.c; ++ch) {
            const double* p = grad_out.values.data() + (i * grad_out.c + ch) * plane;
            double s = 0.0;
            for (std::size_t j = 0; j < plane; ++j) s += p[j];
            grad_b[ch] += s;
        }
}

void check_grads_sized(const LayerSpec& spec, LayerGrads& grads) {
    if (grads.weights.size() != spec.weight_count()) grads.weights.assign(spec.weight_count(), 0.0);
    if (grads.bias.size() != spec.bias_count()) grads.bias.assign(spec.bias_count(), 0.0);
}

Geometry conv_geometry(const LayerSpec& spec, const Tensor4& wide, std::size_t nh, std::size_t nw) {
    return {spec.in_ch, wide.h, wide.w, spec.out_ch, nh, nw, spec.kh, spec.kw, spec.stride, spec.padding};
}

Geometry transpose_geometry(const LayerSpec& spec, std::size_t wh, std::size_t ww, const Tensor4& narrow) {
    return {spec.out_ch, wh, ww, spec.in_ch, narrow.h, narrow.w, spec.kh, spec.kw, spec.stride, spec.padding};
}

}  // namespace

Tensor4 conv2d(const Tensor4& x, const LayerSpec& spec, std::span<const double> weights, std::span<const double> bias) {
    if (spec.kind != LayerKind::conv) throw InvalidInput("conv2d called with " + spec.describe());
    check_params(spec, weights, bias);
    std::size_t oc, oh, ow;
    spec.output_shape(x.c, x.h, x.w, oc, oh, ow);
    Tensor4 out(x.n, oc, oh, ow);
    const Geometry g = conv_geometry(spec, x, oh, ow);
    std::vector<double> col;
    for (std::size_t i = 0; i < x.n; ++i) gather(x.sample(i).data(), g, weights.data(), out.sample(i).data(), col);
    add_channel_bias(out, bias);
    return out;
}

void conv2d_backward(const Tensor4& x, const Tensor4& grad_out, const LayerSpec& spec, std::span<const double> weights,
                     LayerGrads& grads) {
    check_params(spec, weights, std::vector<double>(spec.bias_count()));
    check_grads_sized(spec, grads);
    const Geometry g = conv_geometry(spec, x, grad_out.h, grad_out.w);
    grads.input = Tensor4(x.n, x.c, x.h, x.w);
    std::vector<double> col;
    for (std::size_t i = 0; i < x.n; ++i) {
        weight_grad(x.sample(i).data(), grad_out.sample(i).data(), g, grads.weights.data(), col);
        scatter(grad_out.sample(i).data(), g, weights.data(), grads.input.sample(i).data(), col);
    }
    accumulate_channel_bias(grad_out, grads.bias);
}

Tensor4 conv_transpose2d(const Tensor4& x, const LayerSpec& spec, std::span<const double> weights,
                         std::span<const double> bias) {
    if (spec.kind != LayerKind::conv_transpose) throw InvalidInput("conv_transpose2d called with " + spec.describe());
    check_params(spec, weights, bias);
    std::size_t oc, oh, ow;
    spec.output_shape(x.c, x.h, x.w, oc, oh, ow);
    Tensor4 out(x.n, oc, oh, ow);
    const Geometry g = transpose_geometry(spec, oh, ow, x);
    std::vector<double> col;
    for (std::size_t i = 0; i < x.n; ++i) scatter(x.sample(i).data(), g, weights.data(), out.sample(i).data(), col);
    add_channel_bias(out, bias);
    return out;
}

void conv_transpose2d_backward(const Tensor4& x, const Tensor4& grad_out, const LayerSpec& spec,
                               std::span<const double> weights, LayerGrads& grads) {
    check_params(spec, weights, std::vector<double>(spec.bias_count()));
    check_grads_sized(spec, grads);
    const Geometry g = transpose_geometry(spec, grad_out.h, grad_out.w, x);
    grads.input = Tensor4(x.n, x.c, x.h, x.w);
    std::vector<double> col;
    for (std::size_t i = 0; i < x.n; ++i) {
        weight_grad(grad_out.sample(i).data(), x.sample(i).data(), g, grads.weights.data(), col);
        gather(grad_out.sample(i).data(), g, weights.data(), grads.input.sample(i).data(), col);
    }
    accumulate_channel_bias(grad_out, grads.bias);
}

Tensor4 dense(const Tensor4& x, const LayerSpec& spec, std::span<const double> weights, std::span<const double> bias) {
    if (spec.kind != LayerKind::dense) throw InvalidInput("dense called with " + spec.describe());
    check_params(spec, weights, bias);
    std::size_t oc, oh, ow;
    spec.output_shape(x.c, x.h, x.w, oc, oh, ow);
    Tensor4 out(x.n, spec.width, 1, 1);
    gemm_nt_acc(x.n, spec.width, spec.in_features, x.values.data(), weights.data(), out.values.data());
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < spec.width; ++j) out.values[i * spec.width + j] += bias[j];
    return out;
}

void dense_backward(const Tensor4& x, const Tensor4& grad_out, const LayerSpec& spec, std::span<const double> weights,
                    LayerGrads& grads) {
    check_params(spec, weights, std::vector<double>(spec.bias_count()));
    check_grads_sized(spec, grads);
    gemm_tn_acc(spec.width, spec.in_features, x.n, grad_out.values.data(), x.values.data(), grads.weights.data());
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < spec.width; ++j) grads.bias[j] += grad_out.values[i * spec.width + j];
    grads.input = Tensor4(x.n, x.c, x.h, x.w);
    gemm_nn_acc(x.n, spec.in_features, spec.width, grad_out.values.data(), weights.data(), grads.input.values.data());
}

Tensor4 relu(const Tensor4& x) {
    Tensor4 out = x;
    for (double& v : out.values) v = v > 0.0 ? v : 0.0;
    return out;
}

Tensor4 sigmoid(const Tensor4& x) {
    Tensor4 out = x;
    for (double& v : out.values) v = 1.0 / (1.0 + std::exp(-v));
    return out;
}

Loss rmse_loss(const Tensor4& xhat, const Tensor4& x) {
    if (!xhat.same_shape(x)) throw InvalidInput("rmse_loss shape mismatch " + xhat.shape_string() + " vs " + x.shape_string());
    const std::size_t count = x.values.size();
    double ss = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double d = xhat.values[i] - x.values[i];
        ss += d * d;
    }
    Loss loss;
    loss.value = count == 0 ? 0.0 : std::sqrt(ss / static_cast<double>(count));
    loss.grad = Tensor4(x.n, x.c, x.h, x.w);
    if (loss.value > 0.0) {
        const double scale = 1.0 / (static_cast<double>(count) * loss.value);
        for (std::size_t i = 0; i < count; ++i) loss.grad.values[i] = (xhat.values[i] - x.values[i]) * scale;
    }
    return loss;
}

}  // namespace gridrep::cae
