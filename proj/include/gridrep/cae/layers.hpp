#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gridrep::cae {

/// Batch of images, (batch, channels, height, width), row-major.
struct Tensor4 {
    std::size_t n = 0, c = 0, h = 0, w = 0;
    std::vector<double> values;

    Tensor4() = default;
    Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill = 0.0);
    Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, std::vector<double> v);

    std::size_t sample_size() const { return c * h * w; }
    std::span<double> sample(std::size_t i) { return {values.data() + i * sample_size(), sample_size()}; }
    std::span<const double> sample(std::size_t i) const { return {values.data() + i * sample_size(), sample_size()}; }
    bool same_shape(const Tensor4& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
    std::string shape_string() const;

    friend bool operator==(const Tensor4&, const Tensor4&) = default;
};

enum class LayerKind { conv, conv_transpose, dense, relu, sigmoid, flatten, reshape };

std::string to_string(LayerKind kind);
LayerKind parse_layer_kind(const std::string& s);

/// Layer descriptor. For conv kinds `out_ch`/`in_ch` are the channels this
/// layer produces/consumes. Conv weights are stored [out][in][kh][kw];
/// transposed-conv weights are stored [in][out][kh][kw], the same memory as
/// the conv it inverts, so the two are exact adjoints.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t out_ch = 0, in_ch = 0, kh = 0, kw = 0;
    std::size_t stride = 1, padding = 0;
    std::size_t width = 0, in_features = 0;  // dense
    std::size_t rc = 0, rh = 0, rw = 0;      // reshape target

    static LayerSpec conv(std::size_t out, std::size_t in, std::size_t k, std::size_t stride, std::size_t pad);
    static LayerSpec conv_transpose(std::size_t out, std::size_t in, std::size_t k, std::size_t stride, std::size_t pad);
    static LayerSpec dense(std::size_t width, std::size_t in_features);
    static LayerSpec reshape(std::size_t c, std::size_t h, std::size_t w);
    static LayerSpec simple(LayerKind kind);

    std::size_t weight_count() const;
    std::size_t bias_count() const;
    /// Output shape for an input of the given shape; throws on mismatch.
    void output_shape(std::size_t c, std::size_t h, std::size_t w, std::size_t& oc, std::size_t& oh, std::size_t& ow) const;
    void validate() const;
    std::string describe() const;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct LayerGrads {
    Tensor4 input;
    std::vector<double> weights;
    std::vector<double> bias;
};

Tensor4 conv2d(const Tensor4& x, const LayerSpec& spec, std::span<const double> weights, std::span<const double> bias);
Tensor4 conv_transpose2d(const Tensor4& x, const LayerSpec& spec, std::span<const double> weights,
                         std::span<const double> bias);
Tensor4 dense(const Tensor4& x, const LayerSpec& spec, std::span<const double> weights, std::span<const double> bias);

/// Reverse passes. Parameter gradients are accumulated into `grads` (which
/// must be sized to the layer), the input gradient is returned in grads.input.
void conv2d_backward(const Tensor4& x, const Tensor4& grad_out, const LayerSpec& spec, std::span<const double> weights,
                     LayerGrads& grads);
void conv_transpose2d_backward(const Tensor4& x, const Tensor4& grad_out, const LayerSpec& spec,
                               std::span<const double> weights, LayerGrads& grads);
void dense_backward(const Tensor4& x, const Tensor4& grad_out, const LayerSpec& spec, std::span<const double> weights,
                    LayerGrads& grads);

Tensor4 relu(const Tensor4& x);
Tensor4 sigmoid(const Tensor4& x);

struct Loss {
    double value = 0.0;
    Tensor4 grad;  // d value / d xhat
};

/// Root-mean-squared error and its gradient (defined as 0 at zero loss).
Loss rmse_loss(const Tensor4& xhat, const Tensor4& x);

}  // namespace gridrep::cae
