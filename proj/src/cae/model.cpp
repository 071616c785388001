#include "gridrep/cae/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "gridrep/core/binary_io.hpp"
#include "gridrep/error.hpp"

namespace gridrep::cae {

namespace {

constexpr std::string_view kMagic = "GRCAE1";
constexpr std::size_t kBottom = 8;

Tensor4 apply(const Layer& layer, const Tensor4& x) {
    const LayerSpec& s = layer.spec;
    switch (s.kind) {
        case LayerKind::conv: return conv2d(x, s, layer.weights, layer.bias);
        case LayerKind::conv_transpose: return conv_transpose2d(x, s, layer.weights, layer.bias);
        case LayerKind::dense: return dense(x, s, layer.weights, layer.bias);
        case LayerKind::relu: return relu(x);
        case LayerKind::sigmoid: return sigmoid(x);
        case LayerKind::flatten:
        case LayerKind::reshape: {
            std::size_t oc, oh, ow;
            s.output_shape(x.c, x.h, x.w, oc, oh, ow);
            Tensor4 out = x;
            out.c = oc;
            out.h = oh;
            out.w = ow;
            return out;
        }
    }
    throw InvalidInput("unknown layer");
}

// Activations of every layer boundary: acts[0] is the input.
std::vector<Tensor4> forward_trace(const CaeModel& model, const Tensor4& x) {
    std::vector<Tensor4> acts;
    acts.reserve(model.encoder.size() + model.decoder.size() + 1);
    acts.push_back(x);
    for (const auto& l : model.encoder) acts.push_back(apply(l, acts.back()));
    for (const auto& l : model.decoder) acts.push_back(apply(l, acts.back()));
    return acts;
}

Tensor4 run(const std::vector<Layer>& layers, Tensor4 x) {
    for (const auto& l : layers) x = apply(l, x);
    return x;
}

Tensor4 backward_layer(const Layer& layer, const Tensor4& in, const Tensor4& out, const Tensor4& grad_out,
                       LayerGrads& grads) {
    const LayerSpec& s = layer.spec;
    switch (s.kind) {
        case LayerKind::conv: conv2d_backward(in, grad_out, s, layer.weights, grads); return std::move(grads.input);
        case LayerKind::conv_transpose:
            conv_transpose2d_backward(in, grad_out, s, layer.weights, grads);
            return std::move(grads.input);
        case LayerKind::dense: dense_backward(in, grad_out, s, layer.weights, grads); return std::move(grads.input);
        case LayerKind::relu: {
            Tensor4 g = grad_out;
            for (std::size_t i = 0; i < g.values.size(); ++i)
                if (!(in.values[i] > 0.0)) g.values[i] = 0.0;
            g.c = in.c;
            g.h = in.h;
            g.w = in.w;
            return g;
        }
        case LayerKind::sigmoid: {
            Tensor4 g = grad_out;
            for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] *= out.values[i] * (1.0 - out.values[i]);
            return g;
        }
        case LayerKind::flatten:
        case LayerKind::reshape: {
            Tensor4 g = grad_out;
            g.c = in.c;
            g.h = in.h;
            g.w = in.w;
            return g;
        }
    }
    throw InvalidInput("unknown layer");
}

std::vector<const Layer*> all_layers(const CaeModel& m) {
    std::vector<const Layer*> out;
    for (const auto& l : m.encoder) out.push_back(&l);
    for (const auto& l : m.decoder) out.push_back(&l);
    return out;
}

void check_input(const CaeModel& model, const Tensor4& x) {
    if (x.c != 1 || x.h != model.resolution || x.w != model.resolution) {
        throw InvalidInput("CAE expects input (n,1," + std::to_string(model.resolution) + "," +
                           std::to_string(model.resolution) + "), got " + x.shape_string());
    }
}

void init_layer(Layer& l, SeededRng* rng) {
    l.weights.assign(l.spec.weight_count(), 0.0);
    l.bias.assign(l.spec.bias_count(), 0.0);
    if (rng == nullptr || l.weights.empty()) return;
    std::size_t fan_in = 0;
    switch (l.spec.kind) {
        case LayerKind::conv:
        case LayerKind::conv_transpose: fan_in = l.spec.in_ch * l.spec.kh * l.spec.kw; break;
        case LayerKind::dense: fan_in = l.spec.in_features; break;
        default: break;
    }
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& w : l.weights) w = rng->uniform(-a, a);
}

CaeModel build(const Architecture& arch, SeededRng* rng) {
    if (arch.latent_dim < 1) throw InvalidInput("latent dimension must be >= 1");
    if (arch.kernel < 2 || arch.kernel % 2 != 0) throw InvalidInput("kernel size must be even so stride-2 blocks invert exactly");
    std::size_t spatial = arch.resolution;
    for (std::size_t b = 0; b < arch.channels.size(); ++b) {
        if (spatial % 2 != 0 || spatial < 2) throw InvalidInput("resolution does not halve cleanly through the conv blocks");
        spatial /= 2;
    }
    const std::size_t pad = (arch.kernel - 2) / 2;
    CaeModel m;
    m.resolution = arch.resolution;
    m.latent_dim = arch.latent_dim;

    std::size_t prev = 1;
    for (std::size_t ch : arch.channels) {
        m.encoder.push_back({LayerSpec::conv(ch, prev, arch.kernel, 2, pad), {}, {}});
        m.encoder.push_back({LayerSpec::simple(LayerKind::relu), {}, {}});
        prev = ch;
    }
    const std::size_t flat = prev * spatial * spatial;
    m.encoder.push_back({LayerSpec::simple(LayerKind::flatten), {}, {}});
    m.encoder.push_back({LayerSpec::dense(arch.latent_dim, flat), {}, {}});

    m.decoder.push_back({LayerSpec::dense(flat, arch.latent_dim), {}, {}});
    m.decoder.push_back({LayerSpec::simple(LayerKind::relu), {}, {}});
    m.decoder.push_back({LayerSpec::reshape(prev, spatial, spatial), {}, {}});
    for (std::size_t b = arch.channels.size(); b-- > 0;) {
        const std::size_t out = b == 0 ? 1 : arch.channels[b - 1];
        m.decoder.push_back({LayerSpec::conv_transpose(out, arch.channels[b], arch.kernel, 2, pad), {}, {}});
        if (b != 0) m.decoder.push_back({LayerSpec::simple(LayerKind::relu), {}, {}});
    }
    if (arch.channels.empty()) {
        // No conv blocks: the decoder dense layer already produces the image.
        m.decoder.pop_back();
        m.decoder.pop_back();
        m.decoder.push_back({LayerSpec::reshape(1, spatial, spatial), {}, {}});
    }
    m.decoder.push_back({LayerSpec::simple(LayerKind::sigmoid), {}, {}});

    for (auto& l : m.encoder) init_layer(l, rng);
    for (auto& l : m.decoder) init_layer(l, rng);
    return m;
}

}  // namespace

std::size_t CaeModel::parameter_count() const {
    std::size_t n = 0;
    for (const Layer* l : all_layers(*this)) n += l->weights.size() + l->bias.size();
    return n;
}

std::vector<double> CaeModel::flat_parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const Layer* l : all_layers(*this)) {
        flat.insert(flat.end(), l->weights.begin(), l->weights.end());
        flat.insert(flat.end(), l->bias.begin(), l->bias.end());
    }
    return flat;
}

void CaeModel::set_flat_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw InvalidInput("parameter vector has the wrong length");
    std::size_t at = 0;
    auto fill = [&](std::vector<Layer>& layers) {
        for (auto& l : layers) {
            std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), l.weights.size(), l.weights.begin());
            at += l.weights.size();
            std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), l.bias.size(), l.bias.begin());
            at += l.bias.size();
        }
    };
    fill(encoder);
    fill(decoder);
}

Architecture default_architecture(std::size_t resolution, std::size_t latent_dim, std::size_t base_channels) {
    if (resolution < kBottom || resolution % kBottom != 0) {
        throw InvalidInput("resolution must be a multiple of 8, got " + std::to_string(resolution));
    }
    Architecture a;
    a.resolution = resolution;
    a.latent_dim = latent_dim;
    std::size_t ch = base_channels;
    for (std::size_t s = resolution; s > kBottom; s /= 2) {
        a.channels.push_back(ch);
        ch *= 2;
    }
    if (resolution >> a.channels.size() != kBottom) throw InvalidInput("resolution must be 8 times a power of two");
    return a;
}

CaeModel build_model(const Architecture& arch, SeededRng& rng) { return build(arch, &rng); }

CaeModel build_zero_model(const Architecture& arch) { return build(arch, nullptr); }

Matrix encode(const CaeModel& model, const Tensor4& x) {
    check_input(model, x);
    Tensor4 z = run(model.encoder, x);
    return Matrix(z.n, z.sample_size(), std::move(z.values));
}

Tensor4 decode(const CaeModel& model, const Matrix& z) {
    if (z.cols() != model.latent_dim) {
        throw InvalidInput("latent width " + std::to_string(z.cols()) + " does not match model latent " +
                           std::to_string(model.latent_dim));
    }
    Tensor4 t(z.rows(), z.cols(), 1, 1, std::vector<double>(z.values().begin(), z.values().end()));
    return run(model.decoder, std::move(t));
}

Tensor4 reconstruct(const CaeModel& model, const Tensor4& x) {
    check_input(model, x);
    return run(model.decoder, run(model.encoder, x));
}

LossAndGradient loss_and_gradient(const CaeModel& model, const Tensor4& x) {
    check_input(model, x);
    auto acts = forward_trace(model, x);
    Loss loss = rmse_loss(acts.back(), x);

    auto layers = all_layers(model);
    std::vector<LayerGrads> grads(layers.size());
    Tensor4 g = std::move(loss.grad);
    for (std::size_t i = layers.size(); i-- > 0;) g = backward_layer(*layers[i], acts[i], acts[i + 1], g, grads[i]);

    LossAndGradient out;
    out.loss = loss.value;
    out.gradient.reserve(model.parameter_count());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        grads[i].weights.resize(layers[i]->weights.size(), 0.0);
        grads[i].bias.resize(layers[i]->bias.size(), 0.0);
        out.gradient.insert(out.gradient.end(), grads[i].weights.begin(), grads[i].weights.end());
        out.gradient.insert(out.gradient.end(), grads[i].bias.begin(), grads[i].bias.end());
    }
    return out;
}

TrainResult train(const Tensor4& frames, CaeModel init, const TrainConfig& cfg) {
    if (frames.n == 0) throw InvalidInput("training set is empty");
    if (!(cfg.learning_rate > 0.0)) throw InvalidInput("learning rate must be > 0");
    if (cfg.batch_size < 1) throw InvalidInput("batch size must be >= 1");
    check_input(init, frames);
    for (std::size_t i = 0; i < frames.values.size(); ++i) {
        const double v = frames.values[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw RangeError("training frame " + std::to_string(i / frames.sample_size()) + " has value " +
                             std::to_string(v) + " outside [0, 1]");
        }
    }

    TrainResult result;
    result.model = std::move(init);
    std::vector<double> params = result.model.flat_parameters();
    std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
    std::uint64_t step = 0;

    SeededRng rng(cfg.seed);
    std::vector<std::size_t> order(frames.n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t sample = frames.sample_size();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double weighted = 0.0;
        for (std::size_t first = 0; first < frames.n; first += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, frames.n - first);
            Tensor4 batch(count, 1, frames.h, frames.w);
            for (std::size_t b = 0; b < count; ++b) {
                auto src = frames.sample(order[first + b]);
                std::copy(src.begin(), src.end(), batch.values.begin() + static_cast<std::ptrdiff_t>(b * sample));
            }
            LossAndGradient lg = loss_and_gradient(result.model, batch);
            if (!std::isfinite(lg.loss)) throw TrainingDiverged(epoch + 1, "loss is not finite");
            weighted += lg.loss * static_cast<double>(count);

            ++step;
            if (cfg.optimizer == OptimizerKind::sgd) {
                for (std::size_t p = 0; p < params.size(); ++p) params[p] -= cfg.learning_rate * lg.gradient[p];
            } else {
                const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
                for (std::size_t p = 0; p < params.size(); ++p) {
                    const double g = lg.gradient[p];
                    m1[p] = cfg.beta1 * m1[p] + (1.0 - cfg.beta1) * g;
                    m2[p] = cfg.beta2 * m2[p] + (1.0 - cfg.beta2) * g * g;
                    params[p] -= cfg.learning_rate * (m1[p] / c1) / (std::sqrt(m2[p] / c2) + cfg.epsilon);
                }
            }
            for (double p : params)
                if (!std::isfinite(p)) throw TrainingDiverged(epoch + 1, "parameters are not finite");
            result.model.set_flat_parameters(params);
        }
        result.loss_history.push_back(weighted / static_cast<double>(frames.n));
    }
    return result;
}

GradCheckReport grad_check(const CaeModel& model, const Tensor4& x, double tolerance) {
    constexpr double kStep = 1e-6;
    constexpr double kFloor = 1e-6;
    GradCheckReport report;
    const auto analytic = loss_and_gradient(model, x).gradient;
    std::vector<double> params = model.flat_parameters();
    report.parameter_count = params.size();
    CaeModel probe = model;
    auto loss_at = [&](std::size_t i, double value) {
        const double saved = params[i];
        params[i] = value;
        probe.set_flat_parameters(params);
        params[i] = saved;
        return rmse_loss(reconstruct(probe, x), x).value;
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double numeric = (loss_at(i, params[i] + kStep) - loss_at(i, params[i] - kStep)) / (2.0 * kStep);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), kFloor});
        const double rel = std::abs(analytic[i] - numeric) / denom;
        if (rel > report.max_relative_error) {
            report.max_relative_error = rel;
            report.worst_parameter = i;
        }
        ++report.parameters_checked;
    }
    report.passed = report.max_relative_error < tolerance && report.parameters_checked == report.parameter_count;
    return report;
}

std::string architecture_text(const CaeModel& model) {
    std::ostringstream os;
    os << "gridrep-cae/1\n";
    os << "resolution " << model.resolution << "\n";
    os << "latent " << model.latent_dim << "\n";
    os << "encoder " << model.encoder.size() << "\n";
    for (const auto& l : model.encoder) os << l.spec.describe() << "\n";
    os << "decoder " << model.decoder.size() << "\n";
    for (const auto& l : model.decoder) os << l.spec.describe() << "\n";
    return os.str();
}

namespace {

LayerSpec parse_spec_line(const std::string& line) {
    std::istringstream is(line);
    std::string kind;
    is >> kind;
    LayerSpec s;
    s.kind = parse_layer_kind(kind);
    std::map<std::string, std::size_t> kv;
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw FormatError("bad layer attribute '" + tok + "'");
        try {
            kv[tok.substr(0, eq)] = std::stoull(tok.substr(eq + 1));
        } catch (const std::exception&) {
            throw FormatError("bad layer attribute '" + tok + "'");
        }
    }
    auto get = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError("layer '" + line + "' is missing " + key);
        return it->second;
    };
    switch (s.kind) {
        case LayerKind::conv:
        case LayerKind::conv_transpose:
            s.out_ch = get("out");
            s.in_ch = get("in");
            s.kh = get("kh");
            s.kw = get("kw");
            s.stride = get("stride");
            s.padding = get("pad");
            break;
        case LayerKind::dense:
            s.width = get("width");
            s.in_features = get("in");
            break;
        case LayerKind::reshape:
            s.rc = get("c");
            s.rh = get("h");
            s.rw = get("w");
            break;
        default: break;
    }
    try {
        s.validate();
    } catch (const InvalidInput& e) {
        throw FormatError(std::string("invalid layer: ") + e.what());
    }
    return s;
}

CaeModel parse_architecture(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    auto next = [&]() {
        if (!std::getline(is, line)) throw FormatError("CAE architecture text is truncated");
        return line;
    };
    if (next() != "gridrep-cae/1") throw FormatError("unsupported CAE architecture version '" + line + "'");
    auto keyed = [&](const std::string& key) {
        std::istringstream ls(next());
        std::string k;
        std::size_t v = 0;
        if (!(ls >> k >> v) || k != key) throw FormatError("expected '" + key + "' in CAE architecture");
        return v;
    };
    CaeModel m;
    m.resolution = keyed("resolution");
    m.latent_dim = keyed("latent");
    const std::size_t ne = keyed("encoder");
    for (std::size_t i = 0; i < ne; ++i) m.encoder.push_back({parse_spec_line(next()), {}, {}});
    const std::size_t nd = keyed("decoder");
    for (std::size_t i = 0; i < nd; ++i) m.decoder.push_back({parse_spec_line(next()), {}, {}});
    return m;
}

}  // namespace

std::vector<char> serialize(const CaeModel& model) {
    binio::Writer w;
    w.magic(kMagic);
    w.text(architecture_text(model));
    w.f64s(model.flat_parameters());
    return w.bytes();
}

CaeModel deserialize(std::span<const char> bytes) {
    binio::Reader r(bytes, "CAE model");
    r.expect_magic(kMagic);
    CaeModel m = parse_architecture(r.text());
    for (auto* layers : {&m.encoder, &m.decoder})
        for (auto& l : *layers) {
            l.weights = r.f64s(l.spec.weight_count());
            l.bias = r.f64s(l.spec.bias_count());
        }
    r.expect_end();
    // Shape-check the stack once so a corrupt descriptor fails at load time.
    std::size_t c = 1, h = m.resolution, w = m.resolution;
    for (const auto& l : m.encoder) l.spec.output_shape(c, h, w, c, h, w);
    if (c * h * w != m.latent_dim) throw FormatError("CAE encoder does not end at the latent width");
    for (const auto& l : m.decoder) l.spec.output_shape(c, h, w, c, h, w);
    if (c != 1 || h != m.resolution || w != m.resolution) throw FormatError("CAE decoder does not restore the input shape");
    return m;
}

void save(const CaeModel& model, const std::string& path) { binio::write_file(path, serialize(model)); }

CaeModel load(const std::string& path) { return deserialize(binio::read_file(path)); }

}  // namespace gridrep::cae
