#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridrep/cae/layers.hpp"
#include "gridrep/core/matrix.hpp"
#include "gridrep/core/rng.hpp"

namespace gridrep::cae {

struct Layer {
    LayerSpec spec;
    std::vector<double> weights;
    std::vector<double> bias;

    friend bool operator==(const Layer&, const Layer&) = default;
};

/// Stride-2 convolutional encoder/decoder pair around a dense latent layer.
struct CaeModel {
    std::size_t resolution = 0;  // input is (1, resolution, resolution)
    std::size_t latent_dim = 0;
    std::vector<Layer> encoder;
    std::vector<Layer> decoder;

    std::size_t parameter_count() const;
    std::vector<double> flat_parameters() const;
    void set_flat_parameters(std::span<const double> flat);

    friend bool operator==(const CaeModel&, const CaeModel&) = default;
};

struct Architecture {
    std::size_t resolution = 64;
    std::size_t latent_dim = 64;
    std::vector<std::size_t> channels;  // one stride-2 block per entry
    std::size_t kernel = 4;
};

/// Channels double from 16 per block until the feature map is 8×8
/// (three blocks at 64×64, five at 256×256).
Architecture default_architecture(std::size_t resolution, std::size_t latent_dim, std::size_t base_channels = 16);

/// Builds the layer stack. Weights ~ U(-a, a) with a = sqrt(6 / fan_in)
/// drawn from rng in layer order; biases start at zero.
CaeModel build_model(const Architecture& arch, SeededRng& rng);

/// Same layers, every parameter zero.
CaeModel build_zero_model(const Architecture& arch);

Matrix encode(const CaeModel& model, const Tensor4& x);
Tensor4 decode(const CaeModel& model, const Matrix& z);
Tensor4 reconstruct(const CaeModel& model, const Tensor4& x);

/// Reconstruction loss of a batch and the gradient of every parameter in
/// flat_parameters() order.
struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};
LossAndGradient loss_and_gradient(const CaeModel& model, const Tensor4& x);

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainResult {
    CaeModel model;
    std::vector<double> loss_history;  // sample-weighted mean batch RMSE per epoch
};

/// Mini-batch training on frames shaped (n, 1, resolution, resolution) with
/// values in [0, 1]. Shuffling comes from cfg.seed only.
TrainResult train(const Tensor4& frames, CaeModel init, const TrainConfig& cfg);

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_parameter = 0;
    std::size_t parameters_checked = 0;
    std::size_t parameter_count = 0;
    bool passed = false;

    double coverage() const {
        return parameter_count == 0 ? 1.0 : static_cast<double>(parameters_checked) / static_cast<double>(parameter_count);
    }
};

/// Compares analytic gradients with central differences (step 1e-6) for every
/// parameter. The relative error is |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport grad_check(const CaeModel& model, const Tensor4& x, double tolerance);

/// GRCAE1 model file: magic, length-prefixed architecture text, parameters.
std::string architecture_text(const CaeModel& model);
std::vector<char> serialize(const CaeModel& model);
CaeModel deserialize(std::span<const char> bytes);
void save(const CaeModel& model, const std::string& path);
CaeModel load(const std::string& path);

}  // namespace gridrep::cae
