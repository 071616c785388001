#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridrep/cae/model.hpp"
#include "gridrep/pca.hpp"

namespace gridrep::pipeline {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct PcaSettings {
    pca::SvdSolver solver = pca::SvdSolver::randomized;
    std::size_t batch_size = 256;
    std::size_t oversample = 10;
    std::size_t power_iters = 4;
    friend bool operator==(const PcaSettings&, const PcaSettings&) = default;
};

// Desk defaults: 20 epochs keeps a 600-frame 64x64 run at a few minutes.
struct CaeSettings {
    std::size_t epochs = 20;
    std::size_t base_channels = 16;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    cae::OptimizerKind optimizer = cae::OptimizerKind::adam;
    friend bool operator==(const CaeSettings&, const CaeSettings&) = default;
};

struct ExperimentConfig {
    // Dataset directory (index.json + labels.csv). Empty means a synthetic
    // dataset of synthetic_days is generated in memory from the seed.
    std::string dataset;
    std::string labels;  // defaults to <dataset>/labels.csv
    std::size_t synthetic_days = 600;
    std::size_t resolution = 64;
    std::vector<std::string> methods{"pca", "cae"};
    std::vector<std::size_t> latent_dims{64};
    std::size_t cv_folds = 10;
    bool stratified = false;
    double ridge = 0.0;
    bool standardize = true;
    std::uint64_t seed = 2024;
    std::string output = "out";
    std::string imported_features;  // feature file for the "imported" method
    std::vector<std::string> reconstruction_cases;  // timestamps rendered after exp1
    PcaSettings pca;
    CaeSettings cae;

    // Throws InvalidInput naming the offending field.
    void validate() const;
    bool uses(const std::string& method) const;
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string config_json(const ExperimentConfig& cfg);
// Unknown keys are rejected so typos do not silently fall back to defaults.
ExperimentConfig parse_config(const std::string& json_text, const std::string& source);
ExperimentConfig load_config(const std::string& path);

std::vector<std::string> parse_method_list(const std::string& s);
std::vector<std::size_t> parse_dim_list(const std::string& s);

}  // namespace gridrep::pipeline
