#include "gridrep/pipeline/config.hpp"

#include <algorithm>
#include <json.hpp>

#include "gridrep/core/text.hpp"
#include "gridrep/error.hpp"

namespace gridrep::pipeline {

using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kMethods{"pca", "cae", "imported"};

std::string solver_name(pca::SvdSolver s) { return s == pca::SvdSolver::exact ? "exact" : "randomized"; }
std::string optimizer_name(cae::OptimizerKind k) { return k == cae::OptimizerKind::sgd ? "sgd" : "adam"; }

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw InvalidInput(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw InvalidInput(where + ": unknown key \"" + key + "\"");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidInput(where + ": field \"" + key + "\" has the wrong type");
    }
}

}  // namespace

bool ExperimentConfig::uses(const std::string& method) const {
    return std::find(methods.begin(), methods.end(), method) != methods.end();
}

void ExperimentConfig::validate() const {
    if (resolution != 64 && resolution != 128 && resolution != 256 && resolution != 512)
        throw InvalidInput("resolution must be one of 64, 128, 256, 512 (got " + std::to_string(resolution) + ")");
    if (methods.empty()) throw InvalidInput("methods must not be empty");
    for (std::size_t i = 0; i < methods.size(); ++i) {
        if (std::find(kMethods.begin(), kMethods.end(), methods[i]) == kMethods.end())
            throw InvalidInput("unknown method \"" + methods[i] + "\" (expected pca, cae or imported)");
        if (std::find(methods.begin(), methods.begin() + i, methods[i]) != methods.begin() + i)
            throw InvalidInput("method \"" + methods[i] + "\" listed twice");
    }
    if (latent_dims.empty()) throw InvalidInput("latent_dims must not be empty");
    for (std::size_t d : latent_dims) {
        if (d == 0) throw InvalidInput("latent dims must be positive");
        if (d > resolution * resolution)
            throw InvalidInput("latent dim " + std::to_string(d) + " exceeds resolution^2 = " +
                               std::to_string(resolution * resolution));
    }
    if (cv_folds < 2) throw InvalidInput("cv_folds must be at least 2");
    if (!(ridge >= 0.0)) throw InvalidInput("ridge must be non-negative");
    if (dataset.empty() && synthetic_days < 20) throw InvalidInput("synthetic_days must be at least 20");
    if (uses("imported") && imported_features.empty())
        throw InvalidInput("method imported needs imported_features");
    if (pca.batch_size == 0) throw InvalidInput("pca.batch_size must be positive");
    if (cae.epochs == 0) throw InvalidInput("cae.epochs must be positive");
    if (cae.base_channels == 0) throw InvalidInput("cae.base_channels must be positive");
    if (cae.batch_size == 0) throw InvalidInput("cae.batch_size must be positive");
    if (!(cae.learning_rate > 0.0)) throw InvalidInput("cae.learning_rate must be positive");
}

std::string config_json(const ExperimentConfig& cfg) {
    json j;
    j["dataset"] = cfg.dataset;
    j["labels"] = cfg.labels;
    j["synthetic_days"] = cfg.synthetic_days;
    j["resolution"] = cfg.resolution;
    j["methods"] = cfg.methods;
    j["latent_dims"] = cfg.latent_dims;
    j["cv_folds"] = cfg.cv_folds;
    j["stratified"] = cfg.stratified;
    j["ridge"] = cfg.ridge;
    j["standardize"] = cfg.standardize;
    j["seed"] = cfg.seed;
    j["output"] = cfg.output;
    j["imported_features"] = cfg.imported_features;
    j["reconstruction_cases"] = cfg.reconstruction_cases;
    j["pca"] = {{"solver", solver_name(cfg.pca.solver)},
                {"batch_size", cfg.pca.batch_size},
                {"oversample", cfg.pca.oversample},
                {"power_iters", cfg.pca.power_iters}};
    j["cae"] = {{"epochs", cfg.cae.epochs},
                {"base_channels", cfg.cae.base_channels},
                {"learning_rate", cfg.cae.learning_rate},
                {"batch_size", cfg.cae.batch_size},
                {"optimizer", optimizer_name(cfg.cae.optimizer)}};
    return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& source) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(source + ": " + e.what());
    }
    check_keys(j,
               {"dataset", "labels", "synthetic_days", "resolution", "methods", "latent_dims", "cv_folds",
                "stratified", "ridge", "standardize", "seed", "output", "imported_features",
                "reconstruction_cases", "pca", "cae"},
               source);
    ExperimentConfig cfg;
    read(j, "dataset", cfg.dataset, source);
    read(j, "labels", cfg.labels, source);
    read(j, "synthetic_days", cfg.synthetic_days, source);
    read(j, "resolution", cfg.resolution, source);
    read(j, "methods", cfg.methods, source);
    read(j, "latent_dims", cfg.latent_dims, source);
    read(j, "cv_folds", cfg.cv_folds, source);
    read(j, "stratified", cfg.stratified, source);
    read(j, "ridge", cfg.ridge, source);
    read(j, "standardize", cfg.standardize, source);
    read(j, "seed", cfg.seed, source);
    read(j, "output", cfg.output, source);
    read(j, "imported_features", cfg.imported_features, source);
    read(j, "reconstruction_cases", cfg.reconstruction_cases, source);
    if (j.contains("pca")) {
        const json& p = j["pca"];
        const std::string where = source + ": pca";
        check_keys(p, {"solver", "batch_size", "oversample", "power_iters"}, where);
        std::string solver = solver_name(cfg.pca.solver);
        read(p, "solver", solver, where);
        if (solver == "exact") cfg.pca.solver = pca::SvdSolver::exact;
        else if (solver == "randomized") cfg.pca.solver = pca::SvdSolver::randomized;
        else throw InvalidInput(where + ": solver must be exact or randomized");
        read(p, "batch_size", cfg.pca.batch_size, where);
        read(p, "oversample", cfg.pca.oversample, where);
        read(p, "power_iters", cfg.pca.power_iters, where);
    }
    if (j.contains("cae")) {
        const json& c = j["cae"];
        const std::string where = source + ": cae";
        check_keys(c, {"epochs", "base_channels", "learning_rate", "batch_size", "optimizer"}, where);
        read(c, "epochs", cfg.cae.epochs, where);
        read(c, "base_channels", cfg.cae.base_channels, where);
        read(c, "learning_rate", cfg.cae.learning_rate, where);
        read(c, "batch_size", cfg.cae.batch_size, where);
        std::string opt = optimizer_name(cfg.cae.optimizer);
        read(c, "optimizer", opt, where);
        if (opt == "adam") cfg.cae.optimizer = cae::OptimizerKind::adam;
        else if (opt == "sgd") cfg.cae.optimizer = cae::OptimizerKind::sgd;
        else throw InvalidInput(where + ": optimizer must be adam or sgd");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = text::read_file(path);
    } catch (const IoError& e) {
        throw InvalidInput(e.what());
    }
    return parse_config(text, path);
}

std::vector<std::string> parse_method_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto part : text::split(s, ',')) {
        std::string m(text::trim(part));
        if (m.empty()) throw InvalidInput("empty entry in method list \"" + s + "\"");
        out.push_back(m);
    }
    return out;
}

std::vector<std::size_t> parse_dim_list(const std::string& s) {
    std::vector<std::size_t> out;
    for (auto part : text::split(s, ',')) {
        std::string d(text::trim(part));
        if (d.empty() || d.find_first_not_of("0123456789") != std::string::npos)
            throw InvalidInput("bad latent dim \"" + d + "\" in \"" + s + "\"");
        try {
            out.push_back(std::stoull(d));
        } catch (const std::out_of_range&) {
            throw InvalidInput("latent dim \"" + d + "\" is out of range");
        }
    }
    return out;
}

}  // namespace gridrep::pipeline
