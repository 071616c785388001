#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "gridrep/classify/cv.hpp"
#include "gridrep/classify/glm.hpp"
#include "gridrep/core/binary_io.hpp"
#include "gridrep/core/text.hpp"
#include "gridrep/error.hpp"
#include "gridrep/ingest/features.hpp"
#include "gridrep/ingest/frames.hpp"
#include "gridrep/ingest/labels.hpp"
#include "gridrep/ingest/synthetic.hpp"
#include "gridrep/pipeline/experiments.hpp"

using namespace gridrep;
namespace fs = std::filesystem;

namespace {

// Flags shared by every subcommand; a flag only overrides the config when given.
struct Globals {
    std::uint64_t seed = 2024;
    std::string out;
    std::size_t resolution = 0;
    std::string latent_dims;
    std::size_t folds = 10;
    double ridge = 0.0;
    std::string methods;
    bool quiet = false;
    CLI::Option *seed_opt, *out_opt, *res_opt, *dims_opt, *folds_opt, *ridge_opt, *methods_opt;
};

Globals g;

void note(const std::string& msg) {
    if (!g.quiet) std::cerr << msg << "\n";
}

std::string out_dir(const std::string& fallback = "") {
    if (!g.out.empty()) return g.out;
    if (!fallback.empty()) return fallback;
    throw InvalidInput("--out is required");
}

std::size_t single_dim(std::size_t fallback) {
    if (!*g.dims_opt) return fallback;
    auto dims = pipeline::parse_dim_list(g.latent_dims);
    if (dims.size() != 1) throw InvalidInput("this command takes a single --latent-dim");
    return dims.front();
}

// Config for a dataset on disk; resolution defaults to the stored grid.
pipeline::ExperimentConfig data_config(const std::string& data) {
    pipeline::ExperimentConfig cfg;
    cfg.dataset = data;
    cfg.seed = g.seed;
    if (*g.res_opt) {
        cfg.resolution = g.resolution;
    } else {
        const auto m = ingest::load_manifest(data);
        if (m.height != m.width) throw InvalidInput("dataset grid is not square; pass --resolution");
        cfg.resolution = m.height;
    }
    cfg.validate();
    return cfg;
}

void apply_globals(pipeline::ExperimentConfig& cfg) {
    if (*g.seed_opt) cfg.seed = g.seed;
    if (*g.out_opt) cfg.output = g.out;
    if (*g.res_opt) cfg.resolution = g.resolution;
    if (*g.dims_opt) cfg.latent_dims = pipeline::parse_dim_list(g.latent_dims);
    if (*g.folds_opt) cfg.cv_folds = g.folds;
    if (*g.ridge_opt) cfg.ridge = g.ridge;
    if (*g.methods_opt) cfg.methods = pipeline::parse_method_list(g.methods);
}

std::string magic_of(const std::string& path) {
    auto bytes = binio::read_file(path);
    return std::string(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(6, bytes.size())));
}

std::string labels_path_for(const std::string& data, const std::string& labels) {
    if (!labels.empty()) return labels;
    if (data.empty()) throw InvalidInput("give --data or --labels");
    return (fs::path(data) / "labels.csv").string();
}

// --- subcommands ----------------------------------------------------------

struct GenData {
    std::size_t days = 600;
    void run() const {
        const std::size_t res = *g.res_opt ? g.resolution : 64;
        const std::string dir = out_dir();
        auto syn = ingest::generate_synthetic(days, res, g.seed);
        ingest::write_dataset(dir, syn.frames, true);
        ingest::save_labels(syn.labels, (fs::path(dir) / "labels.csv").string());
        std::printf("wrote %zu frames at %zux%zu to %s\n", syn.frames.size(), res, res, dir.c_str());
        for (const auto& s : ingest::label_stats(syn.labels))
            std::printf("%-6s %5llu  %s\n", s.event.c_str(), static_cast<unsigned long long>(s.count),
                        text::fixed_or_na(s.frequency, 3).c_str());
    }
};

struct Preprocess {
    std::string input, box, labels;
    void run() const {
        const auto m = ingest::load_manifest(input);
        const std::string dir = out_dir();
        std::optional<ingest::GridBox> crop;
        if (!box.empty()) {
            auto parts = text::split(box, ',');
            if (parts.size() != 4) throw InvalidInput("--box wants lat_min,lat_max,lon_min,lon_max");
            double v[4];
            for (int i = 0; i < 4; ++i) {
                try {
                    v[i] = std::stod(parts[static_cast<std::size_t>(i)]);
                } catch (const std::exception&) {
                    throw InvalidInput("bad --box value \"" + parts[static_cast<std::size_t>(i)] + "\"");
                }
            }
            crop = ingest::GridBox{v[0], v[1], v[2], v[3]};
        }
        std::vector<ingest::GridFrame> out;
        for (std::size_t i = 0; i < m.size(); ++i) {
            auto f = ingest::load_frame(m, i);
            if (crop) f = ingest::crop_to_box(f, crop->lat_min, crop->lat_max, crop->lon_min, crop->lon_max);
            if (!m.scaled) f = ingest::rescale_unit(f);
            if (*g.res_opt) f = ingest::bilinear_resize(f, g.resolution, g.resolution);
            out.push_back(std::move(f));
        }
        ingest::write_dataset(dir, out, true);
        const std::string src = labels.empty() ? (fs::path(m.root) / "labels.csv").string() : labels;
        if (fs::exists(src)) {
            ingest::save_labels(ingest::align_labels(ingest::load_labels(src), m.timestamps()),
                                (fs::path(dir) / "labels.csv").string());
        } else {
            note("no labels found at " + src + "; writing frames only");
        }
        std::printf("wrote %zu frames (%zux%zu) to %s\n", out.size(), out.front().height, out.front().width, dir.c_str());
    }
};

struct FitPca {
    std::string data, solver = "randomized";
    std::size_t batch = 256;
    void run() const {
        auto cfg = data_config(data);
        if (solver == "exact") cfg.pca.solver = pca::SvdSolver::exact;
        else if (solver != "randomized") throw InvalidInput("--solver must be exact or randomized");
        cfg.pca.batch_size = batch;
        const std::size_t d = single_dim(64);
        const auto x = pipeline::load_experiment_data(cfg, false);
        pca::PcaModel m;
        const auto learned = pipeline::learn_pca(x, d, cfg, &m);
        const std::string path = out_dir();
        pca::save(m, path);
        std::printf("pca d=%zu: %.3f s, %zu bytes, rmse %.6f -> %s\n", d, learned.timing.learn_seconds,
                    learned.timing.storage_bytes, pca::reconstruction_rmse(m, x.x), path.c_str());
    }
};

struct FitCae {
    std::string data, optimizer = "adam";
    pipeline::CaeSettings s;
    void run() const {
        auto cfg = data_config(data);
        cfg.cae = s;
        if (optimizer == "sgd") cfg.cae.optimizer = cae::OptimizerKind::sgd;
        else if (optimizer != "adam") throw InvalidInput("--optimizer must be adam or sgd");
        cfg.validate();
        const std::size_t d = single_dim(64);
        const auto x = pipeline::load_experiment_data(cfg, false);
        cae::CaeModel m;
        const auto learned = pipeline::learn_cae(x, d, cfg, &m, note);
        const std::string path = out_dir();
        cae::save(m, path);
        std::printf("cae d=%zu: %.3f s, %zu bytes -> %s\n", d, learned.timing.learn_seconds, learned.timing.storage_bytes,
                    path.c_str());
    }
};

struct Extract {
    std::string data, model;
    bool csv = false;
    void run() const {
        const std::string magic = magic_of(model);
        ingest::FeatureSet f;
        if (magic == "GRPCA1") {
            const auto m = pca::load(model);
            auto cfg = data_config(data);
            const auto x = pipeline::load_experiment_data(cfg, false);
            f = {"pca", pca::transform(m, x.x), x.timestamps};
        } else if (magic == "GRCAE1") {
            const auto m = cae::load(model);
            auto cfg = data_config(data);
            if (cfg.resolution != m.resolution) cfg.resolution = m.resolution;
            const auto x = pipeline::load_experiment_data(cfg, false);
            const std::size_t r = x.resolution;
            f = {"cae", cae::encode(m, cae::Tensor4(x.x.rows(), 1, r, r, std::vector<double>(x.x.values().begin(), x.x.values().end()))),
                 x.timestamps};
        } else {
            throw FormatError(model + ": not a PCA or CAE model file");
        }
        const std::string path = out_dir();
        if (csv) ingest::export_features_csv(f, path);
        else ingest::export_features(f, path);
        std::printf("%s features: %zu x %zu -> %s\n", f.method.c_str(), f.x.rows(), f.x.cols(), path.c_str());
    }
};

struct ImportFeatures {
    std::string data, features, method = "imported";
    void run() const {
        const auto m = ingest::load_manifest(data);
        const auto f = ingest::import_features(features, method, m.timestamps());
        const std::string path = out_dir();
        ingest::export_features(f, path);
        std::printf("imported %s: %zu x %zu -> %s\n", f.method.c_str(), f.x.rows(), f.x.cols(), path.c_str());
    }
};

struct Classify {
    std::string data, labels, features;
    bool stratified = false, standardize = true;
    void run() const {
        const std::string lpath = labels_path_for(data, labels);
        auto table = ingest::load_labels(lpath);
        std::vector<std::string> stamps;
        for (const auto& d : table.dates) stamps.push_back(d + "T00:00:00Z");
        if (!data.empty()) {
            stamps = ingest::load_manifest(data).timestamps();
            table = ingest::align_labels(table, stamps);
        }
        const auto f = ingest::import_features(features, "", stamps);
        const std::string dir = out_dir();
        fs::create_directories(dir);

        classify::CvOptions opts;
        opts.folds = g.folds;
        opts.stratified = stratified;
        opts.glm.ridge = g.ridge;
        opts.glm.standardize = standardize;
        const SeededRng base = SeededRng(g.seed).split(0xC5);

        std::string pred = "timestamp", prob = "timestamp";
        for (const auto& e : ingest::kEvents) {
            pred += "," + e;
            prob += "," + e;
        }
        pred += "\n";
        prob += "\n";
        std::vector<classify::CvResult> results;
        std::vector<verify::ScoreRow> rows;
        for (std::size_t e = 0; e < ingest::kEvents.size(); ++e) {
            SeededRng rng = base;
            const auto y = table.column(e);
            results.push_back(classify::cross_validate(f.x, y, opts, rng));
            rows.push_back({f.method, ingest::kEvents[e], verify::scores(results.back().pooled)});
            if (results.back().degenerate_folds() > 0)
                note(ingest::kEvents[e] + ": " + std::to_string(results.back().degenerate_folds()) +
                     " fold(s) had a single class in training and were left out of the pooled table");
            try {
                const auto fit = classify::fit_logistic(f.x, y, opts.glm);
                text::write_file((fs::path(dir) / ("significance_" + ingest::kEvents[e] + ".csv")).string(),
                                 classify::significance_csv(classify::significance_table(fit)));
                if (fit.separated) note(ingest::kEvents[e] + ": the full-data fit separates the classes; standard errors are unreliable");
            } catch (const DegenerateLabels& ex) {
                note(ingest::kEvents[e] + ": no significance table (" + ex.what() + ")");
            }
        }
        for (std::size_t i = 0; i < stamps.size(); ++i) {
            pred += stamps[i];
            prob += stamps[i];
            for (const auto& r : results) {
                const auto& p = r.probabilities[i];
                pred += p ? (*p >= opts.threshold ? ",1" : ",0") : ",NA";
                prob += "," + text::fixed_or_na(p, 6);
            }
            pred += "\n";
            prob += "\n";
        }
        text::write_file((fs::path(dir) / "predictions.csv").string(), pred);
        text::write_file((fs::path(dir) / "probabilities.csv").string(), prob);
        verify::write_scores_csv(rows, (fs::path(dir) / "scores.csv").string());
        std::printf("%s", verify::scores_csv(rows).c_str());
    }
};

struct Evaluate {
    std::string predictions, labels, data, method = "forecast";
    void run() const {
        const auto table = ingest::load_labels(labels_path_for(data, labels));
        const std::string text_in = text::read_file(predictions);
        const auto lines = text::split(text_in, '\n');
        std::string header = "timestamp";
        for (const auto& e : ingest::kEvents) header += "," + e;
        if (lines.empty() || text::trim(lines[0]) != header)
            throw FormatError(predictions + ":1: header must be " + header);
        std::vector<std::vector<int>> pred(5), obs(5);
        std::vector<std::string> seen;
        for (std::size_t ln = 1; ln < lines.size(); ++ln) {
            const auto line = text::trim(lines[ln]);
            if (line.empty()) continue;
            const auto cells = text::split(line, ',');
            const std::string where = predictions + ":" + std::to_string(ln + 1);
            if (cells.size() != 6) throw FormatError(where + ": expected 6 fields");
            seen.push_back(cells[0].size() > 10 ? cells[0] : cells[0] + "T00:00:00Z");
        }
        const auto aligned = ingest::align_labels(table, seen);
        std::size_t row = 0;
        for (std::size_t ln = 1; ln < lines.size(); ++ln) {
            const auto line = text::trim(lines[ln]);
            if (line.empty()) continue;
            const auto cells = text::split(line, ',');
            for (std::size_t e = 0; e < 5; ++e) {
                const std::string& c = cells[e + 1];
                if (c == "NA") continue;
                if (c != "0" && c != "1")
                    throw FormatError(predictions + ":" + std::to_string(ln + 1) + ": " + ingest::kEvents[e] +
                                      " must be 0, 1 or NA");
                pred[e].push_back(c == "1");
                obs[e].push_back(aligned.flags[row][e]);
            }
            ++row;
        }
        std::vector<verify::ScoreRow> rows;
        std::vector<verify::DiagramPoint> points;
        for (std::size_t e = 0; e < 5; ++e) {
            const auto t = verify::tabulate(pred[e], obs[e]);
            const auto s = verify::scores(t);
            rows.push_back({method, ingest::kEvents[e], s});
            if (s.sr && s.pod) points.push_back({*s.sr, *s.pod, ingest::kEvents[e], method});
            std::printf("%-6s a=%llu b=%llu c=%llu d=%llu\n", ingest::kEvents[e].c_str(),
                        static_cast<unsigned long long>(t.a), static_cast<unsigned long long>(t.b),
                        static_cast<unsigned long long>(t.c), static_cast<unsigned long long>(t.d));
        }
        const std::string dir = out_dir();
        fs::create_directories(dir);
        verify::write_scores_csv(rows, (fs::path(dir) / "scores.csv").string());
        verify::render_performance_diagram(points, (fs::path(dir) / "performance_diagram.svg").string(), method);
        std::printf("%s", verify::scores_csv(rows).c_str());
    }
};

struct ExperimentArgs {
    std::string config, data, labels, imported, cases;
    std::size_t days = 0, epochs = 0, base_channels = 0, high_resolution = 0;

    pipeline::ExperimentConfig build(std::vector<std::size_t> default_dims = {}) const {
        pipeline::ExperimentConfig cfg = config.empty() ? pipeline::ExperimentConfig{} : pipeline::load_config(config);
        if (config.empty() && !default_dims.empty()) cfg.latent_dims = default_dims;
        apply_globals(cfg);
        if (!data.empty()) cfg.dataset = data;
        if (!labels.empty()) cfg.labels = labels;
        if (!imported.empty()) cfg.imported_features = imported;
        if (days) cfg.synthetic_days = days;
        if (epochs) cfg.cae.epochs = epochs;
        if (base_channels) cfg.cae.base_channels = base_channels;
        if (!cases.empty()) {
            cfg.reconstruction_cases.clear();
            for (const auto& c : text::split(cases, ',')) cfg.reconstruction_cases.emplace_back(text::trim(c));
        }
        cfg.validate();
        // Fail on an unusable output directory before any compute.
        std::error_code ec;
        fs::create_directories(cfg.output, ec);
        if (ec || !fs::is_directory(cfg.output)) throw IoError("cannot create output directory " + cfg.output);
        return cfg;
    }
};

void run_exp1(const ExperimentArgs& a) {
    const auto cfg = a.build();
    const auto data = pipeline::load_experiment_data(cfg);
    pipeline::FittedModels models;
    const auto report = pipeline::run_experiment1(cfg, data, &models, note);
    pipeline::emit_report(report, cfg.output);
    pipeline::emit_models(models, (fs::path(cfg.output) / "models").string());
    if (!cfg.reconstruction_cases.empty()) {
        const std::size_t d = cfg.latent_dims.front();
        if (!models.pca.count(d) || !models.cae.count(d))
            throw InvalidInput("reconstruction cases need both pca and cae in methods");
        pipeline::emit_reconstructions(data, models.pca.at(d), models.cae.at(d), cfg.reconstruction_cases,
                                       (fs::path(cfg.output) / "reconstructions").string());
    }
    std::printf("%s", pipeline::report_scores_csv(report).c_str());
    std::printf("%s", pipeline::report_timings_csv(report).c_str());
}

void run_exp2(const ExperimentArgs& a) {
    const auto low = a.build();
    auto high = low;
    high.resolution = a.high_resolution ? a.high_resolution : 2 * low.resolution;
    high.validate();
    const auto cmp = pipeline::run_experiment2(low, high, note);
    pipeline::emit_comparison(cmp, low.output);
    std::printf("%s", pipeline::delta_csv(cmp.deltas).c_str());
}

void run_exp3(const ExperimentArgs& a) {
    const auto cfg = a.build({4, 8, 16, 32, 64, 128});
    const auto report = pipeline::run_experiment3(cfg, note);
    pipeline::emit_report(report, cfg.output);
    std::printf("%s", pipeline::report_scores_csv(report).c_str());
}

struct Reconstruct {
    std::string data, pca_path, cae_path, cases;
    void run() const {
        const auto p = pca::load(pca_path);
        const auto c = cae::load(cae_path);
        auto cfg = data_config(data);
        cfg.resolution = c.resolution;
        const auto x = pipeline::load_experiment_data(cfg, false);
        std::vector<std::string> list;
        for (const auto& s : text::split(cases, ',')) list.emplace_back(text::trim(s));
        const auto files = pipeline::emit_reconstructions(x, p, c, list, out_dir());
        for (const auto& f : files) std::printf("%s\n", f.c_str());
    }
};

void add_experiment_options(CLI::App* sub, ExperimentArgs& a) {
    sub->add_option("--config", a.config, "experiment config JSON");
    sub->add_option("--data", a.data, "dataset directory (default: generate synthetic data)");
    sub->add_option("--labels", a.labels, "labels CSV (default: <data>/labels.csv)");
    sub->add_option("--imported", a.imported, "feature file for the imported method");
    sub->add_option("--days", a.days, "synthetic days when no dataset is given");
    sub->add_option("--epochs", a.epochs, "CAE training epochs");
    sub->add_option("--base-channels", a.base_channels, "CAE channels in the first block");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridrep: learned representations of gridded satellite imagery for weather event classification"};
    app.require_subcommand(1);
    app.fallthrough();
    g.seed_opt = app.add_option("--seed", g.seed, "random seed");
    g.out_opt = app.add_option("--out", g.out, "output file or directory");
    g.res_opt = app.add_option("--resolution", g.resolution, "frame size in pixels (64, 128, 256, 512)");
    g.dims_opt = app.add_option("--latent-dim", g.latent_dims, "latent size, or comma list for sweeps");
    g.folds_opt = app.add_option("--folds", g.folds, "cross-validation folds");
    g.ridge_opt = app.add_option("--ridge", g.ridge, "L2 penalty for the logistic regression");
    g.methods_opt = app.add_option("--methods", g.methods, "comma list of pca, cae, imported");
    app.add_flag("-q,--quiet", g.quiet, "no progress messages");

    GenData gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "write a seeded synthetic dataset with labels");
    gen_cmd->add_option("--days", gen.days, "number of daily frames")->capture_default_str();

    Preprocess pre;
    auto* pre_cmd = app.add_subcommand("preprocess", "crop, rescale to [0,1] and resize a dataset");
    pre_cmd->add_option("--input", pre.input, "input dataset directory")->required();
    pre_cmd->add_option("--box", pre.box, "crop box lat_min,lat_max,lon_min,lon_max");
    pre_cmd->add_option("--labels", pre.labels, "labels CSV to carry over");

    FitPca fp;
    auto* fp_cmd = app.add_subcommand("fit-pca", "fit incremental PCA and save the model");
    fp_cmd->add_option("--data", fp.data, "dataset directory")->required();
    fp_cmd->add_option("--solver", fp.solver, "exact or randomized")->capture_default_str();
    fp_cmd->add_option("--batch-size", fp.batch, "rows per partial fit")->capture_default_str();

    FitCae fc;
    auto* fc_cmd = app.add_subcommand("fit-cae", "train the convolutional autoencoder and save it");
    fc_cmd->add_option("--data", fc.data, "dataset directory")->required();
    fc_cmd->add_option("--epochs", fc.s.epochs, "training epochs")->capture_default_str();
    fc_cmd->add_option("--base-channels", fc.s.base_channels, "channels in the first block")->capture_default_str();
    fc_cmd->add_option("--lr", fc.s.learning_rate, "learning rate")->capture_default_str();
    fc_cmd->add_option("--batch-size", fc.s.batch_size, "mini-batch size")->capture_default_str();
    fc_cmd->add_option("--optimizer", fc.optimizer, "adam or sgd")->capture_default_str();

    Extract ex;
    auto* ex_cmd = app.add_subcommand("extract", "write latent features of a dataset with a saved model");
    ex_cmd->add_option("--data", ex.data, "dataset directory")->required();
    ex_cmd->add_option("--model", ex.model, "PCA or CAE model file")->required();
    ex_cmd->add_flag("--csv", ex.csv, "write CSV instead of binary");

    ImportFeatures im;
    auto* im_cmd = app.add_subcommand("import-features", "check external features against a dataset and store them");
    im_cmd->add_option("--data", im.data, "dataset directory")->required();
    im_cmd->add_option("--features", im.features, "binary or CSV feature file")->required();
    im_cmd->add_option("--method", im.method, "method tag")->capture_default_str();

    Classify cl;
    auto* cl_cmd = app.add_subcommand("classify", "cross-validated logistic regression for every event");
    cl_cmd->add_option("--data", cl.data, "dataset directory (timestamps and labels)");
    cl_cmd->add_option("--labels", cl.labels, "labels CSV");
    cl_cmd->add_option("--features", cl.features, "feature file")->required();
    cl_cmd->add_flag("--stratified", cl.stratified, "stratified folds");
    cl_cmd->add_flag("!--no-standardize", cl.standardize, "fit on raw feature scales");

    Evaluate ev;
    auto* ev_cmd = app.add_subcommand("evaluate", "score 0/1 predictions against labels");
    ev_cmd->add_option("--predictions", ev.predictions, "CSV timestamp,FT,NE,SWF,HR,NWPTC")->required();
    ev_cmd->add_option("--labels", ev.labels, "labels CSV");
    ev_cmd->add_option("--data", ev.data, "dataset directory holding labels.csv");
    ev_cmd->add_option("--method", ev.method, "name used in the outputs")->capture_default_str();

    ExperimentArgs e1, e2, e3;
    auto* e1_cmd = app.add_subcommand("exp1", "one resolution, one latent size, all events");
    add_experiment_options(e1_cmd, e1);
    e1_cmd->add_option("--cases", e1.cases, "timestamps to reconstruct (comma list)");
    auto* e2_cmd = app.add_subcommand("exp2", "compare two resolutions");
    add_experiment_options(e2_cmd, e2);
    e2_cmd->add_option("--high-resolution", e2.high_resolution, "second resolution (default 2x --resolution)");
    auto* e3_cmd = app.add_subcommand("exp3", "sweep latent sizes (default 4..128)");
    add_experiment_options(e3_cmd, e3);

    Reconstruct rc;
    auto* rc_cmd = app.add_subcommand("reconstruct", "PGM and SVG reconstructions of chosen frames");
    rc_cmd->add_option("--data", rc.data, "dataset directory")->required();
    rc_cmd->add_option("--pca", rc.pca_path, "PCA model file")->required();
    rc_cmd->add_option("--cae", rc.cae_path, "CAE model file")->required();
    rc_cmd->add_option("--cases", rc.cases, "timestamps (comma list)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc_code = app.exit(e);
        return rc_code == 0 ? 0 : 2;
    }

    try {
        if (*gen_cmd) gen.run();
        else if (*pre_cmd) pre.run();
        else if (*fp_cmd) fp.run();
        else if (*fc_cmd) fc.run();
        else if (*ex_cmd) ex.run();
        else if (*im_cmd) im.run();
        else if (*cl_cmd) cl.run();
        else if (*ev_cmd) ev.run();
        else if (*e1_cmd) run_exp1(e1);
        else if (*e2_cmd) run_exp2(e2);
        else if (*e3_cmd) run_exp3(e3);
        else if (*rc_cmd) rc.run();
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
