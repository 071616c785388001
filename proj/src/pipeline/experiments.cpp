#include "gridrep/pipeline/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>

#include "gridrep/error.hpp"
#include "gridrep/ingest/features.hpp"
#include "gridrep/ingest/frames.hpp"
#include "gridrep/ingest/synthetic.hpp"

namespace gridrep::pipeline {

namespace fs = std::filesystem;

namespace {

// Stream tags off the run seed.
constexpr std::uint64_t kCaeInitTag = 0xCAE;
constexpr std::uint64_t kCvTag = 0xC5;

void say(const Progress& p, const std::string& msg) {
    if (p) p(msg);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

cae::Tensor4 as_tensor(const ExperimentData& data) {
    const std::size_t r = data.resolution;
    return cae::Tensor4(data.x.rows(), 1, r, r, std::vector<double>(data.x.values().begin(), data.x.values().end()));
}

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace

ExperimentData load_experiment_data(const ExperimentConfig& cfg, bool with_labels) {
    cfg.validate();
    ExperimentData data;
    data.resolution = cfg.resolution;
    std::vector<ingest::GridFrame> frames;
    if (cfg.dataset.empty()) {
        auto syn = ingest::generate_synthetic(cfg.synthetic_days, cfg.resolution, cfg.seed);
        frames = std::move(syn.frames);
        data.labels = std::move(syn.labels);
        for (const auto& f : frames) data.timestamps.push_back(f.timestamp);
    } else {
        const auto manifest = ingest::load_manifest(cfg.dataset);
        data.timestamps = manifest.timestamps();
        const std::string label_path =
            cfg.labels.empty() ? (fs::path(manifest.root) / "labels.csv").string() : cfg.labels;
        if (with_labels) data.labels = ingest::align_labels(ingest::load_labels(label_path), data.timestamps);
        frames = ingest::load_frames(manifest);
        for (auto& f : frames) {
            if (!manifest.scaled) f = ingest::rescale_unit(f);
            for (std::size_t i = 0; i < f.values.size(); ++i) {
                if (!(f.values[i] >= 0.0f && f.values[i] <= 1.0f))
                    throw RangeError("frame " + f.timestamp + " is marked scaled but holds " +
                                     std::to_string(f.values[i]) + " at index " + std::to_string(i));
            }
            if (f.height != cfg.resolution || f.width != cfg.resolution)
                f = ingest::bilinear_resize(f, cfg.resolution, cfg.resolution);
        }
    }
    data.x = ingest::frames_matrix(frames);
    return data;
}

std::size_t ReportEntry::degenerate_folds() const {
    return static_cast<std::size_t>(std::count_if(folds.begin(), folds.end(), [](const auto& f) { return f.degenerate; }));
}

std::size_t ReportEntry::separated_folds() const {
    return static_cast<std::size_t>(std::count_if(folds.begin(), folds.end(), [](const auto& f) { return f.separated; }));
}

const ReportEntry& RunReport::entry(const std::string& method, std::size_t dim, const std::string& event) const {
    for (const auto& e : entries)
        if (e.method == method && e.latent_dim == dim && e.event == event) return e;
    throw InvalidInput("report has no entry for " + method + " d=" + std::to_string(dim) + " " + event);
}

LearnedFeatures learn_pca(const ExperimentData& data, std::size_t dim, const ExperimentConfig& cfg,
                          pca::PcaModel* keep) {
    pca::PcaOptions opts;
    opts.solver = cfg.pca.solver;
    opts.batch_size = cfg.pca.batch_size;
    opts.rsvd.oversample = cfg.pca.oversample;
    opts.rsvd.power_iters = cfg.pca.power_iters;
    opts.seed = cfg.seed;
    const auto t0 = std::chrono::steady_clock::now();
    pca::PcaModel model = pca::fit_incremental(data.x, dim, opts);
    LearnedFeatures out;
    out.timing = {"pca", dim, seconds_since(t0), pca::serialize(model).size()};
    out.z = pca::transform(model, data.x);
    if (keep) *keep = std::move(model);
    return out;
}

LearnedFeatures learn_cae(const ExperimentData& data, std::size_t dim, const ExperimentConfig& cfg,
                          cae::CaeModel* keep, const Progress& progress) {
    const auto arch = cae::default_architecture(data.resolution, dim, cfg.cae.base_channels);
    SeededRng init = SeededRng(cfg.seed).split(kCaeInitTag);
    cae::TrainConfig tc;
    tc.learning_rate = cfg.cae.learning_rate;
    tc.epochs = cfg.cae.epochs;
    tc.batch_size = cfg.cae.batch_size;
    tc.optimizer = cfg.cae.optimizer;
    tc.seed = cfg.seed;
    const cae::Tensor4 frames = as_tensor(data);

    const auto t0 = std::chrono::steady_clock::now();
    cae::CaeModel model = cae::build_model(arch, init);
    auto trained = cae::train(frames, std::move(model), tc);
    LearnedFeatures out;
    out.timing = {"cae", dim, seconds_since(t0), cae::serialize(trained.model).size()};
    say(progress, "cae d=" + std::to_string(dim) + ": final loss " + std::to_string(trained.loss_history.back()));
    out.z = cae::encode(trained.model, frames);
    if (keep) *keep = std::move(trained.model);
    return out;
}

LearnedFeatures load_imported(const ExperimentData& data, const ExperimentConfig& cfg) {
    auto f = ingest::import_features(cfg.imported_features, "imported", data.timestamps);
    LearnedFeatures out;
    out.timing = {"imported", f.x.cols(), 0.0, 0};
    out.z = std::move(f.x);
    return out;
}

std::vector<ReportEntry> evaluate_features(const std::string& method, const Matrix& z,
                                           const ingest::LabelTable& labels, const ExperimentConfig& cfg) {
    if (z.rows() != labels.size())
        throw AlignmentError("features have " + std::to_string(z.rows()) + " rows, labels " +
                             std::to_string(labels.size()));
    classify::CvOptions opts;
    opts.folds = cfg.cv_folds;
    opts.stratified = cfg.stratified;
    opts.glm.ridge = cfg.ridge;
    opts.glm.standardize = cfg.standardize;
    const SeededRng cv_base = SeededRng(cfg.seed).split(kCvTag);
    std::vector<ReportEntry> out;
    for (std::size_t e = 0; e < ingest::kEvents.size(); ++e) {
        SeededRng rng = cv_base;
        const auto y = labels.column(e);
        auto cv = classify::cross_validate(z, y, opts, rng);
        ReportEntry entry;
        entry.method = method;
        entry.latent_dim = z.cols();
        entry.event = ingest::kEvents[e];
        entry.table = cv.pooled;
        entry.scores = verify::scores(cv.pooled);
        entry.folds = std::move(cv.folds);
        out.push_back(std::move(entry));
    }
    return out;
}

RunReport run_experiment1(const ExperimentConfig& cfg, FittedModels* models, const Progress& progress) {
    cfg.validate();
    return run_experiment1(cfg, load_experiment_data(cfg), models, progress);
}

RunReport run_experiment1(const ExperimentConfig& cfg, const ExperimentData& data, FittedModels* models,
                          const Progress& progress) {
    cfg.validate();
    if (data.resolution != cfg.resolution) throw InvalidInput("data resolution does not match the config");
    RunReport report;
    report.experiment = "exp1";
    report.config = cfg;
    const std::size_t dim = cfg.latent_dims.front();
    for (const auto& method : cfg.methods) {
        say(progress, "learning " + method + " features");
        LearnedFeatures learned;
        if (method == "pca") {
            pca::PcaModel m;
            learned = learn_pca(data, dim, cfg, &m);
            if (models) models->pca[dim] = std::move(m);
        } else if (method == "cae") {
            cae::CaeModel m;
            learned = learn_cae(data, dim, cfg, &m, progress);
            if (models) models->cae[dim] = std::move(m);
        } else {
            learned = load_imported(data, cfg);
        }
        report.timings.push_back(learned.timing);
        say(progress, "classifying " + method + " features");
        auto entries = evaluate_features(method, learned.z, data.labels, cfg);
        report.entries.insert(report.entries.end(), entries.begin(), entries.end());
    }
    return report;
}

std::vector<verify::DeltaRow> compare_reports(const RunReport& low, const RunReport& high) {
    if (low.entries.size() != high.entries.size())
        throw InvalidInput("reports cover different method/event grids");
    std::vector<verify::DeltaRow> rows;
    for (std::size_t i = 0; i < low.entries.size(); ++i) {
        const auto& l = low.entries[i];
        const auto& h = high.entries[i];
        if (l.method != h.method || l.event != h.event)
            throw InvalidInput("reports cover different method/event grids");
        rows.push_back({l.method, l.event, verify::delta_scores(h.scores, l.scores)});
    }
    return rows;
}

ResolutionComparison run_experiment2(const ExperimentConfig& low, const ExperimentConfig& high,
                                     const Progress& progress) {
    low.validate();
    high.validate();
    if (low.methods != high.methods) throw InvalidInput("both resolutions must use the same methods");
    say(progress, "loading data at " + std::to_string(low.resolution) + " and " + std::to_string(high.resolution));
    const auto low_data = load_experiment_data(low);
    const auto high_data = load_experiment_data(high);
    if (low_data.timestamps != high_data.timestamps)
        throw AlignmentError("the two resolutions do not cover the same timestamps");
    if (!(low_data.labels == high_data.labels)) throw AlignmentError("the two resolutions carry different labels");
    ResolutionComparison out;
    say(progress, "resolution " + std::to_string(low.resolution));
    out.low = run_experiment1(low, low_data, nullptr, progress);
    say(progress, "resolution " + std::to_string(high.resolution));
    out.high = run_experiment1(high, high_data, nullptr, progress);
    out.low.experiment = out.high.experiment = "exp2";
    out.deltas = compare_reports(out.low, out.high);
    return out;
}

RunReport run_experiment3(const ExperimentConfig& cfg, const Progress& progress) {
    cfg.validate();
    if (cfg.uses("imported"))
        throw InvalidInput("experiment 3 sweeps learned latent sizes; imported features have a fixed size");
    return run_experiment3(cfg, load_experiment_data(cfg), progress);
}

RunReport run_experiment3(const ExperimentConfig& cfg, const ExperimentData& data, const Progress& progress) {
    cfg.validate();
    if (cfg.uses("imported"))
        throw InvalidInput("experiment 3 sweeps learned latent sizes; imported features have a fixed size");
    if (data.resolution != cfg.resolution) throw InvalidInput("data resolution does not match the config");
    std::vector<std::size_t> dims = cfg.latent_dims;
    std::sort(dims.begin(), dims.end());
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (!is_power_of_two(dims[i]) || dims[i] < 4 || dims[i] > 2048)
            throw InvalidInput("sweep dims must be powers of two from 4 to 2048 (got " + std::to_string(dims[i]) + ")");
        if (i > 0 && dims[i] == dims[i - 1]) throw InvalidInput("sweep dim " + std::to_string(dims[i]) + " repeated");
    }
    RunReport report;
    report.experiment = "exp3";
    report.config = cfg;
    for (const auto& method : cfg.methods) {
        if (method == "pca") {
            // One fit at the largest size; smaller sizes keep its leading axes.
            say(progress, "learning pca at d=" + std::to_string(dims.back()));
            pca::PcaModel full;
            const auto learned = learn_pca(data, dims.back(), cfg, &full);
            for (std::size_t d : dims) {
                const auto m = full.truncated(d);
                report.timings.push_back({"pca", d, learned.timing.learn_seconds, pca::serialize(m).size()});
                report.pca_rmse.emplace_back(d, pca::reconstruction_rmse(m, data.x));
                say(progress, "classifying pca d=" + std::to_string(d));
                auto entries = evaluate_features("pca", learned.z.col_block(0, d), data.labels, cfg);
                report.entries.insert(report.entries.end(), entries.begin(), entries.end());
            }
        } else {
            for (std::size_t d : dims) {
                say(progress, "learning cae at d=" + std::to_string(d));
                const auto learned = learn_cae(data, d, cfg, nullptr, progress);
                report.timings.push_back(learned.timing);
                auto entries = evaluate_features("cae", learned.z, data.labels, cfg);
                report.entries.insert(report.entries.end(), entries.begin(), entries.end());
            }
        }
    }
    return report;
}

}  // namespace gridrep::pipeline
