#include "gridrep/ingest/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gridrep/core/rng.hpp"
#include "gridrep/error.hpp"

namespace gridrep::ingest {

namespace {

constexpr std::size_t kLattice = 6;
constexpr std::size_t kCells = 10;

// Every parameter is drawn on every day, whatever the labels, so the stream
// layout never depends on which events happen.
struct DayScene {
    std::array<int, 5> flags{};
    double base = 0.0;
    double lattice[kLattice][kLattice] = {};
    double vx = 0, vy = 0, vr = 0, vamp = 0, vphase = 0;        // vortex
    double fx = 0, fy = 0, fangle = 0, fwidth = 0, famp = 0;    // frontal band
    double ne_amp = 0, swf_amp = 0;                             // ramps
    double cx[kCells] = {}, cy[kCells] = {}, cs[kCells] = {}, ca[kCells] = {};  // convective cells

    void draw(SeededRng& rng) {
        base = rng.uniform(0.12, 0.22);
        for (auto& row : lattice)
            for (double& v : row) v = rng.uniform();
        vx = rng.uniform(0.45, 0.85);
        vy = rng.uniform(0.50, 0.85);
        vr = rng.uniform(0.04, 0.07);
        vamp = rng.uniform(0.45, 0.60);
        vphase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        fx = rng.uniform(0.35, 0.60);
        fy = rng.uniform(0.45, 0.65);
        fangle = rng.uniform(20.0, 45.0) * std::numbers::pi / 180.0;
        fwidth = rng.uniform(0.02, 0.04);
        famp = rng.uniform(0.30, 0.45);
        ne_amp = rng.uniform(0.15, 0.25);
        swf_amp = rng.uniform(0.15, 0.25);
        for (std::size_t i = 0; i < kCells; ++i) {
            cx[i] = rng.uniform(0.15, 0.65);
            cy[i] = rng.uniform(0.35, 0.80);
            cs[i] = rng.uniform(0.015, 0.03);
            ca[i] = rng.uniform(0.25, 0.45);
        }
    }

    // Brightness at (u east, v south) in the unit square.
    double at(double u, double v) const {
        const double gu = u * (kLattice - 1), gv = v * (kLattice - 1);
        const std::size_t iu = std::min<std::size_t>(static_cast<std::size_t>(gu), kLattice - 2);
        const std::size_t iv = std::min<std::size_t>(static_cast<std::size_t>(gv), kLattice - 2);
        const double tu = gu - iu, tv = gv - iv;
        const double smooth = (1 - tv) * ((1 - tu) * lattice[iv][iu] + tu * lattice[iv][iu + 1]) +
                              tv * ((1 - tu) * lattice[iv + 1][iu] + tu * lattice[iv + 1][iu + 1]);
        double b = base + 0.12 * smooth;

        if (flags[4]) {  // NWPTC: bright core with two spiral arms
            const double dx = u - vx, dy = v - vy;
            const double r = std::sqrt(dx * dx + dy * dy);
            const double theta = std::atan2(dy, dx);
            b += vamp * std::exp(-r * r / (2 * vr * vr));
            b += 0.25 * std::exp(-r / 0.12) * (0.5 + 0.5 * std::cos(2 * theta - 18 * r + vphase));
        }
        if (flags[0]) {  // FT: SW-NE band
            const double d = (u - fx) * std::sin(fangle) + (v - fy) * std::cos(fangle);
            b += famp * std::exp(-d * d / (2 * fwidth * fwidth));
        }
        if (flags[1]) b += ne_amp * u;   // NE: brighter toward the east
        if (flags[2]) b += swf_amp * v;  // SWF: brighter toward the south
        if (flags[3]) {                  // HR: scattered convective cells
            for (std::size_t i = 0; i < kCells; ++i) {
                const double dx = u - cx[i], dy = v - cy[i];
                b += ca[i] * std::exp(-(dx * dx + dy * dy) / (2 * cs[i] * cs[i]));
            }
        }
        return b;
    }
};

}  // namespace

SyntheticData generate_synthetic(std::size_t n_days, std::size_t resolution, std::uint64_t seed) {
    if (n_days < 20) throw InvalidInput("synthetic data needs at least 20 days");
    if (resolution != 64 && resolution != 128 && resolution != 256 && resolution != 512) {
        throw InvalidInput("resolution must be 64, 128, 256 or 512, got " + std::to_string(resolution));
    }
    SeededRng root(seed);
    SeededRng label_rng = root.split(1);
    SeededRng scene_rng = root.split(2);

    SyntheticData out;
    out.labels.dates.resize(n_days);
    out.labels.flags.assign(n_days, {});
    for (std::size_t e = 0; e < kEvents.size(); ++e) {
        const auto count = static_cast<std::size_t>(std::llround(kSyntheticFrequencies[e] * static_cast<double>(n_days)));
        std::vector<int> col(n_days, 0);
        std::fill(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(count), 1);
        for (std::size_t i = n_days; i > 1; --i) std::swap(col[i - 1], col[label_rng.below(i)]);
        for (std::size_t d = 0; d < n_days; ++d) out.labels.flags[d][e] = col[d];
    }

    const GridBox box{0.0, 60.0, 100.0, 160.0};
    out.frames.reserve(n_days);
    for (std::size_t d = 0; d < n_days; ++d) {
        const std::string ts = daily_timestamp(static_cast<int>(d));
        out.labels.dates[d] = ts.substr(0, 10);
        SeededRng day_rng = scene_rng.split(d);
        DayScene scene;
        scene.flags = out.labels.flags[d];
        scene.draw(day_rng);
        SeededRng pixel_rng = day_rng.split(resolution);

        GridFrame f;
        f.timestamp = ts;
        f.box = box;
        f.height = f.width = resolution;
        f.values.resize(resolution * resolution);
        for (std::size_t r = 0; r < resolution; ++r) {
            const double v = (static_cast<double>(r) + 0.5) / static_cast<double>(resolution);
            for (std::size_t c = 0; c < resolution; ++c) {
                const double u = (static_cast<double>(c) + 0.5) / static_cast<double>(resolution);
                const double val = scene.at(u, v) + 0.03 * pixel_rng.normal();
                f.values[r * resolution + c] = static_cast<float>(std::clamp(val, 0.0, 1.0));
            }
        }
        out.frames.push_back(std::move(f));
    }
    return out;
}

}  // namespace gridrep::ingest
