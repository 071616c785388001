#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "gridrep/core/rng.hpp"
#include "gridrep/core/text.hpp"
#include "gridrep/error.hpp"
#include "gridrep/verify/charts.hpp"
#include "gridrep/verify/scores.hpp"
#include "xml_check.hpp"

using namespace gridrep;
using namespace gridrep::verify;

namespace {

bool near(const std::optional<double>& v, double want, double tol = 1e-12) { return v && std::abs(*v - want) <= tol; }

ContingencyTable count_by_hand(const std::vector<int>& p, const std::vector<int>& o) {
    ContingencyTable t;
    for (std::size_t i = 0; i < p.size(); ++i) {
        t.a += p[i] == 1 && o[i] == 1;
        t.b += p[i] == 1 && o[i] == 0;
        t.c += p[i] == 0 && o[i] == 1;
        t.d += p[i] == 0 && o[i] == 0;
    }
    return t;
}

std::vector<int> random_bits(std::size_t n, double rate, SeededRng& rng) {
    std::vector<int> v(n);
    for (int& b : v) b = rng.uniform() < rate;
    return v;
}

double num(const xmlcheck::Tree& e, const std::string& name) { return std::stod(xmlcheck::attr(e, name)); }

}  // namespace

TEST_CASE("tabulate") {
    std::vector<int> p{1, 0, 1};
    CHECK(tabulate(p, p) == ContingencyTable{2, 0, 0, 1});
    std::vector<int> all(10, 1), half{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
    CHECK(tabulate(all, half) == ContingencyTable{5, 5, 0, 0});
    CHECK(tabulate({}, {}) == ContingencyTable{});
    CHECK_THROWS_AS(tabulate(p, all), InvalidInput);
    std::vector<int> bad{1, 2, 0};
    CHECK_THROWS_AS(tabulate(bad, p), InvalidInput);

    SeededRng rng(4);
    auto pr = random_bits(500, 0.4, rng), ob = random_bits(500, 0.3, rng);
    CHECK(tabulate(pr, ob) == count_by_hand(pr, ob));
    CHECK(tabulate(pr, ob).total() == 500);
}

TEST_CASE("scores on hand cases") {
    Scores perfect = scores({7, 0, 0, 3});
    CHECK(near(perfect.pod, 1.0));
    CHECK(near(perfect.far, 0.0));
    CHECK(near(perfect.sr, 1.0));
    CHECK(near(perfect.bias, 1.0));
    CHECK(near(perfect.csi, 1.0));

    Scores s = scores({40, 20, 10, 30});
    CHECK(near(s.pod, 0.8));
    CHECK(near(s.far, 1.0 / 3.0));
    CHECK(near(s.sr, 2.0 / 3.0));
    CHECK(near(s.bias, 1.2));
    CHECK(near(s.csi, 4.0 / 7.0));

    // Always-yes: every sample is a hit or a false alarm, so CSI is the event frequency.
    SeededRng rng(12);
    auto obs = random_bits(1000, 0.48, rng);
    std::vector<int> yes(obs.size(), 1);
    const double freq = static_cast<double>(std::count(obs.begin(), obs.end(), 1)) / obs.size();
    CHECK(near(scores(tabulate(yes, obs)).csi, freq));

    Scores empty = scores({});
    CHECK_FALSE(empty.pod);
    CHECK_FALSE(empty.far);
    CHECK_FALSE(empty.sr);
    CHECK_FALSE(empty.bias);
    CHECK_FALSE(empty.csi);

    Scores never = scores({0, 0, 5, 5});
    CHECK(near(never.pod, 0.0));
    CHECK_FALSE(never.far);
    CHECK_FALSE(never.sr);
    CHECK(near(never.bias, 0.0));
    CHECK(near(never.csi, 0.0));

    Scores no_events = scores({0, 4, 0, 6});
    CHECK_FALSE(no_events.pod);
    CHECK_FALSE(no_events.bias);
    CHECK(near(no_events.far, 1.0));
}

TEST_CASE("score invariants on random tables") {
    SeededRng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        ContingencyTable t{1 + rng.below(50), rng.below(50), rng.below(50), rng.below(50)};
        if (trial % 7 == 0) t.b = 0;
        if (trial % 11 == 0) t.c = 0;
        Scores s = scores(t);
        REQUIRE(s.pod);
        REQUIRE(s.sr);
        CHECK(*s.csi <= std::min(*s.pod, *s.sr) + 1e-15);
        CHECK((std::abs(*s.csi - *s.pod) < 1e-15) == (t.b == 0));
        CHECK((std::abs(*s.csi - *s.sr) < 1e-15) == (t.c == 0));
        CHECK(std::abs(*s.sr - (1.0 - *s.far)) < 1e-15);
        CHECK(std::abs(*s.bias - *s.pod / *s.sr) < 1e-12);
    }
}

TEST_CASE("scores are permutation invariant and pool exactly") {
    SeededRng rng(5);
    auto p = random_bits(300, 0.5, rng), o = random_bits(300, 0.35, rng);
    std::vector<std::size_t> perm(p.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<int> pp, op;
    for (auto i : perm) {
        pp.push_back(p[i]);
        op.push_back(o[i]);
    }
    CHECK(scores(tabulate(pp, op)) == scores(tabulate(p, o)));

    ContingencyTable pooled;
    for (std::size_t start = 0; start < p.size(); start += 30) {
        std::vector<int> fp(p.begin() + start, p.begin() + start + 30), fo(o.begin() + start, o.begin() + start + 30);
        pooled += tabulate(fp, fo);
    }
    CHECK(pooled == tabulate(p, o));
}

TEST_CASE("delta scores") {
    Scores s = scores({40, 20, 10, 30});
    ScoreDelta same = delta_scores(s, s);
    for (const auto* m : {&same.pod, &same.far, &same.sr, &same.bias, &same.csi}) {
        CHECK(near(m->value, 0.0, 0.0));
        CHECK_FALSE(m->improved);
    }

    Scores low;
    low.pod = 0.6;
    low.far = 0.30;
    low.sr = 0.70;
    low.bias = 1.4;
    low.csi = 0.40;
    Scores high = low;
    *high.csi += 0.05;
    *high.far -= 0.02;
    *high.sr += 0.02;
    high.bias = 0.9;
    ScoreDelta d = delta_scores(high, low);
    CHECK(near(d.csi.value, 0.05, 1e-15));
    CHECK(d.csi.improved);
    CHECK(near(d.far.value, -0.02, 1e-15));
    CHECK(d.far.improved);
    CHECK(d.sr.improved);
    CHECK_FALSE(d.pod.improved);
    CHECK(d.bias.improved);  // 0.9 is closer to 1 than 1.4

    high.pod.reset();
    ScoreDelta na = delta_scores(high, low);
    CHECK_FALSE(na.pod.value);
    CHECK_FALSE(na.pod.improved);
}

TEST_CASE("scores csv") {
    std::vector<ScoreRow> rows{{"pca", "FT", scores({40, 20, 10, 30})}, {"cae", "HR", scores({0, 0, 5, 5})}};
    CHECK(scores_csv(rows) ==
          "method,event,pod,far,sr,bias,csi\n"
          "pca,FT,0.800000,0.333333,0.666667,1.200000,0.571429\n"
          "cae,HR,0.000000,NA,NA,0.000000,0.000000\n");
    CHECK_THROWS_AS(write_scores_csv(rows, "/nonexistent/dir/scores.csv"), IoError);
}

TEST_CASE("performance diagram") {
    std::vector<DiagramPoint> pts;
    const char* events[] = {"FT", "NE", "SWF", "HR", "NWPTC"};
    SeededRng rng(6);
    for (const char* m : {"pca", "cae"})
        for (const char* e : events) pts.push_back({rng.uniform(), rng.uniform(), e, m});
    pts.push_back({1.0, 1.0, "FT", "imported"});
    pts.push_back({0.37, 0.37, "NE", "imported"});
    const std::string svg = performance_diagram_svg(pts, "Experiment 1");
    REQUIRE(xmlcheck::well_formed(svg));
    CHECK(svg == performance_diagram_svg(pts, "Experiment 1"));

    auto groups = xmlcheck::find(svg, "g", "point");
    REQUIRE(groups.size() == pts.size());
    std::map<std::string, std::string> shape_of, color_of;
    for (const auto& g : groups) {
        const auto ev = xmlcheck::attr(g, "data-event"), me = xmlcheck::attr(g, "data-method");
        auto [it, fresh] = shape_of.emplace(ev, xmlcheck::attr(g, "data-shape"));
        CHECK(it->second == xmlcheck::attr(g, "data-shape"));
        auto [jt, fresh2] = color_of.emplace(me, xmlcheck::attr(g, "data-color"));
        CHECK(jt->second == xmlcheck::attr(g, "data-color"));
        (void)fresh;
        (void)fresh2;
    }
    std::set<std::string> shapes, colors;
    for (auto& [k, v] : shape_of) shapes.insert(v);
    for (auto& [k, v] : color_of) colors.insert(v);
    CHECK(shapes.size() == 5);
    CHECK(colors.size() == 3);

    CHECK(xmlcheck::find(svg, "polyline", "csi-contour").size() == 9);
    CHECK(xmlcheck::find(svg, "line", "bias-ray").size() == 9);

    // Plot box is x 80..640, y 60..620: (sr=1, pod=1) is the top-right corner.
    auto perfect = xmlcheck::find(svg, "g", "point")[10].get_child("circle");
    CHECK(num(perfect, "cx") == doctest::Approx(640.0));
    CHECK(num(perfect, "cy") == doctest::Approx(60.0));
    // pod = sr lands on the bias-1 ray from (80, 620) to (640, 60).
    auto diag = xmlcheck::find(svg, "g", "point")[11].get_child("rect");
    const double cx = num(diag, "x") + num(diag, "width") / 2, cy = num(diag, "y") + num(diag, "height") / 2;
    CHECK(cx - 80.0 == doctest::Approx(620.0 - cy).epsilon(1e-3));
    for (const auto& ray : xmlcheck::find(svg, "line", "bias-ray")) {
        if (xmlcheck::attr(ray, "data-bias") != "1") continue;
        CHECK(num(ray, "x2") == doctest::Approx(640.0));
        CHECK(num(ray, "y2") == doctest::Approx(60.0));
    }

    CHECK_THROWS_AS(performance_diagram_svg({{1.2, 0.5, "FT", "pca"}}), InvalidInput);
    CHECK_THROWS_AS(render_performance_diagram(pts, "/nonexistent/dir/x.svg"), IoError);
    CHECK(xmlcheck::well_formed(performance_diagram_svg({})));
    CHECK(xmlcheck::well_formed(performance_diagram_svg({{0.5, 0.5, "a<b&\"c\"", "m'1"}})));
}

TEST_CASE("sweep chart") {
    std::vector<SweepSeries> one{{"pca", {0.5}, {0.6}, {0.2}}};
    const std::string single = sweep_chart_svg({64}, one, "FT");
    CHECK(xmlcheck::well_formed(single));
    CHECK(xmlcheck::find(single, "circle", "series").size() == 3);

    std::vector<std::size_t> dims;
    for (std::size_t d = 4; d <= 2048; d *= 2) dims.push_back(d);
    SweepSeries pca{"pca", {}, {}, {}}, cae{"cae", {}, {}, {}};
    SeededRng rng(2);
    for (std::size_t i = 0; i < dims.size(); ++i) {
        for (auto* s : {&pca, &cae}) {
            s->csi.push_back(rng.uniform());
            s->pod.push_back(rng.uniform());
            s->far.push_back(i == 3 ? std::optional<double>() : rng.uniform());
        }
    }
    const std::string svg = sweep_chart_svg(dims, {pca, cae}, "HR");
    REQUIRE(xmlcheck::well_formed(svg));
    std::vector<std::size_t> ticks;
    for (const auto& t : xmlcheck::find(svg, "line", "x-tick")) ticks.push_back(std::stoul(xmlcheck::attr(t, "data-dim")));
    CHECK(ticks == dims);

    std::map<std::string, std::set<std::string>> styles;
    for (const auto& p : xmlcheck::find(svg, "polyline", "series")) {
        const std::string st = xmlcheck::attr(p, "style");
        const auto at = st.find("stroke-dasharray:");
        styles[xmlcheck::attr(p, "data-metric")].insert(at == std::string::npos ? "solid" : st.substr(at + 17));
    }
    CHECK(styles["csi"] == std::set<std::string>{"10,4,2,4"});
    CHECK(styles["pod"] == std::set<std::string>{"solid"});
    CHECK(styles["far"] == std::set<std::string>{"6,4"});
    // The missing FAR value splits each FAR line in two.
    std::size_t far_pieces = 0;
    for (const auto& p : xmlcheck::find(svg, "polyline", "series")) far_pieces += xmlcheck::attr(p, "data-metric") == "far";
    CHECK(far_pieces == 4);

    CHECK(svg == sweep_chart_svg(dims, {pca, cae}, "HR"));
    SweepSeries short_series{"pca", {0.1}, {0.1}, {0.1}};
    CHECK_THROWS_AS(sweep_chart_svg(dims, {short_series}), InvalidInput);
    CHECK_THROWS_AS(sweep_chart_svg({8, 4}, {}), InvalidInput);
    CHECK_THROWS_AS(sweep_chart_svg({}, {}), InvalidInput);
}

TEST_CASE("delta chart") {
    std::vector<DeltaRow> rows;
    Scores a = scores({40, 20, 10, 30}), b = scores({45, 10, 5, 40});
    for (const char* m : {"pca", "cae"})
        for (const char* e : {"FT", "NE", "SWF", "HR", "NWPTC"}) rows.push_back({m, e, delta_scores(b, a)});
    rows.push_back({"imported", "FT", delta_scores(scores({}), a)});
    const std::string svg = delta_chart_svg(rows, "64 vs 128");
    REQUIRE(xmlcheck::well_formed(svg));
    CHECK(xmlcheck::find(svg, "rect", "delta").size() == 10 * 4);
    CHECK(xmlcheck::find(svg, "text", "delta").size() == 4);
    for (const auto& r : xmlcheck::find(svg, "rect", "delta")) CHECK(xmlcheck::attr(r, "data-improved") == "1");
    CHECK(svg == delta_chart_svg(rows, "64 vs 128"));
}

TEST_CASE("number formatting") {
    CHECK(text::fixed(-0.0001, 2) == "0.00");
    CHECK(text::fixed(-0.006, 2) == "-0.01");
    CHECK(text::fixed_or_na(std::nullopt, 3) == "NA");
    CHECK(text::split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(text::trim("  x y \r\n") == "x y");
}
