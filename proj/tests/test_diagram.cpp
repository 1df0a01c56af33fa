#include <doctest.h>

#include <cmath>
#include <string>

#include "calibkit/diagram.hpp"
#include "calibkit/gmm.hpp"
#include "calibkit/lens.hpp"
#include "calibkit/svg.hpp"

#include "table1_fixture.hpp"

using namespace calibkit;

namespace {

LabeledDataset matched_binary_bin() {
    // ten rows predicting 0.7 for the positive class, 7 of them positive:
    // the bin is perfectly matched
    LabeledDataset data;
    const SimplexVector pred = SimplexVector::validated({0.3, 0.7});
    for (int i = 0; i < 10; ++i) {
        data.predictions.push_back(pred);
        data.labels.push_back(i < 7 ? 1 : 0);
    }
    return data;
}

}  // namespace

TEST_CASE("1-D diagram: matched bin has zero deviation") {
    const Diagram1D diagram = build_diagram_1d(matched_binary_bin(), build_equal_bins_1d(10));
    REQUIRE(diagram.marks.size() == 1);
    CHECK(diagram.marks[0].bin == 7);
    CHECK(std::abs(diagram.marks[0].deviation) < 1e-12);
    long total = 0;
    for (long c : diagram.histogram) total += c;
    CHECK(total == diagram.n);
}

TEST_CASE("1-D diagram: 0.7 prediction with 0.6 hit rate deviates by -0.1") {
    LabeledDataset data;
    const SimplexVector pred = SimplexVector::validated({0.3, 0.7});
    for (int i = 0; i < 10; ++i) {
        data.predictions.push_back(pred);
        data.labels.push_back(i < 6 ? 1 : 0);
    }
    const Diagram1D diagram = build_diagram_1d(data, build_equal_bins_1d(10));
    REQUIRE(diagram.marks.size() == 1);
    CHECK(diagram.marks[0].g_hat == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(diagram.marks[0].deviation == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("1-D diagram deviation equals the estimator's r_hat - g_hat") {
    CounterRng rng(71u);
    const LabeledDataset data = gmm_dataset(GmmModel::perfect(), 3000, rng);
    const Partition bins = build_equal_bins_1d(12);
    const Diagram1D diagram = build_diagram_1d(data, bins);
    const auto summaries = bin_statistics(data, bins);
    for (const auto& mark : diagram.marks) {
        const BinSummary& s = summaries[static_cast<std::size_t>(mark.bin)];
        CHECK(mark.deviation == s.r_hat->tracked() - s.g_hat->tracked());
        CHECK(mark.g_hat == s.g_hat->tracked());
        CHECK(mark.count == s.count);
    }
}

TEST_CASE("1-D diagram: GMM constant model stays inside the binomial envelope") {
    CounterRng rng(2718u);
    const LabeledDataset data = gmm_dataset(GmmModel::calibrated_constant(), 10000, rng);
    const Diagram1D diagram = build_diagram_1d(data, build_equal_bins_1d(1));
    REQUIRE(diagram.marks.size() == 1);
    CHECK(std::abs(diagram.marks[0].deviation) <= 0.016);
}

TEST_CASE("1-D diagram bands are attached and ordered") {
    CounterRng rng(73u);
    const LabeledDataset data = gmm_dataset(GmmModel::perfect(), 500, rng);
    BandRequest request;
    request.replicates = 100;
    request.seed = 7;
    const Diagram1D diagram =
        build_diagram_1d(data, build_equal_bins_1d(5), request);
    REQUIRE(!diagram.marks.empty());
    for (const auto& mark : diagram.marks) {
        REQUIRE(mark.band.has_value());
        CHECK(mark.band->first <= mark.band->second);
    }
}

TEST_CASE("simplex diagram: Table-1 fixture yields the six exact arrows") {
    const Diagram1D dummy{};  // silence unused-type warnings in some compilers
    (void)dummy;
    const LabeledDataset data = testutil::table1_fixture();
    const DiagramSimplex diagram = build_diagram_simplex(data, build_simplex_grid(10));
    REQUIRE(diagram.arrows.size() == 6);

    bool found_first = false;
    for (const auto& arrow : diagram.arrows) {
        if (std::abs(arrow.tail[0] - 0.1) < 1e-12 && std::abs(arrow.tail[1] - 0.3) < 1e-12) {
            found_first = true;
            CHECK(std::abs(arrow.head[0] - 0.2) < 1e-12);
            CHECK(std::abs(arrow.head[1] - 0.2) < 1e-12);
            CHECK(std::abs(arrow.head[2] - 0.6) < 1e-12);
        }
        double tail_sum = 0.0, head_sum = 0.0;
        for (int c = 0; c < 3; ++c) {
            tail_sum += arrow.tail[static_cast<std::size_t>(c)];
            head_sum += arrow.head[static_cast<std::size_t>(c)];
        }
        CHECK(tail_sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(head_sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(arrow.p_hat == doctest::Approx(1.0 / 6).epsilon(1e-12));
    }
    CHECK(found_first);
}

TEST_CASE("simplex diagram: calibrated fixture has zero-length arrows") {
    LabeledDataset data;
    const SimplexVector pred = SimplexVector::validated({0.2, 0.2, 0.6});
    for (int label = 0; label < 3; ++label) {
        const int counts[3] = {2, 2, 6};
        for (int k = 0; k < counts[label]; ++k) {
            data.predictions.push_back(pred);
            data.labels.push_back(label);
        }
    }
    const DiagramSimplex diagram = build_diagram_simplex(data, build_simplex_grid(10));
    REQUIRE(diagram.arrows.size() == 1);
    for (int c = 0; c < 3; ++c) {
        CHECK(std::abs(diagram.arrows[0].head[static_cast<std::size_t>(c)] -
                       diagram.arrows[0].tail[static_cast<std::size_t>(c)]) < 1e-12);
    }
}

TEST_CASE("simplex diagram: uniform predictions collapse to one arrow") {
    LabeledDataset data;
    const SimplexVector uniform = SimplexVector::validated({1.0 / 3, 1.0 / 3, 1.0 / 3});
    const int counts[3] = {5, 3, 2};
    for (int label = 0; label < 3; ++label) {
        for (int k = 0; k < counts[label]; ++k) {
            data.predictions.push_back(uniform);
            data.labels.push_back(label);
        }
    }
    const DiagramSimplex diagram = build_diagram_simplex(data, build_simplex_grid(5));
    REQUIRE(diagram.arrows.size() == 1);
    CHECK(diagram.arrows[0].head[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(diagram.arrows[0].head[1] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(diagram.arrows[0].head[2] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("rendering is a pure function of diagram and style") {
    const LabeledDataset data = testutil::table1_fixture();
    const DiagramSimplex simplex = build_diagram_simplex(data, build_simplex_grid(10));
    CHECK(render_svg(simplex) == render_svg(simplex));

    const Diagram1D flat = build_diagram_1d(matched_binary_bin(), build_equal_bins_1d(10));
    const std::string svg = render_svg(flat);
    CHECK(svg == render_svg(flat));
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("simplex vertex mapping: class 0 renders at the bottom-left corner") {
    LabeledDataset data;
    data.predictions.push_back(SimplexVector::validated({1.0, 0.0, 0.0}));
    data.labels.push_back(0);
    const DiagramSimplex diagram = build_diagram_simplex(data, build_simplex_grid(1));
    const std::string svg = render_svg(diagram);
    // bottom-left vertex of the 560px canvas with 40px padding
    CHECK(svg.find("x1=\"40.0000\" y1=\"520.0000\"") != std::string::npos);
}

TEST_CASE("diagram dimension checks") {
    const LabeledDataset table1 = testutil::table1_fixture();
    CHECK_THROWS_AS(build_diagram_1d(table1, build_equal_bins_1d(10)), DimensionMismatch);
    CHECK_THROWS_AS(build_diagram_simplex(matched_binary_bin(), build_simplex_grid(5)),
                    DimensionMismatch);
}
