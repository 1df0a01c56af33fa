#include <doctest.h>

#include <algorithm>
#include <vector>

#include "calibkit/lens.hpp"
#include "calibkit/rng.hpp"
#include "calibkit/simplex.hpp"

#include "table1_fixture.hpp"

using namespace calibkit;

TEST_CASE("induced predictions match the worked examples") {
    const SimplexVector mu = SimplexVector::validated({0.1, 0.3, 0.6});

    const SimplexVector max1 = Lens::top_k(3, 1).induced_prediction(mu);
    REQUIRE(max1.size() == 2);
    CHECK(max1[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(max1[1] == doctest::Approx(0.6).epsilon(1e-15));

    const SimplexVector grouped =
        Lens::fixed_partition(3, {{0, 1}, {2}}).induced_prediction(mu);
    REQUIRE(grouped.size() == 2);
    CHECK(grouped[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(grouped[1] == doctest::Approx(0.6).epsilon(1e-15));

    const SimplexVector top2 = Lens::top_k(3, 2).induced_prediction(mu);
    REQUIRE(top2.size() == 3);
    CHECK(top2[0] == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(top2[1] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(top2[2] == doctest::Approx(0.3).epsilon(1e-15));

    CHECK(Lens::canonical(3).induced_prediction(mu) == mu);
}

TEST_CASE("induced outcomes match the worked examples") {
    const SimplexVector mu = SimplexVector::validated({0.1, 0.3, 0.6});
    const Lens max_lens = Lens::top_k(3, 1);
    CHECK(max_lens.induced_outcome(2, mu) == 1);
    CHECK(max_lens.induced_outcome(0, mu) == 0);
    CHECK(max_lens.induced_outcome(1, mu) == 0);
    CHECK(Lens::fixed_partition(3, {{0, 1}, {2}}).induced_outcome(1, mu) == 0);
    CHECK(Lens::canonical(3).induced_outcome(1, mu) == 1);
    CHECK_THROWS_AS(max_lens.induced_outcome(3, mu), LabelOutOfRange);
}

TEST_CASE("top-k ties break toward the lowest class index") {
    const SimplexVector mu = SimplexVector::validated({0.4, 0.4, 0.2});
    const Lens max_lens = Lens::top_k(3, 1);
    CHECK(max_lens.induced_outcome(0, mu) == 1);  // class 0 wins the tie
    CHECK(max_lens.induced_outcome(1, mu) == 0);
    const SimplexVector induced = max_lens.induced_prediction(mu);
    CHECK(induced[1] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("lens constructors validate their configuration") {
    CHECK_THROWS_AS(Lens::top_k(3, 0), ParseError);
    CHECK_THROWS_AS(Lens::top_k(3, 3), ParseError);
    CHECK_THROWS_AS(Lens::fixed_partition(3, {{0, 1}}), ParseError);        // class 2 missing
    CHECK_THROWS_AS(Lens::fixed_partition(3, {{0, 1}, {1, 2}}), ParseError);  // overlap
    CHECK_THROWS_AS(Lens::fixed_partition(3, {{0, 1}, {2, 5}}), LabelOutOfRange);
}

TEST_CASE("apply_lens on the Table-1 fixture under the max lens") {
    const LabeledDataset data = testutil::table1_fixture();
    const LabeledDataset induced = Lens::top_k(3, 1).apply(data);
    REQUIRE(induced.size() == 60);
    long ones = 0;
    for (std::size_t i = 0; i < induced.size(); ++i) {
        CHECK(induced.predictions[i][0] == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(induced.predictions[i][1] == doctest::Approx(0.6).epsilon(1e-15));
        ones += induced.labels[i];
    }
    CHECK(ones == 36);
}

TEST_CASE("degenerate one-group partition collapses everything") {
    const LabeledDataset data = testutil::table1_fixture();
    const LabeledDataset induced = Lens::fixed_partition(3, {{0, 1, 2}}).apply(data);
    for (std::size_t i = 0; i < induced.size(); ++i) {
        REQUIRE(induced.predictions[i].size() == 1);
        CHECK(induced.predictions[i][0] == 1.0);
        CHECK(induced.labels[i] == 0);
    }
}

TEST_CASE("canonical lens is the identity on datasets") {
    const LabeledDataset data = testutil::table1_fixture();
    const LabeledDataset induced = Lens::canonical(3).apply(data);
    CHECK(induced.predictions == data.predictions);
    CHECK(induced.labels == data.labels);
}

// Pushforward property: the exhaustive label distribution of psi(Y', mu)
// with Y' ~ mu equals the induced prediction. This is the definition the
// resampling shortcut relies on.
TEST_CASE("induced prediction is the pushforward of the outcome map") {
    CounterRng rng(23u);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 3 + static_cast<int>(rng.next_index(4));
        std::vector<double> raw(static_cast<std::size_t>(m));
        double sum = 0.0;
        for (double& x : raw) {
            x = -std::log(1.0 - rng.next_double());
            sum += x;
        }
        for (double& x : raw) x /= sum;
        const SimplexVector mu = SimplexVector::validated(raw);

        std::vector<Lens> lenses;
        lenses.push_back(Lens::canonical(m));
        lenses.push_back(Lens::top_k(m, 1 + static_cast<int>(rng.next_index(
                                            static_cast<std::uint64_t>(m - 1)))));
        std::vector<std::vector<int>> groups(2);
        for (int c = 0; c < m; ++c) {
            groups[static_cast<std::size_t>(c % 2)].push_back(c);
        }
        lenses.push_back(Lens::fixed_partition(m, groups));

        for (const Lens& lens : lenses) {
            const SimplexVector induced = lens.induced_prediction(mu);
            std::vector<double> pushforward(induced.size(), 0.0);
            for (int y = 0; y < m; ++y) {
                pushforward[static_cast<std::size_t>(lens.induced_outcome(y, mu))] +=
                    mu[static_cast<std::size_t>(y)];
            }
            for (std::size_t z = 0; z < induced.size(); ++z) {
                CHECK(induced[z] == doctest::Approx(pushforward[z]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("mass conservation for grouped and top-k predictions") {
    CounterRng rng(29u);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> raw(5);
        double sum = 0.0;
        for (double& x : raw) {
            x = -std::log(1.0 - rng.next_double());
            sum += x;
        }
        for (double& x : raw) x /= sum;
        const SimplexVector mu = SimplexVector::validated(raw);

        const SimplexVector grouped =
            Lens::fixed_partition(5, {{0, 2}, {1}, {3, 4}}).induced_prediction(mu);
        double total = 0.0;
        for (std::size_t z = 0; z < grouped.size(); ++z) total += grouped[z];
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

        const SimplexVector topped = Lens::top_k(5, 2).induced_prediction(mu);
        CHECK(topped[0] ==
              doctest::Approx(1.0 - topped[1] - topped[2]).epsilon(1e-12));
    }
}

TEST_CASE("class-permutation equivariance without ties") {
    const std::vector<int> perm = {2, 0, 3, 1};  // image of each class
    CounterRng rng(31u);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> raw = {0.1, 0.2, 0.3, 0.4};
        // jitter keeps components distinct
        for (double& x : raw) x += 1e-3 * rng.next_double();
        double sum = 0.0;
        for (double x : raw) sum += x;
        for (double& x : raw) x /= sum;

        LabeledDataset data;
        for (int y = 0; y < 4; ++y) {
            data.predictions.push_back(SimplexVector::validated(raw));
            data.labels.push_back(y);
        }
        LabeledDataset permuted;
        for (std::size_t i = 0; i < data.size(); ++i) {
            std::vector<double> comps(4);
            for (int c = 0; c < 4; ++c) {
                comps[static_cast<std::size_t>(perm[static_cast<std::size_t>(c)])] =
                    data.predictions[i][static_cast<std::size_t>(c)];
            }
            permuted.predictions.push_back(SimplexVector::validated(comps));
            permuted.labels.push_back(perm[static_cast<std::size_t>(data.labels[i])]);
        }

        const std::vector<std::vector<int>> groups = {{0, 1}, {2, 3}};
        std::vector<std::vector<int>> mapped_groups;
        for (const auto& group : groups) {
            std::vector<int> mapped;
            for (int c : group) mapped.push_back(perm[static_cast<std::size_t>(c)]);
            mapped_groups.push_back(mapped);
        }
        const LabeledDataset a = Lens::fixed_partition(4, groups).apply(data);
        const LabeledDataset b = Lens::fixed_partition(4, mapped_groups).apply(permuted);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.labels[i] == b.labels[i]);
            for (std::size_t z = 0; z < 2; ++z) {
                CHECK(a.predictions[i][z] == doctest::Approx(b.predictions[i][z]).epsilon(1e-12));
            }
        }

        const LabeledDataset ta = Lens::top_k(4, 2).apply(data);
        const LabeledDataset tb = Lens::top_k(4, 2).apply(permuted);
        for (std::size_t i = 0; i < ta.size(); ++i) {
            CHECK(ta.labels[i] == tb.labels[i]);
            for (std::size_t z = 0; z < 3; ++z) {
                CHECK(ta.predictions[i][z] ==
                      doctest::Approx(tb.predictions[i][z]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("lens spec grammar round-trips") {
    CHECK(parse_lens("canonical", 3).spec() == "canonical");
    CHECK(parse_lens("max", 3).spec() == "max");
    CHECK(parse_lens("topk:2", 3).spec() == "topk:2");
    CHECK(parse_lens("groups:0,1|2", 3).spec() == "groups:0,1|2");
    CHECK(parse_lens("max", 3).induced_classes() == 2);
    CHECK(parse_lens("topk:2", 4).induced_classes() == 3);
    CHECK_THROWS_AS(parse_lens("nope", 3), ParseError);
    CHECK_THROWS_AS(parse_lens("topk:x", 3), ParseError);
    CHECK_THROWS_AS(parse_lens("groups:0|1", 3), ParseError);  // class 2 missing
}
