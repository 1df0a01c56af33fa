#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "calibkit/binning.hpp"
#include "calibkit/estimator.hpp"
#include "calibkit/io.hpp"
#include "calibkit/lens.hpp"

// End-to-end checks of the installed binary: exit codes, restriction
// semantics, report shapes.

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "calibkit-cli-tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cli(const std::string& args) {
    const std::string command =
        std::string(CALIBKIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string table1() { return std::string(CALIBKIT_TEST_DATA_DIR) + "/table1.csv"; }

}  // namespace

TEST_CASE("cli exit codes: success, input error, alpha trigger") {
    CHECK(run_cli("evaluate --input " + table1() + " --json " +
                  (scratch_dir() / "ok.json").string()) == 0);
    CHECK(run_cli("evaluate --input /no/such/file.csv") == 1);
    CHECK(run_cli("evaluate --input " + table1() + " --bins nope:3") == 1);
    CHECK(run_cli("evaluate --input " + table1() + " --lens topk:9") == 1);
    // configuration mismatch (1-D bins on 3-class data) is an input error too
    CHECK(run_cli("evaluate --input " + table1() + " --lens canonical --bins equal:10") == 1);

    // grossly miscalibrated data trips a small alpha with exit 3
    const fs::path bad_csv = scratch_dir() / "bad.csv";
    {
        std::ofstream out(bad_csv);
        out << "p0,p1,label\n";
        for (int i = 0; i < 400; ++i) {
            out << "0.9,0.1,1\n";
        }
    }
    CHECK(run_cli("test --input " + bad_csv.string() +
                  " --lens canonical --bins equal:10 --replicates 99 --seed 4 "
                  "--alpha 0.05") == 3);
    CHECK(run_cli("test --input " + bad_csv.string() +
                  " --lens canonical --bins equal:10 --replicates 99 --seed 4") == 0);
}

TEST_CASE("cli restriction matches the library-side conditional estimate") {
    const fs::path sim_csv = scratch_dir() / "restrict_sim.csv";
    REQUIRE(run_cli("simulate --beta0 1 --beta1 1 --n 4000 --seed 31 --output " +
                    sim_csv.string()) == 0);

    const fs::path json_path = scratch_dir() / "restrict_eval.json";
    REQUIRE(run_cli("evaluate --input " + sim_csv.string() +
                    " --lens canonical --bins equal:10 --distance tv "
                    "--restrict bins:4,5,6 --json " +
                    json_path.string()) == 0);
    const auto doc = nlohmann::json::parse(read_file(json_path));

    // independent route: load, bin, filter, estimate
    const calibkit::LabeledDataset data =
        calibkit::parse_dataset_file(sim_csv.string(), "csv").data;
    const calibkit::Partition bins = calibkit::build_equal_bins_1d(10);
    const std::set<int> keep = {4, 5, 6};
    calibkit::LabeledDataset filtered;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (keep.count(bins.assign(data.predictions[i])) != 0) {
            filtered.predictions.push_back(data.predictions[i]);
            filtered.labels.push_back(data.labels[i]);
        }
    }
    REQUIRE(!filtered.predictions.empty());
    const double expected =
        calibkit::expected_miscalibration(filtered, bins, calibkit::Distance::TotalVariation)
            .eta_hat;

    CHECK(doc["eta_hat"].get<double>() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(doc["n"].get<long>() == static_cast<long>(filtered.size()));
    CHECK(doc["n_total"].get<long>() == 4000);
    // conditional weights renormalize over the kept rows
    double p_total = 0.0;
    for (const auto& bin : doc["bins"]) {
        p_total += bin["p_hat"].get<double>();
    }
    CHECK(p_total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cli compare report carries both observed values and both p-values") {
    const fs::path a_csv = scratch_dir() / "cmp_a.csv";
    const fs::path b_csv = scratch_dir() / "cmp_b.csv";
    REQUIRE(run_cli("simulate --beta0 1 --beta1 1 --n 1500 --seed 5 --output " +
                    a_csv.string()) == 0);
    REQUIRE(run_cli("simulate --beta0 0 --beta1 -2 --n 1500 --seed 6 --output " +
                    b_csv.string()) == 0);
    const fs::path json_path = scratch_dir() / "cmp.json";
    REQUIRE(run_cli("compare " + a_csv.string() + " " + b_csv.string() +
                    " --lens max --bins equal:10 --replicates 120 --seed 8 --json " +
                    json_path.string()) == 0);
    const auto doc = nlohmann::json::parse(read_file(json_path));
    REQUIRE(doc["models"].size() == 2);
    for (const auto& model : doc["models"]) {
        CHECK(model.contains("eta_hat"));
        CHECK(model.contains("p_value"));
    }
    CHECK(doc["cross"].contains("p_null_a_geq_observed_b"));
    CHECK(doc["cross"].contains("p_null_b_geq_observed_a"));
    CHECK(doc.contains("note"));
    // the uncalibrated model rejects, the near-perfect one does not
    CHECK(doc["models"][0]["p_value"].get<double>() <= 0.05);
    CHECK(doc["models"][1]["p_value"].get<double>() > 0.05);
}

TEST_CASE("CALIBKIT_SEED overrides the default seed only when --seed is absent") {
    const fs::path env_csv = scratch_dir() / "seed_env.csv";
    const fs::path flag_csv = scratch_dir() / "seed_flag.csv";
    const fs::path both_csv = scratch_dir() / "seed_both.csv";
    const fs::path plain_csv = scratch_dir() / "seed_plain.csv";
    REQUIRE(run_cli("simulate --beta0 1 --beta1 1 --n 50 --seed 99 --output " +
                    flag_csv.string()) == 0);
    REQUIRE(std::system((std::string("CALIBKIT_SEED=99 ") + CALIBKIT_CLI_PATH +
                         " simulate --beta0 1 --beta1 1 --n 50 --output " + env_csv.string() +
                         " > /dev/null 2>&1")
                            .c_str()) == 0);
    REQUIRE(std::system((std::string("CALIBKIT_SEED=99 ") + CALIBKIT_CLI_PATH +
                         " simulate --beta0 1 --beta1 1 --n 50 --seed 42 --output " +
                         both_csv.string() + " > /dev/null 2>&1")
                            .c_str()) == 0);
    REQUIRE(run_cli("simulate --beta0 1 --beta1 1 --n 50 --output " + plain_csv.string()) ==
            0);
    CHECK(read_file(env_csv) == read_file(flag_csv));      // env replaces the default
    CHECK(read_file(both_csv) == read_file(plain_csv));    // explicit --seed 42 wins
    CHECK(read_file(env_csv) != read_file(plain_csv));
}

TEST_CASE("cli diagram attaches the analytic deviation curve on request") {
    const fs::path sim_csv = scratch_dir() / "curve_sim.csv";
    REQUIRE(run_cli("simulate --beta0 0 --beta1 -2 --n 2000 --seed 17 --output " +
                    sim_csv.string()) == 0);
    const fs::path json_path = scratch_dir() / "curve_diagram.json";
    REQUIRE(run_cli("diagram --input " + sim_csv.string() +
                    " --lens canonical --bins equal:10 --beta0 0 --beta1 -2 --json " +
                    json_path.string()) == 0);
    const auto doc = nlohmann::json::parse(read_file(json_path));
    CHECK(doc["type"] == "reliability1d");
    REQUIRE(!doc["analytic_deviation"].empty());
    for (const auto& sample : doc["analytic_deviation"]) {
        CHECK(std::abs(sample[1].get<double>()) < 1e-9);  // perfect model: flat curve
    }
}

TEST_CASE("cli jsonl ingestion and group lenses over many classes") {
    const fs::path jsonl = scratch_dir() / "wide.jsonl";
    {
        std::ofstream out(jsonl);
        // five classes collapsing to three groups
        out << R"({"p":[0.4,0.1,0.1,0.2,0.2],"y":0})" << "\n";
        out << R"({"p":[0.1,0.5,0.1,0.2,0.1],"y":1})" << "\n";
        out << R"({"p":[0.1,0.1,0.5,0.2,0.1],"y":2})" << "\n";
        out << R"({"p":[0.2,0.1,0.1,0.5,0.1],"y":3})" << "\n";
        out << R"({"p":[0.2,0.1,0.1,0.1,0.5],"y":4})" << "\n";
    }
    const fs::path json_path = scratch_dir() / "wide_diagram.json";
    REQUIRE(run_cli("diagram --input " + jsonl.string() +
                    " --format jsonl --lens 'groups:0,1|2|3,4' --bins grid:5 --json " +
                    json_path.string()) == 0);
    const auto doc = nlohmann::json::parse(read_file(json_path));
    CHECK(doc["type"] == "reliability_simplex");
    CHECK(doc["labels"].size() == 3);
    CHECK(doc["labels"][0] == "0+1");
}
