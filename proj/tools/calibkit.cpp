// calibkit: calibration evaluation for probabilistic classifiers from
// recorded (prediction, label) data. Subcommands: evaluate, test, diagram,
// simulate, compare.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "calibkit/diagram.hpp"
#include "calibkit/errors.hpp"
#include "calibkit/estimator.hpp"
#include "calibkit/gmm.hpp"
#include "calibkit/io.hpp"
#include "calibkit/json_report.hpp"
#include "calibkit/lens.hpp"
#include "calibkit/resample.hpp"
#include "calibkit/rng.hpp"
#include "calibkit/svg.hpp"

namespace {

using calibkit::ordered_json;

constexpr std::uint64_t kDefaultSeed = 42;

struct CommonOptions {
    std::string input;
    std::string format = "csv";
    std::string lens_spec = "max";
    std::string bins_spec = "equal:10";
    std::string distance = "tv";
    std::string restrict_spec;
    int replicates = 1000;
    std::uint64_t seed = kDefaultSeed;
    bool seed_given = false;
    bool freeze_bins = false;
    int threads = 0;
    std::string json_path;
    std::string svg_path;
};

// Everything a user can cause with files or flags, as opposed to a defect.
bool is_input_error(const calibkit::CalibrationError& e) {
    return dynamic_cast<const calibkit::ParseError*>(&e) != nullptr ||
           dynamic_cast<const calibkit::RejectedVector*>(&e) != nullptr ||
           dynamic_cast<const calibkit::InconsistentWidth*>(&e) != nullptr ||
           dynamic_cast<const calibkit::LabelOutOfRange*>(&e) != nullptr ||
           dynamic_cast<const calibkit::EmptyDataset*>(&e) != nullptr ||
           dynamic_cast<const calibkit::EmptyInput*>(&e) != nullptr ||
           dynamic_cast<const calibkit::DimensionMismatch*>(&e) != nullptr ||
           dynamic_cast<const calibkit::UnsupportedDimension*>(&e) != nullptr ||
           dynamic_cast<const calibkit::InvalidBinCount*>(&e) != nullptr;
}

std::uint64_t resolve_seed(const CommonOptions& opts) {
    if (opts.seed_given) {
        return opts.seed;
    }
    if (const char* env = std::getenv("CALIBKIT_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::logic_error&) {
            throw calibkit::ParseError(std::string("CALIBKIT_SEED is not an integer: '") +
                                       env + "'");
        }
    }
    return kDefaultSeed;
}

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void add_io_options(CLI::App* cmd, CommonOptions& opts, bool with_input = true) {
    if (with_input) {
        cmd->add_option("--input", opts.input, "Dataset file")->required();
    }
    cmd->add_option("--format", opts.format, "Input format: csv|jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}))
        ->capture_default_str();
    cmd->add_option("--json", opts.json_path, "Write the JSON artifact here (default stdout)");
}

void add_statistic_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--lens", opts.lens_spec,
                    "Lens: canonical|max|topk:K|groups:0,1|2")
        ->capture_default_str();
    cmd->add_option("--bins", opts.bins_spec, "Bins: equal:N|grid:K|data:THRESHOLD")
        ->capture_default_str();
    cmd->add_option("--distance", opts.distance, "Distance: tv|se")
        ->check(CLI::IsMember({"tv", "se"}))
        ->capture_default_str();
    cmd->add_option("--restrict", opts.restrict_spec,
                    "Restrict estimation to bins: bins:i,j,k");
}

void add_resample_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--replicates", opts.replicates, "Resampling replicates B")
        ->capture_default_str();
    cmd->add_option("--seed", opts.seed,
                    "RNG seed (default 42; CALIBKIT_SEED overrides the default)")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    cmd->add_option("--threads", opts.threads,
                    "Worker threads (0 = hardware; results are thread-count independent)");
    cmd->add_flag("--freeze-bins", opts.freeze_bins,
                  "Keep data-dependent bins fixed across replicates");
}

void write_text_artifact(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw calibkit::ParseError("cannot write '" + path + "'");
    }
    out << text;
}

void write_json_artifact(const std::string& path, const ordered_json& doc) {
    write_text_artifact(path, doc.dump(2) + "\n");
}

std::set<int> parse_restrict(const std::string& spec) {
    if (spec.rfind("bins:", 0) != 0) {
        throw calibkit::ParseError("restrict spec '" + spec + "' (expected bins:i,j,k)");
    }
    std::set<int> bins;
    std::stringstream body(spec.substr(5));
    std::string item;
    while (std::getline(body, item, ',')) {
        try {
            bins.insert(std::stoi(item));
        } catch (const std::logic_error&) {
            throw calibkit::ParseError("restrict spec: bad bin index '" + item + "'");
        }
    }
    if (bins.empty()) {
        throw calibkit::ParseError("restrict spec names no bins");
    }
    return bins;
}

struct PreparedData {
    calibkit::LabeledDataset induced;         // after lens and restriction
    calibkit::Partition partition;            // built on the full induced data
    std::vector<std::string> class_names;
    std::string lens_spec;
    int source_classes = 0;
    long total_rows = 0;
};

/// Load, validate, induce, bin, and optionally restrict to a bin subset.
PreparedData prepare(const CommonOptions& opts) {
    calibkit::ParsedDataset parsed = calibkit::parse_dataset_file(opts.input, opts.format);
    const calibkit::Lens lens =
        calibkit::parse_lens(opts.lens_spec, static_cast<int>(parsed.data.num_classes()));
    PreparedData out;
    out.total_rows = static_cast<long>(parsed.data.size());
    out.class_names = std::move(parsed.class_names);
    out.lens_spec = lens.spec();
    out.source_classes = lens.source_classes();
    out.induced = lens.apply(parsed.data);
    const calibkit::BinningSpec bins = calibkit::BinningSpec::parse(opts.bins_spec);
    out.partition = bins.build(out.induced.predictions);

    if (!opts.restrict_spec.empty()) {
        const std::set<int> keep = parse_restrict(opts.restrict_spec);
        calibkit::LabeledDataset filtered;
        for (std::size_t i = 0; i < out.induced.size(); ++i) {
            if (keep.count(out.partition.assign(out.induced.predictions[i])) != 0) {
                filtered.predictions.push_back(out.induced.predictions[i]);
                filtered.labels.push_back(out.induced.labels[i]);
            }
        }
        if (filtered.predictions.empty()) {
            throw calibkit::EmptyDataset("restriction leaves no rows");
        }
        out.induced = std::move(filtered);
    }
    return out;
}

void attach_class_names(ordered_json& doc, const std::vector<std::string>& names) {
    if (!names.empty()) {
        doc["class_names"] = names;
    }
}

int cmd_evaluate(const CommonOptions& opts) {
    const PreparedData prep = prepare(opts);
    calibkit::MiscalibrationReport report = calibkit::expected_miscalibration(
        prep.induced, prep.partition, calibkit::parse_distance(opts.distance));
    report.lens_spec = prep.lens_spec;
    ordered_json doc = calibkit::report_to_json(report);
    doc["n"] = static_cast<long>(prep.induced.size());
    if (!opts.restrict_spec.empty()) {
        doc["restrict"] = opts.restrict_spec;
        doc["n_total"] = prep.total_rows;
    }
    attach_class_names(doc, prep.class_names);
    write_json_artifact(opts.json_path, doc);
    return 0;
}

int cmd_test(const CommonOptions& opts, std::optional<double> alpha) {
    const PreparedData prep = prepare(opts);
    calibkit::ResamplePlan plan;
    plan.replicates = opts.replicates;
    plan.seed = resolve_seed(opts);
    plan.bins = calibkit::BinningSpec::parse(opts.bins_spec);
    plan.policy = opts.freeze_bins ? calibkit::PartitionPolicy::Frozen
                                   : calibkit::PartitionPolicy::RebuildPerReplicate;
    plan.distance = calibkit::parse_distance(opts.distance);
    plan.threads = resolve_threads(opts.threads);
    // prepare() already applied the lens (and any restriction)
    plan.lens = calibkit::Lens::canonical(static_cast<int>(prep.induced.num_classes()));

    const calibkit::TestResult result = calibkit::pvalue_test(prep.induced, plan);
    ordered_json doc = calibkit::test_result_to_json(result, plan, prep.lens_spec);
    doc["n"] = static_cast<long>(prep.induced.size());
    attach_class_names(doc, prep.class_names);
    write_json_artifact(opts.json_path, doc);

    if (alpha && result.p_value <= *alpha) {
        return 3;
    }
    return 0;
}

std::array<std::string, 3> simplex_labels(const calibkit::Lens& lens,
                                          const std::vector<std::string>& names) {
    const auto name_of = [&names](int c) {
        return static_cast<std::size_t>(c) < names.size() ? names[static_cast<std::size_t>(c)]
                                                          : std::to_string(c);
    };
    std::array<std::string, 3> labels;
    if (lens.kind() == calibkit::Lens::Kind::FixedPartition) {
        for (std::size_t g = 0; g < 3; ++g) {
            std::string joined;
            for (std::size_t j = 0; j < lens.groups()[g].size(); ++j) {
                if (j > 0) joined += "+";
                joined += name_of(lens.groups()[g][j]);
            }
            labels[g] = joined;
        }
    } else {
        for (int c = 0; c < 3; ++c) {
            labels[static_cast<std::size_t>(c)] = name_of(c);
        }
    }
    return labels;
}

int cmd_diagram(const CommonOptions& opts, bool bands, std::optional<double> beta0,
                std::optional<double> beta1) {
    const PreparedData prep = prepare(opts);
    const std::size_t m = prep.induced.num_classes();
    ordered_json doc;
    std::string svg;

    if (m == 2) {
        std::optional<calibkit::BandRequest> band_request;
        if (bands) {
            calibkit::BandRequest request;
            request.replicates = opts.replicates;
            request.seed = resolve_seed(opts);
            request.threads = resolve_threads(opts.threads);
            band_request = request;
        }
        std::vector<std::pair<double, double>> curve;
        if (beta0 && beta1 && opts.lens_spec == "canonical") {
            curve = calibkit::gmm_deviation_curve({*beta0, *beta1});
        }
        const calibkit::Diagram1D diagram =
            calibkit::build_diagram_1d(prep.induced, prep.partition, band_request, curve);
        doc = calibkit::diagram_to_json(diagram);
        svg = calibkit::render_svg(diagram);
    } else if (m == 3) {
        if (bands) {
            std::cerr << "note: --bands applies to 1-D diagrams only; ignored\n";
        }
        const calibkit::Lens lens =
            calibkit::parse_lens(prep.lens_spec, prep.source_classes);
        const calibkit::DiagramSimplex diagram = calibkit::build_diagram_simplex(
            prep.induced, prep.partition, simplex_labels(lens, prep.class_names));
        doc = calibkit::diagram_to_json(diagram);
        svg = calibkit::render_svg(diagram);
    } else {
        throw calibkit::UnsupportedDimension(
            "diagram: induced dimension " + std::to_string(m) +
            " (use a lens reducing to 2 or 3 classes)");
    }

    attach_class_names(doc, prep.class_names);
    if (!opts.svg_path.empty()) {
        write_text_artifact(opts.svg_path, svg);
    }
    if (!opts.json_path.empty() || opts.svg_path.empty()) {
        write_json_artifact(opts.json_path, doc);
    }
    return 0;
}

int cmd_simulate(double beta0, double beta1, long n, const CommonOptions& opts,
                 const std::string& output) {
    if (n < 1) {
        throw calibkit::EmptyInput("simulate: --n must be >= 1");
    }
    calibkit::CounterRng rng(resolve_seed(opts));
    const calibkit::LabeledDataset data = calibkit::gmm_dataset({beta0, beta1}, n, rng);
    std::ostringstream out;
    calibkit::write_dataset_csv(out, data);
    write_text_artifact(output, out.str());
    return 0;
}

int cmd_compare(const std::string& input_a, const std::string& input_b,
                const CommonOptions& opts) {
    const char* kNote =
        "Raw eta_hat ordering alone is not a valid model comparison; "
        "the estimator biases and distributions differ across models. "
        "Consult the consistency p-values.";

    ordered_json models = ordered_json::array();
    std::vector<calibkit::TestResult> results;
    for (const std::string& input : {input_a, input_b}) {
        CommonOptions model_opts = opts;
        model_opts.input = input;
        const PreparedData prep = prepare(model_opts);
        calibkit::ResamplePlan plan;
        plan.replicates = opts.replicates;
        plan.seed = resolve_seed(opts);
        plan.bins = calibkit::BinningSpec::parse(opts.bins_spec);
        plan.policy = opts.freeze_bins ? calibkit::PartitionPolicy::Frozen
                                       : calibkit::PartitionPolicy::RebuildPerReplicate;
        plan.distance = calibkit::parse_distance(opts.distance);
        plan.threads = resolve_threads(opts.threads);
        plan.lens = calibkit::Lens::canonical(static_cast<int>(prep.induced.num_classes()));
        const calibkit::TestResult result = calibkit::pvalue_test(prep.induced, plan);
        ordered_json entry;
        entry["input"] = input;
        entry["n"] = static_cast<long>(prep.induced.size());
        entry["eta_hat"] = result.observed;
        entry["p_value"] = result.p_value;
        models.push_back(std::move(entry));
        results.push_back(result);
    }

    ordered_json doc;
    doc["lens"] = opts.lens_spec;
    doc["bins"] = opts.bins_spec;
    doc["distance"] = opts.distance;
    doc["B"] = opts.replicates;
    doc["seed"] = resolve_seed(opts);
    doc["models"] = std::move(models);
    doc["cross"] = ordered_json{
        {"p_null_a_geq_observed_b",
         calibkit::p_value_add_one(results[1].observed, results[0].null_samples)},
        {"p_null_b_geq_observed_a",
         calibkit::p_value_add_one(results[0].observed, results[1].null_samples)}};
    doc["note"] = kNote;
    write_json_artifact(opts.json_path, doc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"calibration evaluation for probabilistic classifiers"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::optional<double> alpha;
    std::optional<double> beta0_opt;
    std::optional<double> beta1_opt;
    bool bands = false;
    double sim_beta0 = 0.0;
    double sim_beta1 = 0.0;
    long sim_n = 10000;
    std::string sim_output;
    std::string compare_a;
    std::string compare_b;

    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Binned expected/worst-case miscalibration report");
    add_io_options(evaluate, opts);
    add_statistic_options(evaluate, opts);

    CLI::App* test = app.add_subcommand(
        "test", "Consistency-resampling p-value test of perfect calibration");
    add_io_options(test, opts);
    add_statistic_options(test, opts);
    add_resample_options(test, opts);
    test->add_option("--alpha", alpha,
                     "Exit with status 3 when p_value <= alpha (JSON unchanged)");

    CLI::App* diagram = app.add_subcommand(
        "diagram", "Reliability diagram (JSON and/or SVG)");
    add_io_options(diagram, opts);
    add_statistic_options(diagram, opts);
    add_resample_options(diagram, opts);
    diagram->add_flag("--bands", bands, "Attach 5%/95% consistency bands");
    diagram->add_option("--svg", opts.svg_path, "Write SVG here");
    diagram->add_option("--beta0", beta0_opt,
                        "Attach the analytic deviation curve of this model (with --beta1)");
    diagram->add_option("--beta1", beta1_opt, "See --beta0");

    CLI::App* simulate = app.add_subcommand(
        "simulate", "Emit a Gaussian-mixture logistic-model dataset as CSV");
    simulate->add_option("--beta0", sim_beta0, "Logistic intercept")->required();
    simulate->add_option("--beta1", sim_beta1, "Logistic slope")->required();
    simulate->add_option("--n", sim_n, "Rows to generate")->capture_default_str();
    simulate->add_option("--seed", opts.seed, "RNG seed")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    simulate->add_option("--output", sim_output, "Output CSV path (default stdout)");

    CLI::App* compare = app.add_subcommand(
        "compare", "Side-by-side observed statistics and p-values for two models");
    compare->add_option("input_a", compare_a, "First dataset")->required();
    compare->add_option("input_b", compare_b, "Second dataset")->required();
    add_io_options(compare, opts, /*with_input=*/false);
    add_statistic_options(compare, opts);
    add_resample_options(compare, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (evaluate->parsed()) {
            return cmd_evaluate(opts);
        }
        if (test->parsed()) {
            return cmd_test(opts, alpha);
        }
        if (diagram->parsed()) {
            return cmd_diagram(opts, bands, beta0_opt, beta1_opt);
        }
        if (simulate->parsed()) {
            return cmd_simulate(sim_beta0, sim_beta1, sim_n, opts, sim_output);
        }
        if (compare->parsed()) {
            return cmd_compare(compare_a, compare_b, opts);
        }
    } catch (const calibkit::CalibrationError& e) {
        if (is_input_error(e)) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
