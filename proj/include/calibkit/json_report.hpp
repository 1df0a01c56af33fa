#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "calibkit/binning.hpp"
#include "calibkit/diagram.hpp"
#include "calibkit/estimator.hpp"
#include "calibkit/resample.hpp"
#include "calibkit/simplex.hpp"

namespace calibkit {

using ordered_json = nlohmann::ordered_json;

inline ordered_json partition_to_json(const Partition& partition) {
    ordered_json out;
    switch (partition.scheme()) {
        case Partition::Scheme::EqualWidth1D: {
            out["scheme"] = "equal";
            out["bin_count"] = partition.bin_count();
            ordered_json edges = ordered_json::array();
            for (int b = 0; b <= partition.bin_count(); ++b) {
                edges.push_back(static_cast<double>(b) / partition.bin_count());
            }
            out["edges"] = std::move(edges);
            break;
        }
        case Partition::Scheme::SimplexGrid:
            out["scheme"] = "grid";
            out["subdivision"] = partition.param();
            out["bin_count"] = partition.bin_count();
            break;
        case Partition::Scheme::DataDependent: {
            out["scheme"] = "data";
            out["threshold"] = partition.param();
            out["bin_count"] = partition.bin_count();
            ordered_json splits = ordered_json::array();
            for (const auto& node : partition.split_nodes()) {
                splits.push_back(ordered_json{{"dim", node.dim},
                                              {"value", node.value},
                                              {"left", node.left},
                                              {"right", node.right}});
            }
            out["splits"] = std::move(splits);
            ordered_json boxes = ordered_json::array();
            for (const auto& box : partition.leaf_boxes()) {
                boxes.push_back(ordered_json{{"lo", box.lo}, {"hi", box.hi}});
            }
            out["boxes"] = std::move(boxes);
            break;
        }
    }
    return out;
}

inline ordered_json report_to_json(const MiscalibrationReport& report) {
    ordered_json out;
    out["eta_hat"] = report.eta_hat;
    out["max_hat"] = report.max_hat;
    out["distance"] = distance_name(report.distance);
    out["lens"] = report.lens_spec;
    out["scheme"] = partition_to_json(report.partition);
    ordered_json bins = ordered_json::array();
    for (const BinSummary& s : report.bins) {
        ordered_json bin;
        bin["index"] = s.bin_index;
        bin["count"] = s.count;
        bin["p_hat"] = s.p_hat;
        bin["g_hat"] = s.g_hat ? ordered_json(s.g_hat->components()) : ordered_json(nullptr);
        bin["r_hat"] = s.r_hat ? ordered_json(s.r_hat->components()) : ordered_json(nullptr);
        bins.push_back(std::move(bin));
    }
    out["bins"] = std::move(bins);
    return out;
}

inline ordered_json test_result_to_json(const TestResult& result, const ResamplePlan& plan,
                                        const std::string& lens_spec) {
    ordered_json statistic;
    statistic["estimator"] = "eta_hat";
    statistic["lens"] = lens_spec;
    statistic["bins"] = plan.bins.spec();
    statistic["distance"] = distance_name(plan.distance);
    statistic["partition_policy"] =
        plan.policy == PartitionPolicy::Frozen ? "frozen" : "rebuild";

    ordered_json out;
    out["statistic"] = std::move(statistic);
    out["observed"] = result.observed;
    out["B"] = plan.replicates;
    out["seed"] = plan.seed;
    out["p_value"] = result.p_value;
    const std::span<const double> nulls(result.null_samples);
    out["null_quantiles"] = ordered_json{{"q01", detail::quantile_type7(nulls, 0.01)},
                                         {"q05", detail::quantile_type7(nulls, 0.05)},
                                         {"q50", detail::quantile_type7(nulls, 0.50)},
                                         {"q95", detail::quantile_type7(nulls, 0.95)},
                                         {"q99", detail::quantile_type7(nulls, 0.99)}};
    return out;
}

inline ordered_json diagram_to_json(const Diagram1D& diagram) {
    ordered_json out;
    out["type"] = "reliability1d";
    out["n"] = diagram.n;
    ordered_json bins = ordered_json::array();
    for (const auto& mark : diagram.marks) {
        ordered_json entry;
        entry["index"] = mark.bin;
        entry["interval"] = ordered_json::array({mark.lo_edge, mark.hi_edge});
        entry["g_hat"] = mark.g_hat;
        entry["deviation"] = mark.deviation;
        entry["count"] = mark.count;
        entry["band"] = mark.band
                            ? ordered_json::array({mark.band->first, mark.band->second})
                            : ordered_json(nullptr);
        bins.push_back(std::move(entry));
    }
    out["bins"] = std::move(bins);
    out["histogram"] = diagram.histogram;
    ordered_json curve = ordered_json::array();
    for (const auto& [t, dev] : diagram.analytic_deviation) {
        curve.push_back(ordered_json::array({t, dev}));
    }
    out["analytic_deviation"] = std::move(curve);
    return out;
}

inline ordered_json diagram_to_json(const DiagramSimplex& diagram) {
    ordered_json out;
    out["type"] = "reliability_simplex";
    out["n"] = diagram.n;
    out["subdivision"] = diagram.subdivision;
    out["labels"] =
        ordered_json::array({diagram.labels[0], diagram.labels[1], diagram.labels[2]});
    ordered_json arrows = ordered_json::array();
    for (const auto& arrow : diagram.arrows) {
        ordered_json entry;
        entry["bin"] = arrow.bin;
        entry["tail"] = ordered_json::array({arrow.tail[0], arrow.tail[1], arrow.tail[2]});
        entry["head"] = ordered_json::array({arrow.head[0], arrow.head[1], arrow.head[2]});
        entry["p_hat"] = arrow.p_hat;
        entry["count"] = arrow.count;
        arrows.push_back(std::move(entry));
    }
    out["arrows"] = std::move(arrows);
    ordered_json cells = ordered_json::array();
    for (std::size_t b = 0; b < diagram.cells.size(); ++b) {
        ordered_json verts = ordered_json::array();
        for (const auto& v : diagram.cells[b]) {
            verts.push_back(ordered_json::array({v[0], v[1], v[2]}));
        }
        cells.push_back(ordered_json{{"index", static_cast<int>(b)},
                                     {"vertices", std::move(verts)},
                                     {"p_hat", diagram.p_hats[b]}});
    }
    out["cells"] = std::move(cells);
    return out;
}

}  // namespace calibkit
