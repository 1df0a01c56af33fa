#pragma once

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "calibkit/errors.hpp"
#include "calibkit/simplex.hpp"

namespace calibkit {

/// A calibration lens: a map of (outcome, prediction) pairs that turns an
/// m-class problem into a smaller induced problem. Three families are
/// supported: the identity (canonical) lens, grouping by a fixed partition
/// of the classes, and tracking the k largest predictions.
class Lens {
public:
    enum class Kind { Canonical, FixedPartition, TopK };

    static Lens canonical(int source_classes) {
        require_classes(source_classes);
        Lens lens;
        lens.kind_ = Kind::Canonical;
        lens.source_classes_ = source_classes;
        lens.induced_classes_ = source_classes;
        return lens;
    }

    static Lens fixed_partition(int source_classes, std::vector<std::vector<int>> groups) {
        require_classes(source_classes);
        if (groups.empty()) {
            throw ParseError("fixed_partition: no groups");
        }
        std::vector<int> owner(static_cast<std::size_t>(source_classes), -1);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (groups[g].empty()) {
                throw ParseError("fixed_partition: group " + std::to_string(g) + " is empty");
            }
            for (int c : groups[g]) {
                if (c < 0 || c >= source_classes) {
                    throw LabelOutOfRange("fixed_partition: class " + std::to_string(c) +
                                          " outside [0," + std::to_string(source_classes) + ")");
                }
                if (owner[static_cast<std::size_t>(c)] != -1) {
                    throw ParseError("fixed_partition: class " + std::to_string(c) +
                                     " appears in two groups");
                }
                owner[static_cast<std::size_t>(c)] = static_cast<int>(g);
            }
        }
        for (int c = 0; c < source_classes; ++c) {
            if (owner[static_cast<std::size_t>(c)] == -1) {
                throw ParseError("fixed_partition: class " + std::to_string(c) +
                                 " missing from every group");
            }
        }
        Lens lens;
        lens.kind_ = Kind::FixedPartition;
        lens.source_classes_ = source_classes;
        lens.induced_classes_ = static_cast<int>(groups.size());
        lens.groups_ = std::move(groups);
        lens.group_of_class_ = std::move(owner);
        return lens;
    }

    static Lens top_k(int source_classes, int k) {
        require_classes(source_classes);
        if (k < 1 || k >= source_classes) {
            throw ParseError("top_k: need 1 <= k < m, got k=" + std::to_string(k) +
                             ", m=" + std::to_string(source_classes));
        }
        Lens lens;
        lens.kind_ = Kind::TopK;
        lens.source_classes_ = source_classes;
        lens.induced_classes_ = k + 1;
        lens.k_ = k;
        return lens;
    }

    Kind kind() const { return kind_; }
    int source_classes() const { return source_classes_; }
    int induced_classes() const { return induced_classes_; }
    int k() const { return k_; }
    const std::vector<std::vector<int>>& groups() const { return groups_; }

    /// The induced prediction map: pushforward of mu through the lens.
    SimplexVector induced_prediction(const SimplexVector& mu) const {
        check_dimension(mu);
        switch (kind_) {
            case Kind::Canonical:
                return mu;
            case Kind::FixedPartition: {
                if (groups_.size() == 1) {
                    return SimplexVector::unchecked({1.0});  // all mass, exactly
                }
                std::vector<double> out(groups_.size(), 0.0);
                for (std::size_t g = 0; g < groups_.size(); ++g) {
                    for (int c : groups_[g]) {
                        out[g] += mu[static_cast<std::size_t>(c)];
                    }
                }
                return SimplexVector::unchecked(std::move(out));
            }
            case Kind::TopK: {
                const std::vector<int> order = ranked_classes(mu);
                std::vector<double> out(static_cast<std::size_t>(k_) + 1, 0.0);
                double top_mass = 0.0;
                for (int i = 0; i < k_; ++i) {
                    const double v = mu[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
                    out[static_cast<std::size_t>(i) + 1] = v;
                    top_mass += v;
                }
                out[0] = std::max(0.0, 1.0 - top_mass);
                return SimplexVector::unchecked(std::move(out));
            }
        }
        throw CalibrationError("unreachable lens kind");
    }

    /// The induced outcome: where the original label lands in the induced space.
    int induced_outcome(int y, const SimplexVector& mu) const {
        check_dimension(mu);
        if (y < 0 || y >= source_classes_) {
            throw LabelOutOfRange("induced_outcome: label " + std::to_string(y) +
                                  " outside [0," + std::to_string(source_classes_) + ")");
        }
        switch (kind_) {
            case Kind::Canonical:
                return y;
            case Kind::FixedPartition:
                return group_of_class_[static_cast<std::size_t>(y)];
            case Kind::TopK: {
                const std::vector<int> order = ranked_classes(mu);
                for (int i = 0; i < k_; ++i) {
                    if (order[static_cast<std::size_t>(i)] == y) {
                        return i + 1;
                    }
                }
                return 0;
            }
        }
        throw CalibrationError("unreachable lens kind");
    }

    LabeledDataset apply(const LabeledDataset& data) const {
        data.check();
        if (static_cast<int>(data.num_classes()) != source_classes_) {
            throw DimensionMismatch("apply_lens: dataset has " +
                                    std::to_string(data.num_classes()) +
                                    " classes, lens expects " +
                                    std::to_string(source_classes_));
        }
        LabeledDataset induced;
        induced.predictions.reserve(data.size());
        induced.labels.reserve(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            try {
                induced.predictions.push_back(induced_prediction(data.predictions[i]));
                induced.labels.push_back(induced_outcome(data.labels[i], data.predictions[i]));
            } catch (const CalibrationError& e) {
                throw CalibrationError("apply_lens row " + std::to_string(i) + ": " + e.what());
            }
        }
        return induced;
    }

    std::string spec() const {
        switch (kind_) {
            case Kind::Canonical:
                return "canonical";
            case Kind::TopK:
                return k_ == 1 ? "max" : "topk:" + std::to_string(k_);
            case Kind::FixedPartition: {
                std::string out = "groups:";
                for (std::size_t g = 0; g < groups_.size(); ++g) {
                    if (g > 0) out += '|';
                    for (std::size_t j = 0; j < groups_[g].size(); ++j) {
                        if (j > 0) out += ',';
                        out += std::to_string(groups_[g][j]);
                    }
                }
                return out;
            }
        }
        return "?";
    }

private:
    Lens() = default;

    static void require_classes(int m) {
        if (m < 1) {
            throw ParseError("lens: need at least one source class");
        }
    }

    void check_dimension(const SimplexVector& mu) const {
        if (static_cast<int>(mu.size()) != source_classes_) {
            throw DimensionMismatch("lens expects dimension " +
                                    std::to_string(source_classes_) + ", got " +
                                    std::to_string(mu.size()));
        }
    }

    // Class indices sorted by descending prediction, ties broken by lowest index.
    std::vector<int> ranked_classes(const SimplexVector& mu) const {
        std::vector<int> order(static_cast<std::size_t>(source_classes_));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&mu](int a, int b) {
            const double pa = mu[static_cast<std::size_t>(a)];
            const double pb = mu[static_cast<std::size_t>(b)];
            if (pa != pb) return pa > pb;
            return a < b;
        });
        return order;
    }

    Kind kind_ = Kind::Canonical;
    int source_classes_ = 0;
    int induced_classes_ = 0;
    int k_ = 0;
    std::vector<std::vector<int>> groups_;
    std::vector<int> group_of_class_;
};

/// Lens grammar: `canonical`, `max` (= topk:1), `topk:K`,
/// `groups:0,1|2` (pipe-separated groups of comma-separated class indices).
inline Lens parse_lens(const std::string& spec, int source_classes) {
    if (spec == "canonical") {
        return Lens::canonical(source_classes);
    }
    if (spec == "max") {
        return Lens::top_k(source_classes, 1);
    }
    if (spec.rfind("topk:", 0) == 0) {
        try {
            const int k = std::stoi(spec.substr(5));
            return Lens::top_k(source_classes, k);
        } catch (const std::logic_error&) {
            throw ParseError("lens spec '" + spec + "': bad k");
        }
    }
    if (spec.rfind("groups:", 0) == 0) {
        std::vector<std::vector<int>> groups;
        std::stringstream body(spec.substr(7));
        std::string group_text;
        while (std::getline(body, group_text, '|')) {
            std::vector<int> group;
            std::stringstream items(group_text);
            std::string item;
            while (std::getline(items, item, ',')) {
                try {
                    group.push_back(std::stoi(item));
                } catch (const std::logic_error&) {
                    throw ParseError("lens spec '" + spec + "': bad class index '" + item + "'");
                }
            }
            groups.push_back(std::move(group));
        }
        return Lens::fixed_partition(source_classes, std::move(groups));
    }
    throw ParseError("unknown lens spec '" + spec +
                     "' (expected canonical|max|topk:K|groups:...)");
}

}  // namespace calibkit
