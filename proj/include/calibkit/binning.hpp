#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "calibkit/errors.hpp"
#include "calibkit/simplex.hpp"

namespace calibkit {

/// A finite partition of the (induced) probability simplex with a total,
/// deterministic assignment rule.
///
/// Schemes:
///   EqualWidth1D  — bin_count intervals of [0,1] on the tracked (last)
///                   component of a binary prediction; last bin closed at 1.
///   SimplexGrid   — subdivision^2 congruent triangles on the 3-class simplex.
///   DataDependent — recursive mean splits along the highest-variance
///                   dimension until cells hold <= threshold points.
class Partition {
public:
    enum class Scheme { EqualWidth1D, SimplexGrid, DataDependent };

    struct SplitNode {
        int dim;
        double value;  // x[dim] <= value goes left
        int left;      // >= 0: node index, < 0: leaf id = ~left
        int right;
    };

    struct Box {
        std::vector<double> lo;  // exclusive below, except at 0
        std::vector<double> hi;  // inclusive above
    };

    Scheme scheme() const { return scheme_; }
    int dimension() const { return dimension_; }
    int bin_count() const { return bin_count_; }
    int param() const { return param_; }

    const std::vector<SplitNode>& split_nodes() const { return nodes_; }
    const std::vector<Box>& leaf_boxes() const { return boxes_; }

    int assign(const SimplexVector& nu) const {
        return assign(std::span<const double>(nu.components()));
    }

    int assign(std::span<const double> nu) const {
        if (static_cast<int>(nu.size()) != dimension_) {
            throw DimensionMismatch("assign_bin: partition dimension " +
                                    std::to_string(dimension_) + ", vector dimension " +
                                    std::to_string(nu.size()));
        }
        switch (scheme_) {
            case Scheme::EqualWidth1D: {
                const double v = nu[nu.size() - 1];
                const int idx = static_cast<int>(std::floor(v * param_));
                return std::clamp(idx, 0, param_ - 1);
            }
            case Scheme::SimplexGrid:
                return assign_grid(nu);
            case Scheme::DataDependent:
                return assign_tree(nu);
        }
        throw CalibrationError("unreachable partition scheme");
    }

    /// [lo, hi] on the tracked component; defined for the binary (m=2) schemes.
    std::pair<double, double> interval_1d(int bin) const {
        if (scheme_ == Scheme::EqualWidth1D) {
            return {static_cast<double>(bin) / param_, static_cast<double>(bin + 1) / param_};
        }
        if (scheme_ == Scheme::DataDependent && dimension_ == 2) {
            return {boxes_[static_cast<std::size_t>(bin)].lo[1],
                    boxes_[static_cast<std::size_t>(bin)].hi[1]};
        }
        throw UnsupportedDimension("interval_1d: not a 1-D partition");
    }

    /// Barycentric vertices of a grid cell (SimplexGrid only).
    std::array<std::array<double, 3>, 3> grid_cell_vertices(int bin) const {
        if (scheme_ != Scheme::SimplexGrid) {
            throw UnsupportedDimension("grid_cell_vertices: not a simplex grid");
        }
        const int k = param_;
        const int upward_total = k * (k + 1) / 2;
        int i = 0;
        int j = 0;
        bool down = bin >= upward_total;
        int rest = down ? bin - upward_total : bin;
        const int row_span = down ? k - 1 : k;
        while (rest >= row_span - j) {
            rest -= row_span - j;
            ++j;
        }
        i = rest;
        auto bary = [k](int a, int b) {
            return std::array<double, 3>{static_cast<double>(a) / k, static_cast<double>(b) / k,
                                         static_cast<double>(k - a - b) / k};
        };
        if (!down) {
            return {bary(i, j), bary(i + 1, j), bary(i, j + 1)};
        }
        return {bary(i + 1, j), bary(i + 1, j + 1), bary(i, j + 1)};
    }

    friend Partition build_equal_bins_1d(int bin_count);
    friend Partition build_simplex_grid(int subdivision);
    friend Partition build_data_dependent_bins(std::span<const SimplexVector> predictions,
                                               int threshold);

private:
    int assign_grid(std::span<const double> nu) const {
        const int k = param_;
        const double u = std::clamp(nu[0], 0.0, 1.0) * k;
        const double v = std::clamp(nu[1], 0.0, 1.0) * k;
        int i = std::min(static_cast<int>(std::floor(u)), k - 1);
        int j = std::min(static_cast<int>(std::floor(v)), k - 1);
        if (i + j > k - 1) {
            j = k - 1 - i;  // far-edge lattice points pull back along v
        }
        const double frac = (u - i) + (v - j);
        const bool down = frac > 1.0 && i + j <= k - 2;
        if (down) {
            const int upward_total = k * (k + 1) / 2;
            return upward_total + j * (k - 1) - j * (j - 1) / 2 + i;
        }
        return j * k - j * (j - 1) / 2 + i;
    }

    int assign_tree(std::span<const double> nu) const {
        if (nodes_.empty()) {
            return 0;
        }
        int node = 0;
        for (;;) {
            const SplitNode& s = nodes_[static_cast<std::size_t>(node)];
            const int next = nu[static_cast<std::size_t>(s.dim)] <= s.value ? s.left : s.right;
            if (next < 0) {
                return ~next;
            }
            node = next;
        }
    }

    Scheme scheme_ = Scheme::EqualWidth1D;
    int dimension_ = 2;
    int bin_count_ = 0;
    int param_ = 0;  // bin_count, subdivision, or threshold
    std::vector<SplitNode> nodes_;
    std::vector<Box> boxes_;
};

inline Partition build_equal_bins_1d(int bin_count) {
    if (bin_count < 1) {
        throw InvalidBinCount("build_equal_bins_1d: bin_count " + std::to_string(bin_count));
    }
    Partition p;
    p.scheme_ = Partition::Scheme::EqualWidth1D;
    p.dimension_ = 2;
    p.bin_count_ = bin_count;
    p.param_ = bin_count;
    return p;
}

inline Partition build_simplex_grid(int subdivision) {
    if (subdivision < 1) {
        throw InvalidBinCount("build_simplex_grid: subdivision " + std::to_string(subdivision));
    }
    Partition p;
    p.scheme_ = Partition::Scheme::SimplexGrid;
    p.dimension_ = 3;
    p.bin_count_ = subdivision * subdivision;
    p.param_ = subdivision;
    return p;
}

/// Appendix-style recursion: while a cell holds more than `threshold`
/// predictions, split it at the mean of the highest-variance dimension
/// (points equal to the mean go left). Cells where a split would create an
/// empty child stay whole. For binary predictions the split dimension is
/// always the tracked component, keeping the boundary rule aligned with the
/// other m=2 schemes.
inline Partition build_data_dependent_bins(std::span<const SimplexVector> predictions,
                                           int threshold) {
    if (predictions.empty()) {
        throw EmptyInput("build_data_dependent_bins: no predictions");
    }
    if (threshold < 1) {
        throw InvalidBinCount("build_data_dependent_bins: threshold " +
                              std::to_string(threshold));
    }
    const int m = static_cast<int>(predictions.front().size());
    for (const SimplexVector& p : predictions) {
        if (static_cast<int>(p.size()) != m) {
            throw InconsistentWidth("build_data_dependent_bins: mixed prediction widths");
        }
    }

    Partition part;
    part.scheme_ = Partition::Scheme::DataDependent;
    part.dimension_ = m;
    part.param_ = threshold;

    struct Cell {
        std::vector<std::size_t> rows;
        Partition::Box box;
        int parent;     // node index whose child slot to fill, -1 for root
        bool is_left;
    };

    Partition::Box root_box;
    root_box.lo.assign(static_cast<std::size_t>(m), 0.0);
    root_box.hi.assign(static_cast<std::size_t>(m), 1.0);

    std::vector<std::size_t> all(predictions.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    // Explicit left-first stack so leaf numbering is depth-first and stable.
    std::vector<Cell> stack;
    stack.push_back({std::move(all), std::move(root_box), -1, false});

    auto attach = [&part](int parent, bool is_left, int encoded) {
        if (parent < 0) return;
        auto& node = part.nodes_[static_cast<std::size_t>(parent)];
        (is_left ? node.left : node.right) = encoded;
    };

    while (!stack.empty()) {
        Cell cell = std::move(stack.back());
        stack.pop_back();

        int split_dim = -1;
        double split_value = 0.0;
        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;

        if (cell.rows.size() > static_cast<std::size_t>(threshold)) {
            if (m == 2) {
                split_dim = 1;
            } else {
                double best_var = -1.0;
                for (int d = 0; d < m; ++d) {
                    double mean = 0.0;
                    for (std::size_t r : cell.rows) mean += predictions[r][static_cast<std::size_t>(d)];
                    mean /= static_cast<double>(cell.rows.size());
                    double ss = 0.0;
                    for (std::size_t r : cell.rows) {
                        const double diff = predictions[r][static_cast<std::size_t>(d)] - mean;
                        ss += diff * diff;
                    }
                    const double var = ss / static_cast<double>(cell.rows.size() - 1);
                    if (var > best_var) {
                        best_var = var;
                        split_dim = d;
                    }
                }
            }
            double mean = 0.0;
            for (std::size_t r : cell.rows) mean += predictions[r][static_cast<std::size_t>(split_dim)];
            mean /= static_cast<double>(cell.rows.size());
            split_value = mean;
            for (std::size_t r : cell.rows) {
                if (predictions[r][static_cast<std::size_t>(split_dim)] <= split_value) {
                    left_rows.push_back(r);
                } else {
                    right_rows.push_back(r);
                }
            }
            if (left_rows.empty() || right_rows.empty()) {
                split_dim = -1;  // degenerate split, keep the cell whole
            }
        }

        if (split_dim < 0) {
            const int leaf = static_cast<int>(part.boxes_.size());
            part.boxes_.push_back(std::move(cell.box));
            attach(cell.parent, cell.is_left, ~leaf);
            continue;
        }

        const int node_index = static_cast<int>(part.nodes_.size());
        part.nodes_.push_back({split_dim, split_value, 0, 0});
        attach(cell.parent, cell.is_left, node_index);

        Partition::Box left_box = cell.box;
        left_box.hi[static_cast<std::size_t>(split_dim)] =
            std::min(left_box.hi[static_cast<std::size_t>(split_dim)], split_value);
        Partition::Box right_box = std::move(cell.box);
        right_box.lo[static_cast<std::size_t>(split_dim)] =
            std::max(right_box.lo[static_cast<std::size_t>(split_dim)], split_value);

        // Push right first so the left cell is processed (and numbered) first.
        stack.push_back({std::move(right_rows), std::move(right_box), node_index, false});
        stack.push_back({std::move(left_rows), std::move(left_box), node_index, true});
    }

    part.bin_count_ = static_cast<int>(part.boxes_.size());
    return part;
}

inline int assign_bin(const Partition& partition, const SimplexVector& nu) {
    return partition.assign(nu);
}

/// CLI-facing binning configuration: `equal:N`, `grid:K`, `data:THRESHOLD`
/// (bare `data` means the default threshold 1000).
struct BinningSpec {
    enum class Kind { Equal, Grid, Data };

    Kind kind = Kind::Equal;
    int param = 10;

    static constexpr int kDefaultDataThreshold = 1000;

    static BinningSpec parse(const std::string& text) {
        auto numeric_tail = [&text](std::size_t offset) {
            try {
                return std::stoi(text.substr(offset));
            } catch (const std::logic_error&) {
                throw ParseError("bins spec '" + text + "': bad count");
            }
        };
        if (text.rfind("equal:", 0) == 0) return {Kind::Equal, numeric_tail(6)};
        if (text.rfind("grid:", 0) == 0) return {Kind::Grid, numeric_tail(5)};
        if (text.rfind("data:", 0) == 0) return {Kind::Data, numeric_tail(5)};
        if (text == "data") return {Kind::Data, kDefaultDataThreshold};
        throw ParseError("unknown bins spec '" + text +
                         "' (expected equal:N|grid:K|data:THRESHOLD)");
    }

    /// True when the partition depends on the data it is built from.
    bool data_dependent() const { return kind == Kind::Data; }

    Partition build(std::span<const SimplexVector> predictions) const {
        switch (kind) {
            case Kind::Equal:
                return build_equal_bins_1d(param);
            case Kind::Grid:
                return build_simplex_grid(param);
            case Kind::Data:
                return build_data_dependent_bins(predictions, param);
        }
        throw CalibrationError("unreachable binning kind");
    }

    std::string spec() const {
        switch (kind) {
            case Kind::Equal:
                return "equal:" + std::to_string(param);
            case Kind::Grid:
                return "grid:" + std::to_string(param);
            case Kind::Data:
                return "data:" + std::to_string(param);
        }
        return "?";
    }
};

}  // namespace calibkit
