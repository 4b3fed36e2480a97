#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "csv.hpp"
#include "geometry.hpp"
#include "grains.hpp"
#include "intensity.hpp"
#include "poisson.hpp"

namespace meandense {

// Uniform grid over germ positions in CSR layout. A grain placed at germ p
// lies inside B_reach(p), so a query ball B_r(x) can only meet grains whose
// germ is within reach + r of x.
class GermGrid {
public:
    GermGrid() = default;

    GermGrid(std::span<const MarkedGerm> germs, const Box& extent, double cell_size) : extent_(extent) {
        const int d = extent.dim();
        cell_ = cell_size > 0.0 ? cell_size : 1.0;
        std::size_t cells = 1;
        for (int k = 0; k < d; ++k) {
            const auto c = static_cast<std::int64_t>(std::ceil(extent.side(k) / cell_));
            counts_[static_cast<std::size_t>(k)] = std::max<std::int64_t>(1, c);
            cells *= static_cast<std::size_t>(counts_[static_cast<std::size_t>(k)]);
        }
        start_.assign(cells + 1, 0);
        std::vector<std::size_t> cell_of(germs.size());
        for (std::size_t i = 0; i < germs.size(); ++i) {
            cell_of[i] = flat(cell_coords(germs[i].germ));
            ++start_[cell_of[i] + 1];
        }
        for (std::size_t c = 0; c < cells; ++c) start_[c + 1] += start_[c];
        items_.resize(germs.size());
        std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < germs.size(); ++i) items_[fill[cell_of[i]]++] = i;
    }

    // Calls visit(index) for every germ whose cell meets the box around x of half-width reach.
    template <class Visit>
    bool visit_near(const Point& x, double reach, Visit&& visit) const {
        const int d = extent_.dim();
        std::array<std::int64_t, kMaxDim> lo{}, hi{};
        for (int k = 0; k < d; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            lo[kk] = clamp_axis(k, std::floor((x[k] - reach - extent_.lo[k]) / cell_));
            hi[kk] = clamp_axis(k, std::floor((x[k] + reach - extent_.lo[k]) / cell_));
        }
        std::array<std::int64_t, kMaxDim> c{};
        for (c[2] = d > 2 ? lo[2] : 0; c[2] <= (d > 2 ? hi[2] : 0); ++c[2])
            for (c[1] = d > 1 ? lo[1] : 0; c[1] <= (d > 1 ? hi[1] : 0); ++c[1])
                for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0]) {
                    const std::size_t f = flat(c);
                    for (std::size_t j = start_[f]; j < start_[f + 1]; ++j)
                        if (!visit(items_[j])) return false;
                }
        return true;
    }

private:
    std::int64_t clamp_axis(int k, double v) const {
        const double top = static_cast<double>(counts_[static_cast<std::size_t>(k)] - 1);
        return static_cast<std::int64_t>(std::clamp(v, 0.0, top));
    }

    std::array<std::int64_t, kMaxDim> cell_coords(const Point& p) const {
        std::array<std::int64_t, kMaxDim> c{};
        for (int k = 0; k < extent_.dim(); ++k)
            c[static_cast<std::size_t>(k)] = clamp_axis(k, std::floor((p[k] - extent_.lo[k]) / cell_));
        return c;
    }

    std::size_t flat(const std::array<std::int64_t, kMaxDim>& c) const {
        return static_cast<std::size_t>(c[0] + counts_[0] * (c[1] + counts_[1] * c[2]));
    }

    Box extent_;
    double cell_ = 1.0;
    std::array<std::int64_t, kMaxDim> counts_{1, 1, 1};
    std::vector<std::size_t> start_;
    std::vector<std::size_t> items_;
};

/// One realization of the Boolean model Θ = ∪ (x_i + Z_0(s_i)) seen through
/// an observation window. Germs were simulated on the window dilated by the
/// guard margin, so every hit/count/measure query inside the window with
/// radius up to r_max is exact.
class BooleanRealization {
public:
    // Realizations with more grains than this get a grid index.
    static constexpr std::size_t kIndexThreshold = 48;

    // `n` is the Hausdorff dimension of the grain family.
    BooleanRealization(std::vector<MarkedGerm> placed, Box observation_window, double guard_margin, double r_max,
                       int n, double index_cell_size = 0.0)
        : placed_(std::move(placed)), window_(std::move(observation_window)), guard_(guard_margin), r_max_(r_max),
          n_(n) {
        if (!(guard_margin >= 0.0) || !(r_max >= 0.0)) throw ConfigError("guard margin and r_max must be >= 0");
        if (n_ < 0 || n_ >= window_.dim()) throw ConfigError("grain dimension n must satisfy 0 <= n < d");
        for (const auto& g : placed_) {
            require_same_dim(g.germ, window_.lo);
            if (g.grain.hausdorff_dim() != n_) throw ConfigError("grain dimension differs from the realization's n");
            for (const auto& v : g.grain.vertices()) reach_ = std::max(reach_, norm(v));
        }
        if (index_cell_size > 0.0 || placed_.size() > kIndexThreshold) {
            const double cell = index_cell_size > 0.0 ? index_cell_size : std::max(reach_ + r_max_, 1e-3);
            grid_ = GermGrid(placed_, window_.dilated(guard_), cell);
            indexed_ = true;
        }
    }

    const std::vector<MarkedGerm>& placed_grains() const noexcept { return placed_; }
    const Box& observation_window() const noexcept { return window_; }
    double guard_margin() const noexcept { return guard_; }
    double r_max() const noexcept { return r_max_; }
    int dim() const noexcept { return window_.dim(); }
    int hausdorff_dim() const noexcept { return n_; }
    bool indexed() const noexcept { return indexed_; }

    bool hits(const Point& x, double r) const {
        check_query(x, r);
        bool found = false;
        for_each_near(x, r, [&](const MarkedGerm& g) {
            if (g.grain.distance_to(x - g.germ) <= r) {
                found = true;
                return false;
            }
            return true;
        });
        return found;
    }

    std::uint64_t hit_count(const Point& x, double r) const {
        check_query(x, r);
        std::uint64_t count = 0;
        for_each_near(x, r, [&](const MarkedGerm& g) {
            if (g.grain.distance_to(x - g.germ) <= r) ++count;
            return true;
        });
        return count;
    }

    // Reference answer scanning every grain, bypassing the index.
    std::uint64_t hit_count_brute_force(const Point& x, double r) const {
        std::uint64_t count = 0;
        for (const auto& g : placed_)
            if (g.grain.distance_to(x - g.germ) <= r) ++count;
        return count;
    }

    // H^n(Θ ∩ A): clipped lengths for curves, contained germs for points.
    double measure_in_region(const Box& a) const {
        require_same_dim(a.lo, window_.lo);
        if (!window_.contains(a)) throw QueryError("measure_in_region: region is not inside the observation window");
        CompensatedSum total;
        for (const auto& g : placed_) {
            if (g.grain.kind() == Grain::Kind::point) {
                if (a.contains(g.germ)) total.add(1.0);
                continue;
            }
            for (std::size_t i = 0; i < g.grain.segment_count(); ++i) {
                const SegmentShape s = g.grain.segment_at(i);
                if (auto c = clip_segment_box({g.germ + s.a, g.germ + s.b}, a)) total.add(c->length());
            }
        }
        return total.value();
    }

    // One row per grain: id, kind, germ coordinates, H^n measure, vertex
    // count, and the vertices relative to the germ ("x y|x y|...").
    void write_csv(std::ostream& out) const {
        std::vector<std::string> header{"grain_id", "kind"};
        for (int k = 1; k <= dim(); ++k) header.push_back("germ_x" + std::to_string(k));
        header.insert(header.end(), {"hn_measure", "vertex_count", "vertices"});
        CsvWriter csv(out, header);
        std::uint64_t id = 0;
        for (const auto& g : placed_) {
            csv << id++ << g.grain.describe();
            for (int k = 0; k < dim(); ++k) csv << g.germ[k];
            std::string verts;
            for (const auto& v : g.grain.vertices()) {
                if (!verts.empty()) verts += '|';
                for (int k = 0; k < dim(); ++k) {
                    if (k) verts += ' ';
                    verts += format_double(v[k]);
                }
            }
            csv << g.grain.hn_measure() << static_cast<std::uint64_t>(g.grain.vertices().size()) << verts;
            csv.end_row();
        }
    }

private:
    void check_query(const Point& x, double r) const {
        require_same_dim(x, window_.lo);
        if (!(r >= 0.0)) throw QueryError("query radius must be >= 0");
        if (r > r_max_) throw QueryError("query radius exceeds r_max; the guard zone cannot guarantee exactness");
        if (!window_.contains(Box::around(x, r)))
            throw QueryError("query ball around " + x.str() + " leaves the observation window");
    }

    template <class Visit>
    void for_each_near(const Point& x, double r, Visit&& visit) const {
        if (!indexed_) {
            for (const auto& g : placed_)
                if (!visit(g)) return;
            return;
        }
        grid_.visit_near(x, reach_ + r, [&](std::size_t i) { return visit(placed_[i]); });
    }

    std::vector<MarkedGerm> placed_;
    Box window_;
    double guard_ = 0.0;
    double r_max_ = 0.0;
    int n_ = 1;
    double reach_ = 0.0;
    GermGrid grid_;
    bool indexed_ = false;
};

/// Simulates Θ on `window`, with germs drawn on window ⊕ (L_max + r_max).
inline BooleanRealization simulate(const IntensityField& f, const MarkDistribution& q, const Box& window, double r_max,
                                   RandomStream& rng) {
    if (!(r_max >= 0.0) || !(r_max < 2.0)) throw ConfigError("simulate: r_max must lie in [0, 2)");
    const double l_max = q.diameter_bound();
    if (!std::isfinite(l_max)) throw ConfigError("simulate: mark law needs a finite diameter bound");
    const double guard = l_max + r_max;
    MarkedGermSample sample = sample_germs(f, q, window.dilated(guard), rng);
    return BooleanRealization(std::move(sample.germs), window, guard, r_max, q.hausdorff_dim());
}

} // namespace meandense
