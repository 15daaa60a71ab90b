#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "ptspectra/eigenfunction_analysis.hpp"
#include "ptspectra/parallel.hpp"

namespace ptspectra {

namespace {

struct Cell {
    cplx lo;  // lower-left corner
    cplx hi;  // upper-right corner

    cplx center() const { return 0.5 * (lo + hi); }
    cplx corner(int k) const {
        switch (k) {
            case 0: return lo;
            case 1: return {hi.real(), lo.imag()};
            case 2: return hi;
            default: return {lo.real(), hi.imag()};
        }
    }
    bool contains(cplx z, double pad) const {
        const double px = pad * (hi.real() - lo.real()), py = pad * (hi.imag() - lo.imag());
        return z.real() >= lo.real() - px && z.real() <= hi.real() + px && z.imag() >= lo.imag() - py &&
               z.imag() <= hi.imag() + py;
    }
};

class ZeroLocator {
public:
    ZeroLocator(const FieldGrid& grid, ZeroKind kind, const ZeroOptions& opt) : grid_(grid), kind_(kind), opt_(opt) {}

    cplx value(const SolutionState& s) const { return kind_ == ZeroKind::zero_of_u ? s.u : s.du; }

    /// Winding from phase increments; nullopt if any increment is ambiguous.
    std::optional<int> winding(const std::vector<cplx>& loop) const {
        double total = 0.0;
        for (std::size_t k = 0; k < loop.size(); ++k) {
            const cplx a = loop[k], b = loop[(k + 1) % loop.size()];
            if (a == cplx{} || b == cplx{}) return std::nullopt;
            const double d = std::arg(b / a);
            if (std::abs(d) > opt_.max_phase_jump) return std::nullopt;
            total += d;
        }
        return static_cast<int>(std::lround(total / (2.0 * kPi)));
    }

    /// Winding around a cell sampled through the field source, doubling the
    /// density until every phase increment is resolved.
    std::optional<int> sampled_winding(const Cell& c, int first_density) const {
        for (int m = first_density, round = 0; round <= opt_.max_resample; m *= 2, ++round) {
            std::vector<cplx> loop;
            loop.reserve(4 * m);
            for (int e = 0; e < 4; ++e) {
                const cplx a = c.corner(e), b = c.corner((e + 1) % 4);
                for (int k = 0; k < m; ++k) loop.push_back(value(grid_.probe(a + (b - a) * (double(k) / m))));
            }
            if (auto w = winding(loop)) return w;
        }
        return std::nullopt;
    }

    /// Winding of `c`, or of a slightly enlarged copy when a zero sits on its
    /// boundary; `c` is replaced by the cell actually used. Zeros found twice
    /// through overlapping cells are merged later.
    int resolved_winding(Cell& c) const {
        if (auto w = sampled_winding(c, 2)) return *w;
        for (double grow : {0.0137, 0.0419}) {
            const cplx size = c.hi - c.lo;
            const Cell big{c.lo - grow * size, c.hi + 0.61 * grow * size};
            if (auto w = sampled_winding(big, 2)) {
                c = big;
                return *w;
            }
        }
        std::ostringstream msg;
        msg << "find_zeros: phase along the boundary of the cell at " << c.center()
            << " is unresolved after resampling";
        throw ContourError(msg.str());
    }

    std::optional<cplx> newton(cplx z, const Cell& c) const {
        const double diag = std::abs(c.hi - c.lo);
        for (int it = 0; it < opt_.newton_iterations; ++it) {
            const SolutionState s = grid_.probe(z);
            cplx f, df;
            if (kind_ == ZeroKind::zero_of_u) {
                f = s.u;
                df = s.du;
            } else {
                f = s.du;
                df = grid_.second_derivative(z, s.u);
            }
            if (f == cplx{}) return z;
            if (df == cplx{}) return std::nullopt;
            const cplx step = f / df;
            z -= step;
            if (!(std::abs(z - c.center()) < 2.0 * diag)) return std::nullopt;
            if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(z))) return z;
        }
        return std::nullopt;
    }

    void locate(const Cell& c, int wind, int depth, std::vector<ZeroRecord>& out) const {
        if (wind < 0) {
            std::ostringstream msg;
            msg << "find_zeros: negative winding " << wind << " around " << c.center();
            throw ContourError(msg.str());
        }
        if (wind == 0) return;
        if (wind == 1) {
            if (auto z = newton(c.center(), c); z && c.contains(*z, 0.05)) {
                out.push_back(ZeroRecord{*z, 1, kind_, std::nullopt});
                return;
            }
        }
        if (depth >= kMaxDepth) {
            if (auto z = newton(c.center(), c)) {
                out.push_back(ZeroRecord{*z, wind, kind_, std::nullopt});
                return;
            }
            std::ostringstream msg;
            msg << "find_zeros: Newton iteration failed in the cell at " << c.center();
            throw ConvergenceError(msg.str());
        }
        const cplx m = c.center();
        const Cell quads[4] = {{c.lo, m},
                               {{m.real(), c.lo.imag()}, {c.hi.real(), m.imag()}},
                               {m, c.hi},
                               {{c.lo.real(), m.imag()}, {m.real(), c.hi.imag()}}};
        for (Cell q : quads) {
            const int w = resolved_winding(q);
            locate(q, w, depth + 1, out);
        }
    }

private:
    static constexpr int kMaxDepth = 6;
    const FieldGrid& grid_;
    ZeroKind kind_;
    const ZeroOptions& opt_;
};

std::vector<ZeroRecord> merged(std::vector<ZeroRecord> zs, double dist) {
    std::sort(zs.begin(), zs.end(), [](const ZeroRecord& a, const ZeroRecord& b) {
        if (a.which != b.which) return a.which < b.which;
        if (a.z.imag() != b.z.imag()) return a.z.imag() < b.z.imag();
        return a.z.real() < b.z.real();
    });
    std::vector<ZeroRecord> out;
    for (const ZeroRecord& z : zs) {
        const bool dup = std::any_of(out.begin(), out.end(), [&](const ZeroRecord& o) {
            return o.which == z.which && std::abs(o.z - z.z) <= dist;
        });
        if (!dup) out.push_back(z);
    }
    return out;
}

}  // namespace

std::string_view to_string(ZeroKind k) { return k == ZeroKind::zero_of_u ? "u" : "du"; }

std::vector<ZeroRecord> find_zeros(const FieldGrid& grid, const ZeroOptions& options) {
    std::vector<ZeroRecord> all;
    if (grid.ny() < 2) return all;
    const int cells_y = grid.ny() - 1, cells_x = grid.nx() - 1;

    for (ZeroKind kind : {ZeroKind::zero_of_u, ZeroKind::zero_of_du}) {
        const ZeroLocator loc(grid, kind, options);
        std::vector<std::vector<ZeroRecord>> per_row(cells_y);
        parallel_for(static_cast<std::size_t>(cells_y), [&](std::size_t jj) {
            const int j = static_cast<int>(jj);
            for (int i = 0; i < cells_x; ++i) {
                const std::vector<cplx> loop{loc.value(grid.at(i, j)), loc.value(grid.at(i + 1, j)),
                                             loc.value(grid.at(i + 1, j + 1)), loc.value(grid.at(i, j + 1))};
                Cell cell{grid.z(i, j), grid.z(i + 1, j + 1)};
                std::optional<int> w = loc.winding(loop);
                if (w && *w == 0) continue;
                const int wind = w ? *w : loc.resolved_winding(cell);
                loc.locate(cell, wind, 0, per_row[j]);
            }
        });
        for (auto& row : per_row) all.insert(all.end(), row.begin(), row.end());
    }

    std::vector<ZeroRecord> out = merged(std::move(all), options.merge_distance);
    const auto& spec = grid.spec();
    if (spec && is_pure_cubic(*spec) && grid.lambda().real() > 0.0) {
        for (ZeroRecord& z : out) z.regions = classify_cubic_regions(z.z, grid.lambda());
    }
    return out;
}

}  // namespace ptspectra
