#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "strata/covering.hpp"
#include "strata/parallel.hpp"

namespace strata {

namespace {

void set_bits(std::vector<std::uint64_t>& bits, size_t from, size_t to) {  // [from, to)
    while (from < to) {
        size_t w = from >> 6, b = from & 63;
        size_t take = std::min<size_t>(64 - b, to - from);
        std::uint64_t mask = take == 64 ? ~0ull : (((1ull << take) - 1) << b);
        bits[w] |= mask;
        from += take;
    }
}

struct VoxelGrid {
    int n = 0;
    double h = 0.0;
    Vec lo;
    std::vector<long> count;  // voxels per axis
    Vec box_hi;

    double centre(int a, long i) const { return lo[a] + (i + 0.5) * h; }
};

// Fill the cross-section of a ball (centre p, squared radius rem2) over axes a..n-1.
void fill(const VoxelGrid& g, const double* p, double rem2, int a, size_t row, std::vector<std::uint64_t>& bits) {
    double rad = std::sqrt(rem2);
    long i0 = std::max<long>(0, static_cast<long>(std::ceil((p[a] - rad - g.lo[a]) / g.h - 0.5)));
    long i1 = std::min<long>(g.count[a] - 1, static_cast<long>(std::floor((p[a] + rad - g.lo[a]) / g.h - 0.5)));
    if (i0 > i1) return;
    if (a == g.n - 1) {
        size_t base = row * g.count[a];
        set_bits(bits, base + i0, base + i1 + 1);
        return;
    }
    for (long i = i0; i <= i1; ++i) {
        double d = g.centre(a, i) - p[a];
        double left = rem2 - d * d;
        if (left < 0.0) continue;
        fill(g, p, left, a + 1, row * g.count[a] + i, bits);
    }
}

}  // namespace

double tube_volume(const std::vector<Vec>& S, double r, const Box& box, int voxels_per_r) {
    if (voxels_per_r < 8) fail(ErrorKind::ResolutionTooCoarse, "tube volume needs at least 8 voxels per r");
    if (!(r > 0.0)) fail(ErrorKind::InvalidArgument, "r must be positive");
    const int n = static_cast<int>(box.lo.size());
    if (n < 1 || static_cast<int>(box.hi.size()) != n) fail(ErrorKind::DimensionMismatch, "box dimension");
    if (S.empty()) return 0.0;
    for (const Vec& y : S)
        if (static_cast<int>(y.size()) != n) fail(ErrorKind::DimensionMismatch, "point dimension");

    VoxelGrid g;
    g.n = n;
    g.h = r / voxels_per_r;
    g.lo.resize(n);
    g.count.resize(n);
    for (int a = 0; a < n; ++a) {
        double mn = std::numeric_limits<double>::infinity(), mx = -mn;
        for (const Vec& y : S) {
            mn = std::min(mn, y[a]);
            mx = std::max(mx, y[a]);
        }
        double lo = std::max(box.lo[a], mn - r), hi = std::min(box.hi[a], mx + r);
        if (!(hi > lo)) return 0.0;
        g.lo[a] = lo;
        // Voxel centres beyond the box are not counted.
        g.count[a] = static_cast<long>(std::floor((hi - lo) / g.h + 0.5));
        if (g.count[a] <= 0) return 0.0;
    }
    double slice_bits = 1.0;
    for (int a = 1; a < n; ++a) slice_bits *= g.count[a];
    if (slice_bits > 8.0e9) fail(ErrorKind::InvalidArgument, "voxel slice too large");

    std::vector<size_t> order(S.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) { return S[i][0] < S[j][0]; });
    Vec key;
    for (size_t i : order) key.push_back(S[i][0]);

    if (n == 1) {
        std::vector<std::uint64_t> bits((g.count[0] + 63) / 64, 0);
        for (const Vec& y : S) {
            long i0 = std::max<long>(0, static_cast<long>(std::ceil((y[0] - r - g.lo[0]) / g.h - 0.5)));
            long i1 = std::min<long>(g.count[0] - 1, static_cast<long>(std::floor((y[0] + r - g.lo[0]) / g.h - 0.5)));
            if (i0 <= i1) set_bits(bits, i0, i1 + 1);
        }
        size_t c = 0;
        for (auto w : bits) c += std::popcount(w);
        return c * g.h;
    }

    const long slices = g.count[0];
    const int workers = std::max(1, std::min<int>(thread_count(), static_cast<int>(slices)));
    std::vector<unsigned long long> counts(workers, 0);
    const size_t words = static_cast<size_t>((slice_bits + 63) / 64);
    parallel_for(workers, [&](size_t wid) {
        std::vector<std::uint64_t> bits(words, 0);
        long s0 = slices * static_cast<long>(wid) / workers, s1 = slices * static_cast<long>(wid + 1) / workers;
        for (long s = s0; s < s1; ++s) {
            double c0 = g.centre(0, s);
            auto lo = std::lower_bound(key.begin(), key.end(), c0 - r);
            auto hi = std::upper_bound(key.begin(), key.end(), c0 + r);
            if (lo == hi) continue;
            std::fill(bits.begin(), bits.end(), 0);
            for (auto it = lo; it != hi; ++it) {
                const Vec& y = S[order[it - key.begin()]];
                double d = c0 - y[0];
                double rem = r * r - d * d;
                if (rem < 0.0) continue;
                fill(g, y.data(), rem, 1, 0, bits);
            }
            unsigned long long c = 0;
            for (auto w : bits) c += std::popcount(w);
            counts[wid] += c;
        }
    });
    unsigned long long total = 0;
    for (auto c : counts) total += c;
    return static_cast<double>(total) * std::pow(g.h, n);
}

double minkowski_content(const std::vector<Vec>& S, double r, int k, const Box& box, int voxels_per_r) {
    const int n = static_cast<int>(box.lo.size());
    if (k < 0 || k > n) fail(ErrorKind::InvalidArgument, "k out of range");
    return std::pow(2.0 * r, k - n) * tube_volume(S, r, box, voxels_per_r);
}

namespace {

void fit_tail(TailResult& res) {
    const size_t m = res.lambdas.size();
    size_t take = std::max<size_t>(8, (m + 1) / 2);
    take = std::min(take, m);
    std::vector<double> xs, ys;
    for (size_t i = m - take; i < m; ++i)
        if (res.measures[i] > 0.0) {
            xs.push_back(std::log(res.lambdas[i]));
            ys.push_back(std::log(res.measures[i]));
        }
    res.fit_points = static_cast<int>(xs.size());
    if (xs.size() < 2) {
        res.exponent = std::numeric_limits<double>::quiet_NaN();
        res.residual = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    res.exponent = sxy / sxx;
    double ss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double e = ys[i] - (my + res.exponent * (xs[i] - mx));
        ss += e * e;
    }
    res.residual = std::sqrt(ss / xs.size());
}

struct TailCell {
    Vec c;
    double h;  // half side
    int depth;
};

// Measure of {|D^j u| > lambda} in the ball by adaptive 2^n-tree refinement.
void adaptive_measure(const Field& u, int j, double lambda, const Vec& ctr, double R, const TailOptions& opt,
                      double& measure, double& unresolved) {
    const int n = u.dim();
    const double sqn = std::sqrt(static_cast<double>(n));
    const double min_geom = R / (8.0 * opt.cells_per_scale);
    // Power laws: |D^j v| = C |Pz|^{-alpha-j} gives exact bounds on a cell.
    double Cj = 0.0, beta = u.params().alpha() + j;
    if (u.kind() == FieldKind::PowerLaw) {
        Vec unit = add(u.power().center, u.power().normal[0]);
        Cj = u.derivative_norm(unit, j);
    }
    std::vector<TailCell> stack{{ctr, R, 0}};
    double vol_unit = std::pow(2.0, n);
    while (!stack.empty()) {
        TailCell cell = stack.back();
        stack.pop_back();
        double hd = cell.h * sqn;
        double dc = std::sqrt(dist2(cell.c.data(), ctr.data(), n));
        if (dc - hd >= R) continue;
        bool inside = dc + hd <= R;
        double vol = vol_unit * std::pow(cell.h, n);

        int verdict = 0;  // 1 above, -1 below, 0 undecided
        double scale_len = std::numeric_limits<double>::infinity();
        if (u.kind() == FieldKind::Zero) {
            verdict = lambda < 0.0 ? 1 : -1;
        } else if (u.kind() == FieldKind::PowerLaw) {
            double d = u.dist_to_singular(cell.c.data());
            double fmin = Cj * std::pow(d + hd, -beta);
            double fmax = d > hd ? Cj * std::pow(d - hd, -beta) : std::numeric_limits<double>::infinity();
            if (fmin > lambda) verdict = 1;
            else if (fmax <= lambda) verdict = -1;
            scale_len = std::min(d, d / beta);
        } else {
            double f = u.derivative_norm(cell.c, j);
            double L = u.derivative_norm(cell.c, j + 1);
            if (L > 0.0) scale_len = f / L;
            if (hd <= scale_len) {
                if (f - 2.0 * L * hd > lambda) verdict = 1;
                else if (f + 2.0 * L * hd <= lambda) verdict = -1;
            }
        }
        if (verdict == -1) continue;
        if (verdict == 1 && inside) {
            measure += vol;
            continue;
        }
        bool can_split = cell.depth < opt.max_depth;
        if (verdict == 1) can_split = can_split && hd > min_geom;
        else can_split = can_split && hd > std::min(scale_len, R) / opt.cells_per_scale;
        if (can_split) {
            double hh = 0.5 * cell.h;
            for (int mask = 0; mask < (1 << n); ++mask) {
                Vec c = cell.c;
                for (int a = 0; a < n; ++a) c[a] += (mask >> a & 1) ? hh : -hh;
                stack.push_back({std::move(c), hh, cell.depth + 1});
            }
            continue;
        }
        // Decide by the centre sample.
        bool in_ball = dc <= R;
        bool above = verdict == 1 || (verdict == 0 && u.derivative_norm(cell.c, j) > lambda);
        unresolved += vol;
        if (in_ball && above) measure += vol;
    }
}

}  // namespace

TailResult tail_distribution(const Field& u, int j, const std::vector<double>& lambdas, const TailOptions& opt) {
    const int n = u.dim();
    if (j < 0) fail(ErrorKind::InvalidArgument, "order must be nonnegative");
    if (u.kind() == FieldKind::Grid && j > 1) fail(ErrorKind::UnsupportedOrder, "grid tails support orders 0 and 1");
    if (lambdas.size() < 8) fail(ErrorKind::InvalidArgument, "tail fit needs at least 8 levels");
    for (size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1])) fail(ErrorKind::InvalidArgument, "lambda grid must increase");
    Vec ctr = opt.center.empty() ? Vec(n, 0.0) : opt.center;
    if (static_cast<int>(ctr.size()) != n) fail(ErrorKind::DimensionMismatch, "centre dimension");
    const double R = opt.radius;
    if (!(R > 0.0)) fail(ErrorKind::InvalidArgument, "radius must be positive");

    TailResult res;
    res.lambdas = lambdas;
    res.measures.assign(lambdas.size(), 0.0);
    res.unresolved.assign(lambdas.size(), 0.0);

    if (u.kind() == FieldKind::Grid) {
        const GridData& g = u.grid_data();
        if (R / g.spacing < 8.0) fail(ErrorKind::ResolutionTooCoarse, "fewer than 8 cells per radius");
        if (!u.contains_ball(ctr, R)) fail(ErrorKind::OutOfDomain, "tail region leaves the grid");
        std::vector<size_t> strides = g.strides();
        const size_t total = g.size();
        Vec vals;
        vals.reserve(total / 2);
        Vec y(n);
        for (size_t flat = 0; flat < total; ++flat) {
            size_t rem = flat;
            for (int a = 0; a < n; ++a) {
                long i = static_cast<long>(rem / strides[a]);
                rem %= strides[a];
                y[a] = g.origin[a] + (i + 0.5) * g.spacing;
            }
            if (dist2(y.data(), ctr.data(), n) > R * R) continue;
            vals.push_back(u.derivative_norm(y, j));
        }
        const double cell = std::pow(g.spacing, n);
        for (size_t l = 0; l < lambdas.size(); ++l)
            for (double v : vals)
                if (v > lambdas[l]) res.measures[l] += cell;
    } else {
        parallel_for(lambdas.size(), [&](size_t l) {
            adaptive_measure(u, j, lambdas[l], ctr, R, opt, res.measures[l], res.unresolved[l]);
        });
    }
    fit_tail(res);
    return res;
}

}  // namespace strata
