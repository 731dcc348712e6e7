#include "strata/covering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "strata/parallel.hpp"

namespace strata {

SpanResult effective_span(const std::vector<Vec>& points, double rho) {
    if (!(rho > 0.0)) fail(ErrorKind::InvalidArgument, "rho must be positive");
    SpanResult res;
    if (points.empty()) return res;
    const int n = static_cast<int>(points[0].size());
    const Vec& x0 = points[0];
    res.indices.push_back(0);
    res.basis_points.push_back(x0);
    std::vector<Vec> dirs;
    const double thresh2 = 4.0 * rho * rho;
    while (static_cast<int>(dirs.size()) < n) {
        double best = -1.0;
        size_t best_i = 0;
        Vec best_res;
        for (size_t i = 0; i < points.size(); ++i) {
            Vec w = sub(points[i], x0);
            for (const Vec& d : dirs) {
                double t = dot(w, d);
                for (int a = 0; a < n; ++a) w[a] -= t * d[a];
            }
            double d2 = dot(w, w);
            if (d2 > best) {
                best = d2;
                best_i = i;
                best_res = std::move(w);
            }
        }
        if (best < thresh2) break;
        dirs.push_back(scale(best_res, 1.0 / std::sqrt(best)));
        res.indices.push_back(best_i);
        res.basis_points.push_back(points[best_i]);
    }
    res.k = static_cast<int>(dirs.size());
    return res;
}

DiscreteMeasure ball_measure(const std::vector<Vec>& centers, const Vec& radii, int k) {
    if (centers.size() != radii.size()) fail(ErrorKind::InvalidArgument, "centers and radii differ in length");
    DiscreteMeasure mu;
    mu.points = centers;
    for (double rb : radii) mu.weights.push_back(ball_volume(k) * std::pow(rb, k));
    return mu;
}

namespace {

// Points sorted along the first axis for window queries.
struct SortedCloud {
    const std::vector<Vec>* pts = nullptr;
    std::vector<size_t> order;
    Vec key;

    explicit SortedCloud(const std::vector<Vec>& p) : pts(&p), order(p.size()) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return p[a][0] < p[b][0]; });
        for (size_t i : order) key.push_back(p[i][0]);
    }

    // Indices j with |p_j - y| < s, ascending.
    std::vector<size_t> within(const Vec& y, double s) const {
        std::vector<size_t> out;
        auto lo = std::lower_bound(key.begin(), key.end(), y[0] - s);
        auto hi = std::upper_bound(key.begin(), key.end(), y[0] + s);
        const int n = static_cast<int>(y.size());
        for (auto it = lo; it != hi; ++it) {
            size_t j = order[it - key.begin()];
            if (dist2((*pts)[j].data(), y.data(), n) < s * s) out.push_back(j);
        }
        std::sort(out.begin(), out.end());
        return out;
    }
};

double tail_eigen_sum(const std::vector<Vec>& pts, const Vec& w, const std::vector<size_t>& idx, int k) {
    const int n = static_cast<int>(pts[0].size());
    if (idx.size() <= 1 || k >= n) return 0.0;
    double mass = 0.0;
    Vec cm(n, 0.0);
    for (size_t j : idx) {
        mass += w[j];
        for (int a = 0; a < n; ++a) cm[a] += w[j] * pts[j][a];
    }
    if (!(mass > 0.0)) return 0.0;
    for (double& c : cm) c /= mass;
    Vec M(n * n, 0.0);
    for (size_t j : idx)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) M[a * n + b] += w[j] * (pts[j][a] - cm[a]) * (pts[j][b] - cm[b]);
    SymmetricEigen e = symmetric_eigen(M, n);
    double s = 0.0;
    for (int i = k; i < n; ++i) s += std::max(e.values[i], 0.0);
    return s;
}

}  // namespace

PackingReport reifenberg_check(const std::vector<Vec>& centers, const Vec& radii, int k, const Vec& x0, double r,
                               const ReifenbergOptions& opt) {
    const int n = static_cast<int>(x0.size());
    if (k < 0 || k > n) fail(ErrorKind::InvalidArgument, "k out of range");
    if (!(r > 0.0)) fail(ErrorKind::InvalidArgument, "r must be positive");
    if (centers.size() != radii.size()) fail(ErrorKind::InvalidArgument, "centers and radii differ in length");
    for (const Vec& c : centers)
        if (static_cast<int>(c.size()) != n) fail(ErrorKind::DimensionMismatch, "ball centre dimension");
    SortedCloud cloud(centers);
    double rmax = radii.empty() ? 0.0 : *std::max_element(radii.begin(), radii.end());
    for (size_t i = 0; i < centers.size(); ++i) {
        for (size_t j : cloud.within(centers[i], radii[i] + rmax)) {
            if (j <= i) continue;
            double d = std::sqrt(dist2(centers[i].data(), centers[j].data(), n));
            if (d < (radii[i] + radii[j]) * (1.0 - 1e-12))
                fail(ErrorKind::OverlappingBalls, "balls " + std::to_string(i) + " and " + std::to_string(j) +
                                                      " overlap");
        }
    }
    DiscreteMeasure mu = ball_measure(centers, radii, k);
    const Vec& w = mu.weights;

    PackingReport rep;
    rep.k = k;
    rep.x0 = x0;
    rep.r = r;
    rep.centers = centers.size();
    const double t0 = r / 10.0;
    for (int i = 0; i < opt.t_levels; ++i) rep.t_values.push_back(std::ldexp(t0, -i));

    // J(y, i) = ln 2 * sum_{l >= i} D(y, t0 2^{-l}); levels stop once B_s(y)
    // holds y alone, where D vanishes for every smaller s.
    std::vector<size_t> ys = cloud.within(x0, r + t0);
    std::vector<Vec> J(ys.size());
    parallel_for(ys.size(), [&](size_t q) {
        const Vec& y = centers[ys[q]];
        Vec D;
        for (int l = 0; l < 200; ++l) {
            double s = std::ldexp(t0, -l);
            std::vector<size_t> idx = cloud.within(y, s);
            D.push_back(std::pow(s, -k - 2.0) * tail_eigen_sum(centers, w, idx, k));
            if (idx.size() <= 1 && l + 1 >= opt.t_levels + opt.s_levels) break;
        }
        Vec acc(D.size() + 1, 0.0);
        for (size_t l = D.size(); l-- > 0;) acc[l] = acc[l + 1] + std::log(2.0) * D[l];
        J[q] = std::move(acc);
    });
    std::map<size_t, size_t> slot;
    for (size_t q = 0; q < ys.size(); ++q) slot[ys[q]] = q;

    std::vector<size_t> xs = cloud.within(x0, r);
    rep.hypothesis_by_t.assign(opt.t_levels, 0.0);
    for (int i = 0; i < opt.t_levels; ++i) {
        double t = rep.t_values[i];
        Vec vals(xs.size(), 0.0);
        parallel_for(xs.size(), [&](size_t q) {
            double s = 0.0;
            for (size_t j : cloud.within(centers[xs[q]], t)) {
                const Vec& Jy = J[slot.at(j)];
                s += w[j] * (static_cast<size_t>(i) < Jy.size() ? Jy[i] : 0.0);
            }
            vals[q] = s / std::pow(t, k);
        });
        for (double v : vals) rep.hypothesis_by_t[i] = std::max(rep.hypothesis_by_t[i], v);
        rep.hypothesis_ratio = std::max(rep.hypothesis_ratio, rep.hypothesis_by_t[i]);
    }
    double mass = 0.0;
    for (size_t j : xs) mass += w[j];
    rep.packing_ratio = mass / std::pow(r, k);
    double bound = opt.packing_bound > 0 ? opt.packing_bound : 4.0 * ball_volume(k);
    rep.hypothesis_ok = rep.hypothesis_ratio < opt.delta;
    rep.packing_ok = rep.packing_ratio <= bound;
    return rep;
}

PackingReport reifenberg_check(const DiscreteMeasure& mu, int k, const Vec& x0, double r,
                               const ReifenbergOptions& opt) {
    mu.validate();
    if (k < 1) fail(ErrorKind::InvalidArgument, "radii cannot be recovered from weights when k = 0");
    Vec radii;
    for (double wb : mu.weights) radii.push_back(std::pow(wb / ball_volume(k), 1.0 / k));
    return reifenberg_check(mu.points, radii, k, x0, r, opt);
}

StratumSample detect_stratum(const Field& u, int k, double eps, double r, const Vec& x0, double R,
                             const StratumOptions& opt) {
    const int n = u.dim();
    if (static_cast<int>(x0.size()) != n) fail(ErrorKind::DimensionMismatch, "centre dimension");
    if (k < 0 || k > n) fail(ErrorKind::InvalidArgument, "k out of range");
    if (!(r > 0.0) || !(R >= r)) fail(ErrorKind::InvalidArgument, "scales out of order");
    StratumSample out;
    out.spacing = r;
    int L = std::max(0, static_cast<int>(std::floor(std::log2(R / (2.0 * r)))));
    out.levels = L + 1;

    using Key = std::vector<int>;
    auto to_point = [&](const Key& q) {
        Vec y(n);
        for (int a = 0; a < n; ++a) y[a] = x0[a] + r * q[a];
        return y;
    };
    auto in_region = [&](const Key& q) {
        double s = 0.0;
        for (int a = 0; a < n; ++a) s += static_cast<double>(q[a]) * q[a];
        return std::sqrt(s) * r <= R * (1.0 + 1e-12);
    };

    std::set<Key> cand;
    {
        int step = 1 << L;
        int span = static_cast<int>(std::floor(R / (r * step)));
        Key q(n, -span);
        for (;;) {
            Key full(n);
            for (int a = 0; a < n; ++a) full[a] = q[a] * step;
            if (in_region(full)) cand.insert(full);
            int a = 0;
            while (a < n && ++q[a] > span) q[a++] = -span;
            if (a == n) break;
        }
    }

    std::vector<Key> members;
    for (int level = L; level >= 0; --level) {
        double h = std::ldexp(r, level);
        std::vector<Key> list(cand.begin(), cand.end());
        std::vector<char> keep(list.size(), 0), undet(list.size(), 0);
        parallel_for(list.size(), [&](size_t i) {
            if (h >= 1.0) {
                keep[i] = 1;
                return;
            }
            // neighbours tend to turn symmetric at the same scale
            thread_local int hint = 0;
            Membership m = stratum_membership(u, to_point(list[i]), k, eps, h, opt.quad, opt.mode, hint);
            if (m.exit_scale >= 0) hint = m.exit_scale;
            keep[i] = m.member && !m.undetermined;
            undet[i] = m.undetermined;
        });
        out.checked += list.size();
        members.clear();
        for (size_t i = 0; i < list.size(); ++i) {
            if (keep[i]) members.push_back(list[i]);
            if (level == 0 && undet[i]) ++out.undetermined;
        }
        if (level == 0) break;
        cand.clear();
        int half = 1 << (level - 1);
        for (const Key& m : members) {
            Key off(n, -1);
            for (;;) {
                Key q = m;
                for (int a = 0; a < n; ++a) q[a] += off[a] * half;
                if (in_region(q)) cand.insert(q);
                int a = 0;
                while (a < n && ++off[a] > 1) off[a++] = -1;
                if (a == n) break;
            }
        }
    }
    for (const Key& q : members) out.points.push_back(to_point(q));
    return out;
}

const char* ball_label_name(BallLabel label) {
    switch (label) {
        case BallLabel::Good: return "good";
        case BallLabel::Bad: return "bad";
        case BallLabel::TerminalR: return "terminal-r";
        case BallLabel::EnergyDrop: return "energy-drop";
    }
    return "unknown";
}

namespace {

struct CoverBuilder {
    const Field& u;
    CoverParams p;
    const std::vector<Vec>& stratum;
    int n;
    int depth_cap;
    std::vector<Vec> unit_sample;

    double vt(const Vec& y, double s) const { return vartheta(u, y, s, p.quad).value; }

    Vec vt_many(const std::vector<Vec>& ys, double s) const {
        Vec out(ys.size());
        parallel_for(ys.size(), [&](size_t i) { out[i] = vt(ys[i], s); });
        return out;
    }

    std::vector<Vec> sample_ball(const Vec& x, double rad) const {
        std::vector<Vec> ys;
        for (const Vec& z : unit_sample) {
            Vec y(n);
            for (int a = 0; a < n; ++a) y[a] = x[a] + rad * z[a];
            ys.push_back(std::move(y));
        }
        return ys;
    }

    std::vector<size_t> stratum_in(const Vec& x, double rad, const std::vector<size_t>& from) const {
        std::vector<size_t> out;
        for (size_t i : from)
            if (dist2(stratum[i].data(), x.data(), n) <= rad * rad * (1.0 + 1e-12)) out.push_back(i);
        return out;
    }

    // E = sup vartheta_s over B_2s(x): sample, then a coordinate search around the best.
    double energy(const Vec& x, double s, const std::vector<size_t>& near) const {
        std::vector<Vec> ys = sample_ball(x, 2.0 * s);
        for (size_t i : near) ys.push_back(stratum[i]);
        Vec v = vt_many(ys, s);
        size_t arg = std::max_element(v.begin(), v.end()) - v.begin();
        Vec best = ys[arg];
        double E = v[arg];
        for (double h = 0.1 * s; h > 0.005 * s; h *= 0.5) {
            bool moved = true;
            while (moved) {
                moved = false;
                for (int a = 0; a < n && !moved; ++a)
                    for (double sg : {-1.0, 1.0}) {
                        Vec y = best;
                        y[a] += sg * h;
                        if (dist2(y.data(), x.data(), n) > 4.0 * s * s) continue;
                        double val = vt(y, s);
                        if (val > E) {
                            E = val;
                            best = y;
                            moved = true;
                            break;
                        }
                    }
            }
        }
        return E;
    }

    void refine(BallNode& node, const std::vector<size_t>& mine) {
        if (node.depth > depth_cap) fail(ErrorKind::NonTermination, "cover recursion exceeded its depth cap");
        const double s = node.radius;
        const Vec& x = node.center;
        node.stratum_points = mine;

        std::vector<size_t> near = stratum_in(x, 2.0 * s, all_indices);
        node.energy = energy(x, s, near);
        const double E = node.energy;

        std::vector<Vec> cands = sample_ball(x, 2.0 * s);
        for (size_t i : near) cands.push_back(stratum[i]);
        Vec small = vt_many(cands, p.rho * s / 20.0);
        for (size_t i = 0; i < cands.size(); ++i)
            if (small[i] > E - p.delta) node.pinch.push_back(cands[i]);

        SpanResult span = effective_span(node.pinch, p.rho * s / 20.0);
        node.span = node.pinch.empty() ? -1 : span.k;
        if (node.span < p.k) {
            node.label = BallLabel::Bad;
            node.plane.base = node.pinch.empty() ? x : span.basis_points[0];
            for (size_t i = 1; i < span.basis_points.size(); ++i)
                node.plane.frame.push_back(sub(span.basis_points[i], span.basis_points[0]));
            gram_schmidt(node.plane.frame);
            return;
        }
        node.label = BallLabel::Good;
        node.plane.base = span.basis_points[0];
        for (int i = 1; i <= p.k; ++i) node.plane.frame.push_back(sub(span.basis_points[i], span.basis_points[0]));
        gram_schmidt(node.plane.frame);

        const double rc = std::max(p.rho * s, p.r);
        std::vector<Vec> centers = lattice_children(node, rc, mine);
        std::vector<char> off(centers.size(), 0);
        // Stratum points the tube lattice missed get their own balls.
        for (size_t i : mine) {
            bool covered = false;
            for (const Vec& c : centers)
                if (dist2(c.data(), stratum[i].data(), n) <= rc * rc * (1.0 + 1e-12)) {
                    covered = true;
                    break;
                }
            if (!covered) {
                centers.push_back(stratum[i]);
                off.push_back(1);
            }
        }
        Vec check = vt_many(centers, rc / 20.0);
        for (size_t c = 0; c < centers.size(); ++c) {
            BallNode child;
            child.center = centers[c];
            child.radius = rc;
            child.depth = node.depth + 1;
            child.off_plane = off[c];
            child.center_check = check[c] > E - p.xi;
            std::vector<size_t> sub_mine = stratum_in(child.center, rc, mine);
            if (rc <= p.r * (1.0 + 1e-12)) {
                child.label = BallLabel::TerminalR;
                child.stratum_points = sub_mine;
            } else {
                Vec drop = vt_many(sample_ball(child.center, 2.0 * rc), rc);
                double sup = *std::max_element(drop.begin(), drop.end());
                if (sup <= E - p.delta) {
                    child.label = BallLabel::EnergyDrop;
                    child.stratum_points = sub_mine;
                } else {
                    refine(child, sub_mine);
                }
            }
            node.children.push_back(std::move(child));
        }
    }

    // Lattice points of the good plane whose rc-ball meets a stratum point of the node.
    std::vector<Vec> lattice_children(const BallNode& node, double rc, const std::vector<size_t>& mine) const {
        const int k = p.k;
        const AffineSubspace& L = node.plane;
        if (k == 0) return {L.base};
        const double h = std::min(rc, 1.8 * rc / std::sqrt(static_cast<double>(k)));
        std::set<std::vector<long>> keys;
        for (size_t i : mine) {
            Vec w = sub(stratum[i], L.base);
            Vec t(k);
            double perp2 = dot(w, w);
            for (int a = 0; a < k; ++a) {
                t[a] = dot(w, L.frame[a]);
                perp2 -= t[a] * t[a];
            }
            perp2 = std::max(perp2, 0.0);
            if (perp2 > rc * rc) continue;
            double reach = std::sqrt(rc * rc - perp2);
            std::vector<long> lo(k), hi(k), q(k);
            for (int a = 0; a < k; ++a) {
                lo[a] = static_cast<long>(std::ceil((t[a] - reach) / h));
                hi[a] = static_cast<long>(std::floor((t[a] + reach) / h));
                if (lo[a] > hi[a]) goto next;
                q[a] = lo[a];
            }
            for (;;) {
                double d2 = perp2;
                for (int a = 0; a < k; ++a) d2 += (q[a] * h - t[a]) * (q[a] * h - t[a]);
                if (d2 <= rc * rc * (1.0 + 1e-12)) keys.insert(q);
                int a = 0;
                while (a < k && ++q[a] > hi[a]) {
                    q[a] = lo[a];
                    ++a;
                }
                if (a == k) break;
            }
        next:;
        }
        std::vector<Vec> out;
        for (const auto& q : keys) {
            Vec c = L.base;
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < n; ++b) c[b] += q[a] * h * L.frame[a][b];
            if (dist2(c.data(), node.center.data(), n) <= (node.radius + rc) * (node.radius + rc)) out.push_back(c);
        }
        return out;
    }

    std::vector<size_t> all_indices;
};

void tally(const BallNode& node, CoverTree& tree) {
    tree.max_depth = std::max(tree.max_depth, node.depth);
    if (node.children.empty()) {
        ++tree.leaves;
        if (node.label == BallLabel::TerminalR) ++tree.terminal_r;
        tree.leaf_tally += std::pow(node.radius, tree.params.k);
    }
    for (const BallNode& c : node.children) tally(c, tree);
}

void collect_leaves(const BallNode& node, std::vector<const BallNode*>& out) {
    if (node.children.empty()) out.push_back(&node);
    for (const BallNode& c : node.children) collect_leaves(c, out);
}

bool disjoint_children(const BallNode& node) {
    const int n = static_cast<int>(node.center.size());
    const auto& ch = node.children;
    for (size_t i = 0; i < ch.size(); ++i)
        for (size_t j = i + 1; j < ch.size(); ++j) {
            double lim = 0.1 * (ch[i].radius + ch[j].radius);
            if (dist2(ch[i].center.data(), ch[j].center.data(), n) < lim * lim) return false;
        }
    for (const BallNode& c : ch)
        if (!disjoint_children(c)) return false;
    return true;
}

}  // namespace

CoverTree build_cover(const Field& u, const CoverParams& params, const std::vector<Vec>* stratum) {
    const int n = u.dim();
    CoverParams p = params;
    if (p.x0.empty()) p.x0.assign(n, 0.0);
    if (static_cast<int>(p.x0.size()) != n) fail(ErrorKind::DimensionMismatch, "x0 dimension");
    if (!(p.r > 0.0 && p.r < p.R && p.R <= 1.0)) fail(ErrorKind::InvalidArgument, "scales out of order");
    if (!(p.rho > 0.0 && p.rho < 0.01)) fail(ErrorKind::InvalidArgument, "rho must lie in (0, 1/100)");
    if (p.k < 0 || p.k > n) fail(ErrorKind::InvalidArgument, "k out of range");
    if (p.delta < 0.0) p.delta = p.eps / 4.0;
    if (p.xi < 0.0) p.xi = p.eps / 4.0;
    if (!u.contains_ball(p.x0, p.R * (2.0 + std::sqrt(10.0))))
        fail(ErrorKind::OutOfDomain, "cover region leaves the field domain");

    CoverTree tree;
    tree.params = p;
    std::vector<Vec> pts = stratum ? *stratum : detect_stratum(u, p.k, p.eps, p.r, p.x0, p.R).points;
    for (const Vec& y : pts) {
        if (static_cast<int>(y.size()) != n) fail(ErrorKind::DimensionMismatch, "stratum point dimension");
        if (dist2(y.data(), p.x0.data(), n) <= p.R * p.R * (1.0 + 1e-12)) tree.stratum.push_back(y);
    }
    if (tree.stratum.empty()) return tree;

    CoverBuilder b{u, p, tree.stratum, n, 0, halton_ball(n, p.samples_per_orthant << n), {}};
    b.depth_cap = static_cast<int>(std::ceil(std::log(p.r / p.R) / std::log(p.rho))) + 2;
    b.all_indices.resize(tree.stratum.size());
    std::iota(b.all_indices.begin(), b.all_indices.end(), 0);

    BallNode root;
    root.center = p.x0;
    root.radius = p.R;
    b.refine(root, b.all_indices);
    tree.roots.push_back(std::move(root));
    for (const BallNode& rt : tree.roots) tally(rt, tree);
    return tree;
}

std::vector<const BallNode*> cover_leaves(const CoverTree& tree) {
    std::vector<const BallNode*> out;
    for (const BallNode& r : tree.roots) collect_leaves(r, out);
    return out;
}

bool siblings_disjoint(const CoverTree& tree) {
    for (const BallNode& r : tree.roots)
        if (!disjoint_children(r)) return false;
    return true;
}

bool stratum_covered(const CoverTree& tree) {
    std::vector<const BallNode*> leaves = cover_leaves(tree);
    for (const Vec& y : tree.stratum) {
        bool hit = false;
        for (const BallNode* l : leaves)
            if (dist2(l->center.data(), y.data(), static_cast<int>(y.size())) <=
                l->radius * l->radius * (1.0 + 1e-12)) {
                hit = true;
                break;
            }
        if (!hit) return false;
    }
    return true;
}

}  // namespace strata
