// Acceptance run: one PASS/FAIL line per criterion, details in an optional
// JSON report (--report path). --quick skips criteria 6, 7 and 9.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>

#include "strata/io.hpp"
#include "support.hpp"

using namespace strata;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    Json data;
};

std::vector<Vec> axis_frame(int n, int m) {
    std::vector<Vec> f;
    for (int i = 0; i < m; ++i) {
        Vec e(n, 0.0);
        e[n - 1 - i] = 1.0;
        f.push_back(e);
    }
    return f;
}

struct Family {
    int n;
    double p;
    int m;
    Field field() const { return make_singular_solution(n, p, m, Vec(n, 0.0), axis_frame(n, m)); }
    std::string name() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "n=%d p=%g m=%d", n, p, m);
        return buf;
    }
};

const Family kFamilies[] = {{5, 2.5, 0}, {6, 3.0, 1}, {6, 3.5, 1}};

Vec random_vec(std::mt19937_64& rng, int n, double scale) {
    std::uniform_real_distribution<double> U(-scale, scale);
    Vec v(n);
    for (double& c : v) c = U(rng);
    return v;
}

double slope(const Vec& x, const Vec& y) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= x.size();
    my /= y.size();
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
    return sxy / sxx;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// 1. pointwise and integrated PDE identities
Outcome pde_identities(int fields_per_family) {
    Outcome o;
    o.pass = true;
    double worst_point = 0, worst_int = 0;
    for (const Family& f : kFamilies) {
        Field u = f.field();
        std::mt19937_64 rng(100 + f.n * 10 + f.m);
        double wp = 0;
        for (int got = 0; got < 100;) {
            Vec y = ref::random_in_ball(rng, f.n, 1.0);
            if (u.dist_to_singular(y.data()) < 0.05) continue;
            ++got;
            wp = std::max(wp, std::abs(pde_residual(u, y)) / (1.0 + std::pow(std::abs(u.value(y)), f.p)));
        }
        std::uniform_real_distribution<double> Rad(0.3, 0.6);
        double wi = 0;
        Json rows = Json::array();
        for (int t = 0; t < fields_per_family; ++t) {
            VectorTestField Y{random_vec(rng, f.n, 0.15), Rad(rng), random_vec(rng, f.n * f.n, 1.0),
                              random_vec(rng, f.n, 1.0)};
            ScalarTestFunction phi{random_vec(rng, f.n, 0.15), Rad(rng), 1.0, random_vec(rng, f.n, 1.0)};
            QuadValue s = stationarity_residual(u, Y), w = weak_residual(u, phi);
            double rs = std::abs(s.value) / s.scale, rw = std::abs(w.value) / w.scale;
            wi = std::max({wi, rs, rw});
            rows.push_back({{"stationarity", rs}, {"weak", rw}});
        }
        o.data.push_back({{"field", f.name()}, {"pointwise_relative", wp}, {"integrated_relative", rows}});
        worst_point = std::max(worst_point, wp);
        worst_int = std::max(worst_int, wi);
    }
    o.pass = worst_point <= 1e-10 && worst_int <= 1e-3;
    o.detail = fmt("worst pointwise residual %.2e (<= 1e-10), worst integrated residual %.2e (<= 1e-3)",
                   worst_point, worst_int);
    return o;
}

// 2. monotonicity along radius ladders, homogeneity at centres
Outcome monotonicity() {
    Outcome o;
    std::vector<double> radii;
    for (int i = 0; i < 20; ++i) radii.push_back(0.01 * std::pow(20.0, i / 19.0));
    size_t steps = 0, violations = 0, centre_bad = 0;
    double worst = 0;
    for (const Family& f : kFamilies) {
        Field u = f.field();
        std::mt19937_64 rng(200 + f.n * 10 + f.m);
        for (int probe = 0; probe < 50; ++probe) {
            Vec x = ref::random_in_ball(rng, f.n, 0.5);
            DensityScan s = density_scan(u, x, radii);
            for (size_t i = 0; i < radii.size(); ++i) {
                ++steps;
                if (s.gap[i] < -s.tol[i]) ++violations;
                worst = std::min(worst, s.gap[i] + s.tol[i]);
            }
        }
        // centres: the origin, plus two axis points for the cylinders
        std::vector<Vec> centres{Vec(f.n, 0.0)};
        if (f.m) {
            Vec a(f.n, 0.0);
            a[f.n - 1] = 0.3;
            centres.push_back(a);
            a[f.n - 1] = -0.45;
            centres.push_back(a);
        }
        for (const Vec& c : centres) {
            DensityScan s = density_scan(u, c, radii);
            for (size_t i = 0; i < radii.size(); ++i)
                if (std::abs(s.gap[i]) > s.tol[i]) ++centre_bad;
        }
    }
    o.pass = violations == 0 && centre_bad == 0;
    o.detail = fmt("%.0f steps, %.0f below -tol; %.0f homogeneity-centre steps above tol", double(steps),
                   double(violations), double(centre_bad));
    o.data = {{"steps", steps}, {"violations", violations}, {"centre_violations", centre_bad}, {"min_gap_plus_tol", worst}};
    return o;
}

// 3. constant density of v0 at its vertex
Outcome density_constancy() {
    Outcome o;
    Field v = kFamilies[0].field();
    double lo = 1e300, hi = -1e300, mean = 0;
    Json vals = Json::array();
    for (int i = 0; i < 8; ++i) {
        double r = 0.05 * std::pow(8.0, i / 7.0);
        double t = vartheta(v, Vec(5, 0.0), r).value;
        lo = std::min(lo, t);
        hi = std::max(hi, t);
        mean += t / 8;
        vals.push_back({{"r", r}, {"vartheta", t}});
    }
    double spread = (hi - lo) / std::abs(mean);
    o.pass = spread <= 1e-3;
    o.detail = fmt("relative spread %.2e over r in [0.05, 0.4] (<= 1e-3)", spread);
    o.data = {{"values", vals}, {"spread", spread}};
    return o;
}

// 4. displacement against frame sampling, eigen residuals
Outcome displacement_oracle() {
    Outcome o;
    std::mt19937_64 rng(400);
    std::uniform_real_distribution<double> W(0.1, 2.0);
    double worst_rel = 0, worst_res = 0;
    for (int trial = 0; trial < 100; ++trial) {
        DiscreteMeasure mu;
        for (int i = 0; i < 20; ++i) {
            mu.points.push_back(ref::random_in_ball(rng, 3, 1.0));
            mu.weights.push_back(W(rng));
        }
        for (int k : {1, 2}) {
            double a = displacement(mu, Vec(3, 0.0), 1.2, k).value;
            double b = displacement_bruteforce(mu, Vec(3, 0.0), 1.2, k, 2000, 500 + trial);
            worst_rel = std::max(worst_rel, std::abs(a - b) / std::abs(b));
        }
        MomentSpectrum s = moment_spectrum(mu, Vec(3, 0.0), 1.2);
        Vec M(9, 0.0);
        for (size_t j = 0; j < mu.size(); ++j)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    M[a * 3 + b] += mu.weights[j] * (mu.points[j][a] - s.x_cm[a]) * (mu.points[j][b] - s.x_cm[b]);
        for (int i = 0; i < 3; ++i) {
            double res = 0;
            for (int a = 0; a < 3; ++a) {
                double mv = 0;
                for (int b = 0; b < 3; ++b) mv += M[a * 3 + b] * s.vectors[i][b];
                res += (mv - s.values[i] * s.vectors[i][a]) * (mv - s.values[i] * s.vectors[i][a]);
            }
            worst_res = std::max(worst_res, std::sqrt(res) / std::max(1.0, s.values[0]));
        }
    }
    o.pass = worst_rel <= 1e-3 && worst_res <= 1e-10;
    o.detail = fmt("worst relative gap to sampling %.2e (<= 1e-3), worst eigen residual %.2e (<= 1e-10)",
                   worst_rel, worst_res);
    o.data = {{"worst_relative", worst_rel}, {"worst_eigen_residual", worst_res}};
    return o;
}

// 5. Reifenberg configurations. Scales are the ball radii of the
// configuration, checked on B_1 around a point of the set.
Outcome reifenberg() {
    Outcome o;
    bool ok = true;
    Json rows = Json::array();
    double plane_max = 0, circle_max = 0, disk_min = 1e300;
    double circle_lo = 1e300, circle_hi = 0, circle_pack = 0;
    for (int i = 0; i < 10; ++i) {
        double rb = 0.004 / std::pow(std::sqrt(2.0), i), h = 2.5 * rb;
        // line in R^2 as k=1
        std::vector<Vec> line;
        Vec lr;
        for (long j = -static_cast<long>(1.2 / h); j <= static_cast<long>(1.2 / h); ++j) {
            line.push_back({h * j, 0.0});
            lr.push_back(rb);
        }
        PackingReport pl = reifenberg_check(line, lr, 1, Vec{0, 0}, 1.0);
        // unit circle in R^3 as k=1
        std::vector<Vec> circ;
        Vec cr;
        long N = static_cast<long>(2 * ref::pi / h);
        for (long j = 0; j < N; ++j) {
            double th = 2 * ref::pi * j / N;
            circ.push_back({std::cos(th), std::sin(th), 0.0});
            cr.push_back(rb);
        }
        PackingReport pc = reifenberg_check(circ, cr, 1, circ[0], 1.0);
        plane_max = std::max(plane_max, pl.hypothesis_ratio);
        circle_max = std::max(circle_max, pc.hypothesis_ratio);
        circle_lo = std::min(circle_lo, pc.hypothesis_ratio);
        circle_hi = std::max(circle_hi, pc.hypothesis_ratio);
        circle_pack = std::max(circle_pack, pc.packing_ratio);
        ok = ok && pl.hypothesis_ratio == 0.0 && pl.packing_ratio <= 4 * ref::ball(1);
        rows.push_back({{"ball_radius", rb},
                        {"line_hypothesis", pl.hypothesis_ratio},
                        {"line_packing", pl.packing_ratio},
                        {"circle_hypothesis", pc.hypothesis_ratio},
                        {"circle_packing", pc.packing_ratio}});
    }
    // 2-plane in R^3 as k=2 at ten check radii
    {
        double rb = 0.004, h = 0.01;
        std::vector<Vec> pts;
        Vec pr;
        for (int a = -110; a <= 110; ++a)
            for (int b = -110; b <= 110; ++b) {
                pts.push_back({h * a, h * b, 0.0});
                pr.push_back(rb);
            }
        for (int i = 0; i < 10; ++i) {
            double r = 0.1 * std::pow(10.0, i / 9.0);
            PackingReport pp = reifenberg_check(pts, pr, 2, Vec{0, 0, 0}, r);
            plane_max = std::max(plane_max, pp.hypothesis_ratio);
            ok = ok && pp.hypothesis_ratio == 0.0 && pp.packing_ratio <= 4 * ref::ball(2);
            rows.push_back({{"plane_radius", r}, {"plane_hypothesis", pp.hypothesis_ratio}, {"plane_packing", pp.packing_ratio}});
        }
    }
    // a filled 2-disk in R^3 treated as k=1
    for (double rb : {0.02, 0.01, 0.005}) {
        double h = 2.5 * rb;
        std::vector<Vec> pts;
        Vec pr;
        long L = static_cast<long>(1.0 / h);
        for (long a = -L; a <= L; ++a)
            for (long b = -L; b <= L; ++b)
                if ((a * a + b * b) * h * h < 1.0) {
                    pts.push_back({h * a, h * b, 0.0});
                    pr.push_back(rb);
                }
        PackingReport pd = reifenberg_check(pts, pr, 1, Vec{0, 0, 0}, 1.0);
        disk_min = std::min(disk_min, pd.hypothesis_ratio);
        rows.push_back({{"disk_ball_radius", rb}, {"disk_hypothesis", pd.hypothesis_ratio}});
    }
    bool circle_ok = circle_hi <= 2 * circle_lo && circle_pack <= 4 * ref::ball(1);
    bool disk_ok = disk_min >= 10 * std::max(plane_max, circle_max);
    o.pass = ok && circle_ok && disk_ok;
    o.detail = std::string("planes exact 0 and packed: ") + (ok ? "yes" : "no") +
               fmt("; circle hypothesis %.3g..%.3g (spread <= 2x)", circle_lo, circle_hi) +
               fmt("; disk/max(plane,circle) %.3g (>= 10)", disk_min / std::max(plane_max, circle_max));
    o.data = rows;
    return o;
}

struct StratumRun {
    std::string name;
    int k = 0;
    double R = 0, eps = 0;
    std::vector<double> r;
    std::vector<std::vector<Vec>> points;
    std::vector<CoverTree> trees;
};

// Detection and covers shared by criteria 6 and 7.
StratumRun stratum_runs(const Family& f, double R, double frac, int levels, bool with_cover) {
    StratumRun run;
    Field u = f.field();
    run.name = f.name();
    run.k = f.m;
    run.R = R;
    StratumOptions so;
    so.quad = QuadOptions{16, 16, 8, false, true};
    double axis = scale_probe(u, Vec(f.n, 0.0), 0.1, so.quad).min_deficit(f.m + 1);
    run.eps = frac * axis;
    for (int i = 4; i < 4 + levels; ++i) {
        double r = R / (1 << i);
        StratumSample s = detect_stratum(u, f.m, run.eps, r, Vec(f.n, 0.0), R, so);
        run.r.push_back(r);
        run.points.push_back(s.points);
        if (with_cover) {
            CoverParams cp;
            cp.k = f.m;
            cp.eps = run.eps;
            cp.r = r;
            cp.R = R;
            cp.x0 = Vec(f.n, 0.0);
            cp.quad = so.quad;
            run.trees.push_back(build_cover(u, cp, &s.points));
        }
    }
    return run;
}

Outcome covering(const std::vector<StratumRun>& runs) {
    Outcome o;
    o.pass = true;
    std::string detail;
    for (const StratumRun& run : runs) {
        double lo = 1e300, hi = 0;
        bool disjoint = true, covered = true;
        Json rows = Json::array();
        for (size_t i = 0; i < run.r.size(); ++i) {
            const CoverTree& t = run.trees[i];
            double tally = t.leaves * std::pow(run.r[i], run.k) / std::pow(run.R, run.k);
            lo = std::min(lo, tally);
            hi = std::max(hi, tally);
            disjoint = disjoint && siblings_disjoint(t);
            covered = covered && stratum_covered(t);
            rows.push_back({{"r", run.r[i]},
                            {"stratum_points", run.points[i].size()},
                            {"leaves", t.leaves},
                            {"terminal_r", t.terminal_r},
                            {"count_tally", tally},
                            {"radius_tally", t.leaf_tally / std::pow(run.R, run.k)}});
        }
        bool ok = lo > 0 && hi <= 2 * lo && disjoint && covered;
        o.pass = o.pass && ok;
        detail += run.name + fmt(": tally %.4g..%.4g", lo, hi);
        detail += std::string(disjoint && covered ? " disjoint+covered; " : " disjoint/cover FAILED; ");
        o.data.push_back({{"field", run.name}, {"k", run.k}, {"R", run.R}, {"eps", run.eps}, {"rows", rows}});
    }
    o.detail = detail + "drift <= 2x";
    return o;
}

Outcome volume_law(const std::vector<StratumRun>& runs) {
    Outcome o;
    o.pass = true;
    for (const StratumRun& run : runs) {
        int n = static_cast<int>(run.points[0].empty() ? 0 : run.points[0][0].size());
        if (n == 0) {
            o.pass = false;
            o.detail += run.name + ": empty stratum; ";
            continue;
        }
        Box box{Vec(n, -run.R), Vec(n, run.R)};
        Vec lr, lv;
        Json rows = Json::array();
        for (size_t i = 0; i < run.r.size(); ++i) {
            double V = tube_volume(run.points[i], run.r[i], box, 8);
            lr.push_back(std::log(run.r[i]));
            lv.push_back(std::log(V));
            rows.push_back({{"r", run.r[i]}, {"tube_volume", V}});
        }
        double s = slope(lr, lv), want = n - run.k;
        bool ok = std::abs(s - want) <= 0.1 * want;
        o.pass = o.pass && ok;
        o.detail += run.name + fmt(": slope %.4f vs %.0f; ", s, want);
        o.data.push_back({{"field", run.name}, {"slope", s}, {"expected", want}, {"rows", rows}});
    }
    o.detail += "(within 10%)";
    return o;
}

// 8. weak-L^q tails of v0
Outcome tails() {
    Outcome o;
    Field v = kFamilies[0].field();
    double q0_want = 15.0 / 4.0, q1_want = 15.0 / 7.0;
    std::vector<double> l0, l1;
    for (int i = 0; i < 16; ++i) {
        l0.push_back(2.0 * std::pow(100.0, i / 15.0));
        l1.push_back(3.0 * std::pow(100.0, i / 15.0));
    }
    TailResult t0 = tail_distribution(v, 0, l0), t1 = tail_distribution(v, 1, l1);
    double q0 = -t0.exponent, q1 = -t1.exponent;
    double e0 = std::abs(q0 / q0_want - 1), e1 = std::abs(q1 / q1_want - 1);
    o.pass = e0 <= 0.05 && e1 <= 0.05;
    o.detail = fmt("q0 %.4f vs 15/4, q1 %.4f vs 15/7 (within 5%%)", q0, q1);
    o.data = {{"j0", tail_to_json(t0, 0)}, {"j1", tail_to_json(t1, 1)}};
    return o;
}

// 9. displacement bounded by the density drop, one fitted constant per field
Outcome beta_bound(int per_set) {
    Outcome o;
    o.pass = true;
    struct Case {
        Family f;
        int k;
    };
    for (Case c : {Case{kFamilies[0], 0}, Case{kFamilies[1], 1}}) {
        Field u = c.f.field();
        int n = c.f.n;
        QuadOptions q{32, 32, 8, false, true};
        double gamma = 0.1 * min_invariance_deficit(u, Vec(n, 0.0), 0.1, c.k + 1, q).value;
        std::mt19937_64 rng(900 + n);
        std::uniform_real_distribution<double> Ur(0.05, 0.2), Uw(0.5, 1.5), Ut(-0.3, 0.3);
        auto draw = [&](std::vector<double>& ratios) {
            int rejected = 0;
            while (static_cast<int>(ratios.size()) < per_set) {
                double r = Ur(rng);
                Vec x = ref::random_in_ball(rng, n, 0.5 * r);
                if (c.f.m) x[n - 1] = Ut(rng);
                if (min_invariance_deficit(u, x, r, c.k + 1, q).value <= gamma) {
                    ++rejected;
                    continue;
                }
                DiscreteMeasure mu;
                for (int i = 0; i < 10; ++i) {
                    mu.points.push_back(add(x, ref::random_in_ball(rng, n, 0.95 * r)));
                    mu.weights.push_back(Uw(rng));
                }
                double D = displacement(mu, x, r, c.k).value;
                double rhs = 0;
                for (size_t i = 0; i < mu.size(); ++i) rhs += mu.weights[i] * density_gap(u, mu.points[i], r, q).value;
                rhs *= std::pow(r, -c.k);
                ratios.push_back(D / rhs);
            }
            return rejected;
        };
        std::vector<double> tune, test;
        int rej = draw(tune);
        rej += draw(test);
        double tmax = *std::max_element(tune.begin(), tune.end());
        double C = 2.0 * tmax;
        int viol = 0;
        for (double v : test)
            if (v > C) ++viol;
        double xmax = *std::max_element(test.begin(), test.end());
        o.pass = o.pass && viol == 0;
        o.detail += c.f.name() + fmt(" k=%.0f: C %.3g, test max/C %.3f, ", c.k, C, xmax / C) +
                    std::to_string(viol) + " violations; ";
        o.data.push_back({{"field", c.f.name()},
                          {"k", c.k},
                          {"gamma", gamma},
                          {"tuning_max", tmax},
                          {"C", C},
                          {"test_max", xmax},
                          {"violations", viol},
                          {"rejected", rej}});
    }
    o.detail += fmt("%.0f tuning + %.0f test each", per_set, per_set);
    return o;
}

// Everything cheap enough to run twice.
Json reduced_suite() {
    Json j;
    j["density"] = density_constancy().data;
    j["displacement"] = displacement_oracle().data;
    Field v = kFamilies[0].field();
    std::vector<double> lam;
    for (int i = 0; i < 8; ++i) lam.push_back(2.0 * std::pow(2.0, i));
    j["tail"] = tail_to_json(tail_distribution(v, 0, lam), 0);
    std::mt19937_64 rng(1000);
    std::vector<Vec> pts;
    for (int i = 0; i < 6; ++i) pts.push_back(ref::random_in_ball(rng, 5, 0.4));
    j["strata"] = strata_report_to_json(strata_report(v, pts, 1.0, 1.0 / 16, QuadOptions{16, 16, 8, false, true}), 5);
    CoverParams cp;
    cp.k = 0;
    cp.r = 1.0 / 64;
    cp.R = 0.25;
    cp.x0 = Vec(5, 0.0);
    cp.eps = 0.98 * scale_probe(v, Vec(5, 0.0), 0.1, QuadOptions{16, 16, 8, false, true}).min_deficit(1);
    cp.quad = QuadOptions{16, 16, 8, false, true};
    j["cover"] = cover_tree_to_json(build_cover(v, cp));
    return j;
}

Outcome determinism() {
    Outcome o;
    const char* prev = std::getenv("STRATA_THREADS");
    std::string keep = prev ? prev : "";
    std::string a = reduced_suite().dump(1);
    setenv("STRATA_THREADS", "3", 1);
    std::string b = reduced_suite().dump(1);
    if (prev) setenv("STRATA_THREADS", keep.c_str(), 1);
    else unsetenv("STRATA_THREADS");
    o.pass = a == b;
    o.detail = std::to_string(a.size()) + " bytes, " + (o.pass ? "identical" : "different") +
               " across two runs (default and 3 workers)";
    o.data = {{"bytes", a.size()}, {"identical", o.pass}};
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::string report_path;
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--report") && i + 1 < argc) report_path = argv[++i];
        else if (!std::strcmp(argv[i], "--quick")) quick = true;
    }
    Json report;
    int failed = 0;
    auto run = [&](int id, const char* name, const std::function<Outcome()>& body) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const Error& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), sec);
        std::fflush(stdout);
        failed += !o.pass;
        report[std::to_string(id)] = {{"name", name}, {"pass", o.pass}, {"detail", o.detail}, {"data", o.data}};
    };

    run(1, "pde identities", [] { return pde_identities(5); });
    run(2, "monotonicity", monotonicity);
    run(3, "density constancy", density_constancy);
    run(4, "displacement oracle", displacement_oracle);
    run(5, "reifenberg configurations", reifenberg);
    if (!quick) {
        std::vector<StratumRun> runs;
        auto t0 = std::chrono::steady_clock::now();
        try {
            runs.push_back(stratum_runs(kFamilies[2], 1.0 / 16, 0.99, 4, true));
            runs.push_back(stratum_runs(kFamilies[0], 1.0 / 4, 0.98, 4, true));
        } catch (const Error& e) {
            std::printf("stratum detection failed: %s\n", e.what());
        }
        std::printf("(stratum detection and covers %.1fs)\n",
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        run(6, "covering tally", [&] { return covering(runs); });
        run(7, "volume law", [&] { return volume_law(runs); });
    }
    run(8, "weak-Lq tails", tails);
    if (!quick) run(9, "displacement vs density drop", [] { return beta_bound(100); });
    run(10, "determinism", determinism);

    if (!report_path.empty()) write_text(report_path, report.dump(2) + "\n");
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
