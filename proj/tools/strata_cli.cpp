// strata: batch front end for the library.
//
//   strata <command> [--config FILE] [flags]
//
// Config files hold "key = value" lines mirroring the long flags; a flag on
// the command line overrides the same key from the file.

#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "strata/io.hpp"

using namespace strata;

namespace {

struct FieldSource {
    std::string path;
    std::string inline_json;
    std::string kind = "power_law";
    int n = 5;
    double p = 2.5;
    int m = 0;
    Vec center;
};

void add_field_flags(CLI::App* cmd, FieldSource& f) {
    cmd->add_option("--field", f.path, "field JSON file (analytic or grid)");
    cmd->add_option("--field-json", f.inline_json, "inline field JSON");
    cmd->add_option("--kind", f.kind, "inline analytic kind: power_law, zero")->capture_default_str();
    cmd->add_option("--n", f.n, "dimension")->capture_default_str();
    cmd->add_option("--p", f.p, "exponent")->capture_default_str();
    cmd->add_option("--m", f.m, "invariant directions of the power law")->capture_default_str();
    cmd->add_option("--center", f.center, "singular centre (default origin)")->delimiter(',');
}

// Frame along the last m axes.
std::vector<Vec> axis_frame(int n, int m) {
    std::vector<Vec> frame;
    for (int i = 0; i < m; ++i) {
        Vec e(n, 0.0);
        e[n - 1 - i] = 1.0;
        frame.push_back(e);
    }
    return frame;
}

Field load_field(const FieldSource& f) {
    if (!f.path.empty()) return field_from_json(read_json(f.path));
    if (!f.inline_json.empty()) {
        try {
            return field_from_json(Json::parse(f.inline_json));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::InvalidArgument, std::string("--field-json: ") + e.what());
        }
    }
    Vec center = f.center.empty() ? Vec(f.n, 0.0) : f.center;
    if (static_cast<int>(center.size()) != f.n) fail(ErrorKind::DimensionMismatch, "--center has the wrong length");
    if (f.kind == "zero") return Field::zero(ProblemParams::make(f.n, f.p));
    if (f.kind == "power_law") return make_singular_solution(f.n, f.p, f.m, center, axis_frame(f.n, f.m));
    fail(ErrorKind::InvalidArgument, "unknown --kind " + f.kind);
}

Vec point_or_origin(const Vec& x, int n, const char* what) {
    if (x.empty()) return Vec(n, 0.0);
    if (static_cast<int>(x.size()) != n) fail(ErrorKind::DimensionMismatch, std::string(what) + " has the wrong length");
    return x;
}

QuadOptions quad_of(int radial, int axial, int angular) {
    QuadOptions q;
    q.radial = radial;
    q.axial = axial;
    q.angular = angular;
    if (radial < 2 || axial < 2 || angular < 2) fail(ErrorKind::InvalidArgument, "node counts must be at least 2");
    return q;
}

// Geometric ladder lo..hi with count entries.
std::vector<double> ladder(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) fail(ErrorKind::InvalidArgument, "ladder needs 0 < lo < hi and count >= 2");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    return out;
}

std::vector<Vec> points_from_json(const Json& j) {
    const Json& arr = j.is_object() && j.contains("points") ? j.at("points") : j;
    if (!arr.is_array()) fail(ErrorKind::InvalidArgument, "points file must hold an array of points");
    std::vector<Vec> out;
    for (const Json& p : arr) out.push_back(p.get<Vec>());
    return out;
}

// Uniform points in B_R(x0) by rejection from the cube.
std::vector<Vec> random_ball_points(const Vec& x0, double R, int count, unsigned long seed) {
    std::mt19937_64 rng(seed);
    const int n = static_cast<int>(x0.size());
    std::vector<Vec> out;
    while (static_cast<int>(out.size()) < count) {
        Vec y(n);
        double s = 0.0;
        for (int a = 0; a < n; ++a) {
            // 53 random bits, independent of the library's distribution code
            double t = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            y[a] = 2.0 * t - 1.0;
            s += y[a] * y[a];
        }
        if (s >= 1.0) continue;
        for (int a = 0; a < n; ++a) y[a] = x0[a] + R * y[a];
        out.push_back(y);
    }
    return out;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text(path, text);
}

// Every option of the command that carries a value, for provenance.
Json resolved_config(const CLI::App* cmd) {
    Json j;
    j["command"] = cmd->get_name();
    for (const CLI::Option* opt : cmd->get_options()) {
        std::string name = opt->get_single_name();
        if (name == "help" || name == "config" || name.empty()) continue;
        if (opt->count() > 0) {
            std::string v;
            for (const std::string& s : opt->results()) v += (v.empty() ? "" : ",") + s;
            j[name] = v;
        } else {
            j[name] = opt->get_default_str();
        }
    }
    return j;
}

// Flat key = value config file, '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::map<std::string, std::string> out;
    std::istringstream in(read_text(path));
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r");
        size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::InvalidArgument, path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

// Config entries become flags unless the command line already has them.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::string config;
    std::set<std::string> given;
    for (size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0) continue;
        std::string key = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
        given.insert(key);
        if (key == "config") {
            if (a.find('=') != std::string::npos)
                config = a.substr(a.find('=') + 1);
            else if (i + 1 < args.size())
                config = args[i + 1];
        }
    }
    if (config.empty() || args.empty()) return args;
    std::vector<std::string> out(args.begin(), args.begin() + 1);  // the subcommand
    for (const auto& [key, value] : read_config(config))
        if (!given.count(key)) out.push_back("--" + key + "=" + value);
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

int report_error(const Error& e) {
    std::cerr << error_to_json(e).dump() << "\n";
    return is_numerical_guard(e.kind()) ? 3 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantitative stratification toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_path, csv_path;

    // synth
    FieldSource synth_f;
    double grid_h = 0.0, grid_side = 2.0;
    Vec grid_origin;
    auto* synth = app.add_subcommand("synth", "emit an analytic field, or sample it to a grid");
    add_field_flags(synth, synth_f);
    synth->add_option("--grid-h", grid_h, "grid spacing; 0 emits the analytic spec")->capture_default_str();
    synth->add_option("--grid-side", grid_side, "grid box side")->capture_default_str();
    synth->add_option("--grid-origin", grid_origin, "grid box corner (default -side/2 in every axis)")->delimiter(',');

    // density-scan
    FieldSource ds_f;
    Vec ds_x;
    std::vector<double> ds_radii;
    double ds_rlo = 0.05, ds_rhi = 0.4;
    int ds_count = 8;
    int radial = 32, axial = 32, angular = 8;
    auto* dscan = app.add_subcommand("density-scan", "theta, vartheta and W_r along a radius ladder");
    add_field_flags(dscan, ds_f);
    dscan->add_option("--x", ds_x, "probe point (default origin)")->delimiter(',');
    dscan->add_option("--radii", ds_radii, "explicit increasing radii")->delimiter(',');
    dscan->add_option("--r-lo", ds_rlo, "smallest radius of the ladder")->capture_default_str();
    dscan->add_option("--r-hi", ds_rhi, "largest radius of the ladder")->capture_default_str();
    dscan->add_option("--count", ds_count, "ladder length")->capture_default_str();

    // strata
    FieldSource st_f;
    std::string st_points;
    Vec st_x0;
    double st_eps = 1.0, st_rmin = 1.0 / 64, st_R = 1.0;
    int st_sample = 0;
    unsigned long seed = 1;
    std::string st_mode = "gap";
    auto* strata = app.add_subcommand("strata", "per-point stratum report");
    add_field_flags(strata, st_f);
    strata->add_option("--points", st_points, "JSON file with points to classify");
    strata->add_option("--sample", st_sample, "random points in B_R(x0) when no file is given")->capture_default_str();
    strata->add_option("--x0", st_x0, "sample centre (default origin)")->delimiter(',');
    strata->add_option("--R", st_R, "sample radius")->capture_default_str();
    strata->add_option("--eps", st_eps, "symmetry threshold")->capture_default_str();
    strata->add_option("--r-min", st_rmin, "smallest dyadic scale")->capture_default_str();
    strata->add_option("--mode", st_mode, "homogeneity test: gap or radial")->capture_default_str();
    strata->add_option("--seed", seed, "sampling seed")->capture_default_str();

    // fit-plane
    std::string fp_measure;
    Vec fp_x;
    double fp_r = 1.0;
    int fp_k = 1;
    auto* fit = app.add_subcommand("fit-plane", "displacement and best k-plane of a measure");
    fit->add_option("--measure", fp_measure, "measure JSON {points, weights}")->required();
    fit->add_option("--x", fp_x, "ball centre (default origin)")->delimiter(',');
    fit->add_option("--r", fp_r, "ball radius")->capture_default_str();
    fit->add_option("--k", fp_k, "plane dimension")->capture_default_str();

    // reifenberg
    std::string rf_measure;
    Vec rf_x0;
    double rf_r = 1.0;
    int rf_k = 1;
    ReifenbergOptions rf_opt;
    auto* reif = app.add_subcommand("reifenberg", "hypothesis integral and packing ratio of a ball measure");
    reif->add_option("--measure", rf_measure, "measure JSON, weights omega_k r^k")->required();
    reif->add_option("--x0", rf_x0, "test ball centre (default origin)")->delimiter(',');
    reif->add_option("--r", rf_r, "test ball radius")->capture_default_str();
    reif->add_option("--k", rf_k, "dimension")->capture_default_str();
    reif->add_option("--t-levels", rf_opt.t_levels, "number of t values")->capture_default_str();
    reif->add_option("--s-levels", rf_opt.s_levels, "minimum dyadic levels per integral")->capture_default_str();
    reif->add_option("--delta", rf_opt.delta, "hypothesis threshold")->capture_default_str();

    // cover
    FieldSource cv_f;
    CoverParams cv;
    Vec cv_x0;
    auto* cover = app.add_subcommand("cover", "covering tree of the detected stratum");
    add_field_flags(cover, cv_f);
    cover->add_option("--k", cv.k, "stratum index")->capture_default_str();
    cover->add_option("--eps", cv.eps, "symmetry threshold")->capture_default_str();
    cover->add_option("--r", cv.r, "terminal radius")->capture_default_str();
    cover->add_option("--R", cv.R, "root radius")->capture_default_str();
    cover->add_option("--rho", cv.rho, "child radius ratio")->capture_default_str();
    cover->add_option("--delta", cv.delta, "energy drop (negative: eps/4)")->capture_default_str();
    cover->add_option("--xi", cv.xi, "centre check slack (negative: eps/4)")->capture_default_str();
    cover->add_option("--x0", cv_x0, "root centre (default origin)")->delimiter(',');
    cover->add_option("--samples", cv.samples_per_orthant, "energy samples per orthant")->capture_default_str();

    // tail
    FieldSource tl_f;
    int tl_j = 0;
    std::vector<double> tl_lambdas;
    double tl_lo = 1.0, tl_hi = 100.0;
    int tl_count = 16;
    TailOptions tl_opt;
    auto* tail = app.add_subcommand("tail", "superlevel measures of |D^j u| and a weak-L^q fit");
    add_field_flags(tail, tl_f);
    tail->add_option("--j", tl_j, "regularity order")->capture_default_str();
    tail->add_option("--lambdas", tl_lambdas, "explicit increasing thresholds")->delimiter(',');
    tail->add_option("--lambda-lo", tl_lo, "smallest threshold of the ladder")->capture_default_str();
    tail->add_option("--lambda-hi", tl_hi, "largest threshold of the ladder")->capture_default_str();
    tail->add_option("--count", tl_count, "ladder length")->capture_default_str();
    tail->add_option("--region-center", tl_opt.center, "region centre (default origin)")->delimiter(',');
    tail->add_option("--region-radius", tl_opt.radius, "region radius")->capture_default_str();
    tail->add_option("--cells-per-scale", tl_opt.cells_per_scale, "analytic refinement density")->capture_default_str();
    tail->add_option("--max-depth", tl_opt.max_depth, "analytic refinement cap")->capture_default_str();

    for (CLI::App* cmd : {synth, dscan, strata, fit, reif, cover, tail}) {
        cmd->add_option("--config", config_path, "key = value file");
        cmd->add_option("--out", out_path, "JSON output path (default stdout)");
    }
    for (CLI::App* cmd : {dscan, strata, tail}) cmd->add_option("--csv", csv_path, "CSV output path");
    for (CLI::App* cmd : {dscan, strata, cover}) {
        cmd->add_option("--radial", radial, "radial nodes")->capture_default_str();
        cmd->add_option("--axial", axial, "axial nodes")->capture_default_str();
        cmd->add_option("--angular", angular, "angular nodes")->capture_default_str();
    }

    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    try {
        args = merge_config(args);
    } catch (const Error& e) {
        return report_error(e);
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        Json j;
        j["error"] = "InvalidArgument";
        j["message"] = e.what();
        j["exit_code"] = 2;
        std::cerr << j.dump() << "\n";
        return 2;
    }

    try {
        if (synth->parsed()) {
            Field u = load_field(synth_f);
            if (grid_h > 0.0) {
                Vec origin = grid_origin.empty() ? Vec(u.dim(), -grid_side / 2) : grid_origin;
                if (static_cast<int>(origin.size()) != u.dim())
                    fail(ErrorKind::DimensionMismatch, "--grid-origin has the wrong length");
                u = sample_to_grid(u, origin, grid_side, grid_h);
            }
            emit(out_path, field_to_json(u).dump(2) + "\n");
        } else if (dscan->parsed()) {
            Field u = load_field(ds_f);
            std::vector<double> radii = ds_radii.empty() ? ladder(ds_rlo, ds_rhi, ds_count) : ds_radii;
            DensityScan scan = density_scan(u, point_or_origin(ds_x, u.dim(), "--x"), radii, quad_of(radial, axial, angular));
            Json j;
            j["config"] = resolved_config(dscan);
            j["scan"] = density_scan_to_json(scan);
            if (!csv_path.empty()) write_text(csv_path, density_scan_csv(scan));
            emit(out_path, j.dump(2) + "\n");
        } else if (strata->parsed()) {
            Field u = load_field(st_f);
            HomogeneityMode mode = HomogeneityMode::DensityGap;
            if (st_mode == "radial")
                mode = HomogeneityMode::RadialDeficit;
            else if (st_mode != "gap")
                fail(ErrorKind::InvalidArgument, "--mode must be gap or radial");
            if (!(st_eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
            std::vector<Vec> pts;
            if (!st_points.empty())
                pts = points_from_json(read_json(st_points));
            else if (st_sample > 0)
                pts = random_ball_points(point_or_origin(st_x0, u.dim(), "--x0"), st_R, st_sample, seed);
            else
                fail(ErrorKind::InvalidArgument, "strata needs --points or --sample");
            StrataReport rep = strata_report(u, pts, st_eps, st_rmin, quad_of(radial, axial, angular), mode);
            Json j;
            j["config"] = resolved_config(strata);
            j["report"] = strata_report_to_json(rep, u.dim());
            if (!csv_path.empty()) write_text(csv_path, strata_report_csv(rep, u.dim()));
            emit(out_path, j.dump(2) + "\n");
        } else if (fit->parsed()) {
            DiscreteMeasure mu = measure_from_json(read_json(fp_measure));
            Vec x = point_or_origin(fp_x, mu.dim(), "--x");
            Displacement d = displacement(mu, x, fp_r, fp_k);
            MomentSpectrum s = moment_spectrum(mu, x, fp_r);
            Json j;
            j["config"] = resolved_config(fit);
            j["displacement"] = d.value;
            j["minimizer"] = subspace_to_json(d.minimizer);
            j["mass"] = s.mass;
            j["x_cm"] = s.x_cm;
            j["eigenvalues"] = s.values;
            j["eigenvectors"] = s.vectors;
            emit(out_path, j.dump(2) + "\n");
        } else if (reif->parsed()) {
            DiscreteMeasure mu = measure_from_json(read_json(rf_measure));
            PackingReport rep = reifenberg_check(mu, rf_k, point_or_origin(rf_x0, mu.dim(), "--x0"), rf_r, rf_opt);
            Json j;
            j["config"] = resolved_config(reif);
            j["report"] = packing_report_to_json(rep);
            emit(out_path, j.dump(2) + "\n");
        } else if (cover->parsed()) {
            Field u = load_field(cv_f);
            cv.x0 = point_or_origin(cv_x0, u.dim(), "--x0");
            cv.quad = quad_of(radial, axial, angular);
            if (!(cv.eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
            CoverTree tree = build_cover(u, cv);
            Json j;
            j["config"] = resolved_config(cover);
            j["tree"] = cover_tree_to_json(tree);
            emit(out_path, j.dump(2) + "\n");
        } else if (tail->parsed()) {
            Field u = load_field(tl_f);
            std::vector<double> lambdas = tl_lambdas.empty() ? ladder(tl_lo, tl_hi, tl_count) : tl_lambdas;
            TailResult res = tail_distribution(u, tl_j, lambdas, tl_opt);
            Json j;
            j["config"] = resolved_config(tail);
            j["tail"] = tail_to_json(res, tl_j);
            if (!csv_path.empty()) write_text(csv_path, tail_csv(res));
            emit(out_path, j.dump(2) + "\n");
        }
    } catch (const Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        Json j;
        j["error"] = "InternalError";
        j["message"] = e.what();
        j["exit_code"] = 2;
        std::cerr << j.dump() << "\n";
        return 2;
    }
    return 0;
}
