#include "strata/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace strata {

namespace {

Vec vec_of(const Json& j, const char* what) {
    if (!j.is_array()) fail(ErrorKind::InvalidArgument, std::string(what) + " must be an array");
    Vec v;
    v.reserve(j.size());
    for (const Json& e : j) {
        if (!e.is_number()) fail(ErrorKind::InvalidArgument, std::string(what) + " must hold numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

std::vector<Vec> rows_of(const Json& j, const char* what) {
    if (!j.is_array()) fail(ErrorKind::InvalidArgument, std::string(what) + " must be an array");
    std::vector<Vec> out;
    for (const Json& e : j) out.push_back(vec_of(e, what));
    return out;
}

const Json& need(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) fail(ErrorKind::InvalidArgument, std::string("missing key ") + key);
    return j.at(key);
}

double num(const Json& j, const char* key) {
    const Json& v = need(j, key);
    if (!v.is_number()) fail(ErrorKind::InvalidArgument, std::string(key) + " must be a number");
    return v.get<double>();
}

int integer(const Json& j, const char* key) {
    const Json& v = need(j, key);
    if (!v.is_number_integer()) fail(ErrorKind::InvalidArgument, std::string(key) + " must be an integer");
    return v.get<int>();
}

Json node_json(const BallNode& b) {
    Json j;
    j["center"] = b.center;
    j["radius"] = b.radius;
    j["label"] = ball_label_name(b.label);
    j["depth"] = b.depth;
    if (!b.children.empty() || b.span >= 0) {
        j["energy"] = b.energy;
        j["span"] = b.span;
        j["pinch_count"] = b.pinch.size();
    }
    if (b.plane.k() > 0) j["plane"] = subspace_to_json(b.plane);
    j["center_check"] = b.center_check;
    j["off_plane"] = b.off_plane;
    j["stratum_points"] = b.stratum_points.size();
    Json kids = Json::array();
    for (const BallNode& c : b.children) kids.push_back(node_json(c));
    j["children"] = std::move(kids);
    return j;
}

}  // namespace

Json field_to_json(const Field& u) {
    const ProblemParams& pp = u.params();
    Json j;
    switch (u.kind()) {
        case FieldKind::Zero:
            j["kind"] = "zero";
            j["n"] = pp.n;
            j["p"] = pp.p;
            break;
        case FieldKind::PowerLaw: {
            const PowerLawData& d = u.power();
            j["kind"] = "power_law";
            j["n"] = pp.n;
            j["p"] = pp.p;
            j["m"] = d.m();
            j["c0"] = d.c;
            j["center"] = d.center;
            j["frame"] = d.frame;
            break;
        }
        case FieldKind::AffineBump: {
            const BumpData& d = u.bump();
            j["kind"] = "affine_bump";
            j["n"] = pp.n;
            j["p"] = pp.p;
            j["amp"] = d.amp;
            j["slope"] = d.slope;
            j["center"] = d.center;
            j["width"] = d.width;
            break;
        }
        case FieldKind::Grid: {
            const GridData& g = u.grid_data();
            j["n"] = pp.n;
            j["p"] = pp.p;
            j["origin"] = g.origin;
            j["spacing"] = g.spacing;
            j["shape"] = g.shape;
            Json vals = Json::array();
            for (size_t i = 0; i < g.size(); ++i) vals.push_back(g.at(i));
            j["values"] = std::move(vals);
            j["capped_cells"] = g.capped_cells();
            break;
        }
    }
    return j;
}

Field field_from_json(const Json& j) {
    if (!j.is_object()) fail(ErrorKind::InvalidArgument, "field document must be an object");
    ProblemParams pp = ProblemParams::make(integer(j, "n"), num(j, "p"));
    if (j.contains("values")) {
        std::vector<int> shape;
        for (const Json& s : need(j, "shape")) shape.push_back(s.get<int>());
        std::vector<int> capped;
        if (j.contains("capped_cells"))
            for (const Json& c : j.at("capped_cells")) capped.push_back(c.get<int>());
        return Field::grid(pp, vec_of(need(j, "origin"), "origin"), num(j, "spacing"), shape,
                           vec_of(j.at("values"), "values"), capped);
    }
    std::string kind = need(j, "kind").get<std::string>();
    if (kind == "zero") return Field::zero(pp);
    if (kind == "affine_bump")
        return Field::affine_bump(pp, num(j, "amp"), vec_of(need(j, "slope"), "slope"),
                                  vec_of(need(j, "center"), "center"), num(j, "width"));
    if (kind == "power_law") {
        Vec center = j.contains("center") ? vec_of(j.at("center"), "center") : Vec(pp.n, 0.0);
        std::vector<Vec> frame = j.contains("frame") ? rows_of(j.at("frame"), "frame") : std::vector<Vec>{};
        if (j.contains("m") && integer(j, "m") != static_cast<int>(frame.size()))
            fail(ErrorKind::BadFrame, "m does not match the frame");
        if (!j.contains("c0")) return make_singular_solution(pp.n, pp.p, static_cast<int>(frame.size()), center, frame);
        return Field::power_law(pp, num(j, "c0"), center, frame);
    }
    fail(ErrorKind::InvalidArgument, "unknown field kind " + kind);
}

Json measure_to_json(const DiscreteMeasure& mu) {
    Json j;
    j["points"] = mu.points;
    j["weights"] = mu.weights;
    return j;
}

DiscreteMeasure measure_from_json(const Json& j) {
    DiscreteMeasure mu;
    mu.points = rows_of(need(j, "points"), "points");
    mu.weights = vec_of(need(j, "weights"), "weights");
    mu.validate();
    return mu;
}

Json quad_to_json(const QuadOptions& q) {
    Json j;
    j["radial"] = q.radial;
    j["axial"] = q.axial;
    j["angular"] = q.angular;
    j["tolerance"] = q.tolerance;
    j["skip_capped"] = q.skip_capped;
    return j;
}

Json subspace_to_json(const AffineSubspace& s) {
    Json j;
    j["k"] = s.k();
    j["base"] = s.base;
    j["frame"] = s.frame;
    return j;
}

Json density_scan_to_json(const DensityScan& scan) {
    Json j;
    j["x"] = scan.x;
    j["rule"] = scan.rule;
    j["radial_nodes"] = scan.radial_nodes;
    j["angular_nodes"] = scan.angular_nodes;
    j["r"] = scan.radii;
    j["theta"] = scan.theta;
    j["vartheta"] = scan.vartheta;
    j["W"] = scan.gap;
    j["tol"] = scan.tol;
    return j;
}

Json strata_report_to_json(const StrataReport& report, int n) {
    Json j;
    j["eps"] = report.eps;
    j["r_min"] = report.r_min;
    j["scales"] = report.scales;
    Json pts = Json::array();
    for (const PointStrata& p : report.points) {
        Json q;
        q["x"] = p.x;
        q["stratum"] = p.stratum;
        q["undetermined"] = p.undetermined;
        q["regularity"] = p.regularity;
        std::vector<int> member(p.member.begin(), p.member.end());
        q["member"] = member;
        Json gaps = Json::array(), gtol = Json::array(), defs = Json::array(), mtol = Json::array();
        for (const ScaleProbe& s : p.scales) {
            if (s.r < 0) {
                gaps.push_back(nullptr);
                gtol.push_back(nullptr);
                defs.push_back(nullptr);
                mtol.push_back(nullptr);
                continue;
            }
            gaps.push_back(s.gap);
            gtol.push_back(s.gap_tol);
            Vec d(n);
            for (int k = 1; k <= n; ++k) d[k - 1] = s.min_deficit(k);
            defs.push_back(d);
            mtol.push_back(s.moment_tol);
        }
        q["gap"] = std::move(gaps);
        q["gap_tol"] = std::move(gtol);
        q["deficit"] = std::move(defs);
        q["deficit_tol"] = std::move(mtol);
        pts.push_back(std::move(q));
    }
    j["points"] = std::move(pts);
    return j;
}

std::string strata_report_csv(const StrataReport& report, int n) {
    std::ostringstream os;
    for (int a = 0; a < n; ++a) os << "x" << a << ",";
    os << "r,gap,gap_tol";
    for (int k = 1; k <= n; ++k) os << ",deficit_" << k;
    os << ",stratum\n";
    for (const PointStrata& p : report.points)
        for (const ScaleProbe& s : p.scales) {
            if (s.r < 0) continue;
            for (double c : p.x) os << format_double(c) << ",";
            os << format_double(s.r) << "," << format_double(s.gap) << "," << format_double(s.gap_tol);
            for (int k = 1; k <= n; ++k) os << "," << format_double(s.min_deficit(k));
            os << "," << p.stratum << "\n";
        }
    return os.str();
}

Json packing_report_to_json(const PackingReport& rep) {
    Json j;
    j["k"] = rep.k;
    j["x0"] = rep.x0;
    j["r"] = rep.r;
    j["centers"] = rep.centers;
    j["t"] = rep.t_values;
    j["hypothesis_by_t"] = rep.hypothesis_by_t;
    j["hypothesis_ratio"] = rep.hypothesis_ratio;
    j["packing_ratio"] = rep.packing_ratio;
    j["hypothesis_ok"] = rep.hypothesis_ok;
    j["packing_ok"] = rep.packing_ok;
    return j;
}

Json cover_tree_to_json(const CoverTree& tree) {
    const CoverParams& p = tree.params;
    Json params;
    params["k"] = p.k;
    params["eps"] = p.eps;
    params["r"] = p.r;
    params["R"] = p.R;
    params["rho"] = p.rho;
    params["delta"] = p.delta;
    params["xi"] = p.xi;
    params["x0"] = p.x0;
    params["samples_per_orthant"] = p.samples_per_orthant;
    params["quad"] = quad_to_json(p.quad);
    Json j;
    j["params"] = std::move(params);
    j["stratum_points"] = tree.stratum.size();
    j["leaves"] = tree.leaves;
    j["terminal_r"] = tree.terminal_r;
    j["leaf_tally"] = tree.leaf_tally;
    j["max_depth"] = tree.max_depth;
    Json roots = Json::array();
    for (const BallNode& b : tree.roots) roots.push_back(node_json(b));
    j["roots"] = std::move(roots);
    return j;
}

Json tail_to_json(const TailResult& tail, int j_order) {
    Json j;
    j["j"] = j_order;
    j["lambda"] = tail.lambdas;
    j["measure"] = tail.measures;
    j["unresolved"] = tail.unresolved;
    j["exponent"] = tail.exponent;
    j["q"] = -tail.exponent;
    j["residual"] = tail.residual;
    j["fit_points"] = tail.fit_points;
    return j;
}

std::string tail_csv(const TailResult& tail) {
    std::ostringstream os;
    os << "lambda,measure\n";
    for (size_t i = 0; i < tail.lambdas.size(); ++i)
        os << format_double(tail.lambdas[i]) << "," << format_double(tail.measures[i]) << "\n";
    return os.str();
}

Json error_to_json(const Error& e) {
    Json j;
    j["error"] = error_kind_name(e.kind());
    j["message"] = e.what();
    j["exit_code"] = is_numerical_guard(e.kind()) ? 3 : 2;
    return j;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::InvalidArgument, "cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path);
    out << text;
    if (!out) fail(ErrorKind::InvalidArgument, "write failed for " + path);
}

Json read_json(const std::string& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidArgument, path + ": " + e.what());
    }
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace strata
