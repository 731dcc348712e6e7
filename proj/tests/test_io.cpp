#include "doctest.h"
#include "strata/io.hpp"
#include "support.hpp"

using namespace strata;

namespace {

void same_field(const Field& a, const Field& b, int n) {
    std::mt19937_64 rng(11);
    CHECK(a.kind() == b.kind());
    for (int i = 0; i < 50; ++i) {
        Vec y = ref::random_in_ball(rng, n, 0.45);
        double va = a.value(y), vb = b.value(y);
        CHECK(std::abs(va - vb) <= 1e-15 * std::max(1.0, std::abs(va)));
    }
}

}  // namespace

TEST_CASE("field documents round trip") {
    Vec e(6, 0.0);
    e[5] = 1.0;
    Field cyl = make_singular_solution(6, 3.5, 1, Vec(6, 0.01), {e});
    same_field(cyl, field_from_json(Json::parse(field_to_json(cyl).dump())), 6);

    ProblemParams pp = ProblemParams::make(3, 6.0);
    Field bump = Field::affine_bump(pp, 0.7, Vec{0.1, -0.2, 0.3}, Vec{0.05, 0, 0}, 0.2);
    same_field(bump, field_from_json(Json::parse(field_to_json(bump).dump())), 3);

    Field z = Field::zero(pp);
    Field z2 = field_from_json(field_to_json(z));
    CHECK(z2.kind() == FieldKind::Zero);
    CHECK(z2.value(Vec{0.1, 0.1, 0.1}) == 0.0);

    Field v = make_singular_solution(3, 6.0, 0, Vec(3, 0.0), {});
    Field g = sample_to_grid(v, Vec(3, -0.5), 1.0, 1.0 / 16);
    Field g2 = field_from_json(Json::parse(field_to_json(g).dump()));
    same_field(g, g2, 3);
    CHECK(g2.grid_data().spacing == g.grid_data().spacing);

    // missing c0 means the solution constant
    Json j = field_to_json(v);
    j.erase("c0");
    CHECK(field_from_json(j).power().c == v.power().c);
}

TEST_CASE("malformed documents are validation errors") {
    CHECK_THROWS_AS(field_from_json(Json::parse(R"({"kind":"power_law","n":5})")), Error);
    CHECK_THROWS_AS(field_from_json(Json::parse(R"({"kind":"spiral","n":5,"p":2.5})")), Error);
    DiscreteMeasure mu;
    mu.points = {{0, 0}, {0.5, 0.1}};
    mu.weights = {1.0, 2.5};
    DiscreteMeasure back = measure_from_json(Json::parse(measure_to_json(mu).dump()));
    CHECK(back.points == mu.points);
    CHECK(back.weights == mu.weights);
    CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"points":[[0,0]],"weights":[-1]})")), Error);
    CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"points":[[0,0],[1]],"weights":[1,1]})")), Error);
}

TEST_CASE("error mapping") {
    Json a = error_to_json(Error(ErrorKind::NonTermination, "deep"));
    CHECK(a["exit_code"] == 3);
    CHECK(a["message"] == "deep");
    CHECK(error_to_json(Error(ErrorKind::ResolutionTooCoarse, "x"))["exit_code"] == 3);
    CHECK(error_to_json(Error(ErrorKind::OutOfDomain, "x"))["exit_code"] == 2);
    CHECK(error_to_json(Error(ErrorKind::InvalidArgument, "x"))["exit_code"] == 2);
}

TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.7029098497634514) == "1.7029098497634514");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("tail csv") {
    TailResult t;
    t.lambdas = {1, 2};
    t.measures = {0.5, 0.25};
    CHECK(tail_csv(t) == "lambda,measure\n1,0.5\n2,0.25\n");
    Json j = tail_to_json(t, 0);
    CHECK(j["q"] == -t.exponent);
}
