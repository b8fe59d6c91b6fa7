#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "construct.hpp"
#include "rng.hpp"
#include "symmetry.hpp"

using namespace relufd;
using nlohmann::json;

TEST_CASE("width preconditions") {
    CHECK_THROWS_AS(construct_no_hidden_symmetry(Architecture({3, 2, 3}), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(construct_no_hidden_symmetry(Architecture({4, 4, 4}), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(construct_no_hidden_symmetry(Architecture({2, 5, 1, 3}), 1),
                    std::invalid_argument);
}

TEST_CASE("positive axis hyperplane") {
    auto [w, b] = positive_axis_hyperplane(3, 5, 2.0);
    CHECK(w.size() == 3);
    CHECK((w.array() >= 0.5).all());
    CHECK((w.array() <= 1.5).all());
    CHECK(b == -2.0);
    auto [w2, b2] = positive_axis_hyperplane(3, 5, 2.0);
    CHECK((w - w2).cwiseAbs().maxCoeff() == 0.0);
    (void)b2;
}

TEST_CASE("construction is deterministic in the seed") {
    auto [p1, s1] = construct_no_hidden_symmetry(Architecture({2, 2, 2}), 3);
    auto [p2, s2] = construct_no_hidden_symmetry(Architecture({2, 2, 2}), 3);
    CHECK((p1.to_flat() - p2.to_flat()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s1.log_json == s2.log_json);
    auto [p3, s3] = construct_no_hidden_symmetry(Architecture({2, 2, 2}), 4);
    CHECK((p1.to_flat() - p3.to_flat()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("shallow construction certifies") {
    auto [p, state] = construct_no_hidden_symmetry(Architecture({2, 2, 2}), 1);
    CertificationReport rep = verify_construction(p);
    CHECK(rep.tpic.overall_pass);
    CHECK(rep.lra.all_pass);
    CHECK(rep.fdim.attained_max);
    CHECK(rep.certified);

    json log = json::parse(state.log_json);
    CHECK(log["arch"] == std::vector<int>({2, 2, 2}));
    CHECK(log["layers"].is_array());
    CHECK(log["rescale"].get<double>() > 0.0);
}

TEST_CASE("deeper construction certifies") {
    auto [p, state] = construct_no_hidden_symmetry(Architecture({2, 3, 3}), 1);
    CertificationReport rep = verify_construction(p);
    CHECK(rep.certified);
    CHECK(detect_stably_unactivated(p).empty());
    CHECK(detect_collapse(p).empty());
}

TEST_CASE("certification survives a small perturbation") {
    auto [p, state] = construct_no_hidden_symmetry(Architecture({2, 2, 2}), 1);
    Rng r(77);
    Params q = p;
    VectorXd flat = q.to_flat();
    for (long long i = 0; i < flat.size(); ++i) flat[i] *= 1.0 + 1e-7 * r.normal();
    q = Params::from_flat(q.arch, flat);
    CHECK(verify_construction(q).certified);
}

TEST_CASE("image dimension probe") {
    Params p = Params::zeros(Architecture({2, 2, 2}));
    p.W[0] << 1, 0, 0, 1;
    p.b[0] << 1, 1;
    p.W[1] << 1, 0, 0, 1;
    VectorXd x(2);
    x << 1, 1;
    Ternary cell = ternary_label(p, x);
    CHECK(image_dimension_probe(p, 1, cell) == 2);

    Params dup = p;
    dup.W[0] << 1, 0, 1, 0;   // duplicated rows flatten the image
    Ternary dcell = ternary_label(dup, x);
    CHECK(image_dimension_probe(dup, 1, dcell) == 1);
}
