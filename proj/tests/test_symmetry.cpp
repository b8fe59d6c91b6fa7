#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "net.hpp"
#include "symmetry.hpp"

using namespace relufd;

TEST_CASE("permutation and scaling preserve the function") {
    Params p = he_init(Architecture({3, 4, 4, 2}), 13);
    Params perm = apply_permutation(p, 1, {2, 0, 3, 1});
    CHECK(fiber_witness_check(p, perm, 500, 5, 1e-12));
    Params sc = apply_scaling(p, 2, 3, 0.37);
    CHECK(fiber_witness_check(p, sc, 500, 5, 1e-12));
    Params both = apply_scaling(apply_permutation(p, 2, {3, 2, 1, 0}), 1, 1, 5.0);
    CHECK(fiber_witness_check(p, both, 500, 5, 1e-12));

    CHECK_THROWS(apply_permutation(p, 3, {0, 1}));       // output layer
    CHECK_THROWS(apply_permutation(p, 1, {0, 0, 1, 2}));
    CHECK_THROWS(apply_scaling(p, 1, 1, -2.0));
}

TEST_CASE("fiber witness check rejects different functions") {
    Params p = he_init(Architecture({3, 4, 4, 2}), 13);
    Params q = p;
    q.W[0](0, 0) += 0.1;
    CHECK(!fiber_witness_check(p, q, 500, 5, 1e-9));
}

TEST_CASE("stably unactivated neuron in the weight orthant") {
    Params p = he_init(Architecture({5, 5, 5, 5, 1}), 4);
    p.W[1].row(2).setConstant(-1.0);   // layer 2, neuron 3
    p.b[1][2] = -0.5;
    auto found = detect_stably_unactivated(p);
    bool hit = std::any_of(found.begin(), found.end(), [](const DeadFinding& f) {
        return f.layer == 2 && f.neuron == 3 && f.criterion == DeadCriterion::orthant;
    });
    CHECK(hit);
}

TEST_CASE("a live tiny net has no dead neurons") {
    Params p = Params::zeros(Architecture({1, 1, 1}));
    p.W[0](0, 0) = 1;
    p.W[1](0, 0) = 1;
    CHECK(detect_stably_unactivated(p).empty());
}

TEST_CASE("sampled criterion catches a deep dead neuron") {
    // layer-3 neuron fed only by a neuron that never activates on N(0,1) inputs
    Params p = he_init(Architecture({2, 3, 3, 1}), 6);
    p.W[1].row(0).setConstant(0.01);
    p.b[1][0] = -1e6;                  // mixed criterion fails, samples never reach
    auto found = detect_stably_unactivated(p);
    bool hit = std::any_of(found.begin(), found.end(), [](const DeadFinding& f) {
        return f.layer == 2 && f.neuron == 1 && f.criterion == DeadCriterion::sampled;
    });
    CHECK(hit);
}

TEST_CASE("never coactive pair") {
    Params p = Params::zeros(Architecture({1, 2, 1, 1}));
    p.W[0] << 1, -1;
    p.b[0] << -1, 0;
    p.W[1] << 0, 1;
    p.b[1] << -0.1;
    p.W[2] << 1;
    auto found = detect_never_coactive(p);
    REQUIRE(found.size() == 1);
    CHECK(found[0].layer == 1);
    CHECK(found[0].i == 1);
    CHECK(found[0].j == 1);
    CHECK(found[0].exact);

    // making the downstream neuron read the coactive input clears the finding
    Params q = p;
    q.W[1] << 1, 1;
    q.b[1] << -0.1;
    CHECK(detect_never_coactive(q).empty());
}

TEST_CASE("never coactive is empty at depth two") {
    Params p = he_init(Architecture({2, 3, 1}), 8);
    CHECK(detect_never_coactive(p).empty());
}

TEST_CASE("collapsed fold") {
    Params p = Params::zeros(Architecture({1, 1, 1, 1}));
    p.W[0] << 1;
    p.b[0] << 0;
    p.W[1] << 1;
    p.b[1] << -2;
    p.W[2] << 1;
    auto found = detect_collapse(p);
    REQUIRE(found.size() == 1);
    CHECK(found[0].layer == 1);
    CHECK(found[0].neuron == 1);

    // lifting the downstream bias makes the fold visible again
    Params q = p;
    q.b[1] << 1;
    CHECK(detect_collapse(q).empty());
}

TEST_CASE("low dimensional image of duplicated neurons") {
    Params p = Params::zeros(Architecture({1, 2, 2, 1}));
    p.W[0] << 1, 1;
    p.b[0] << 0, 0;
    p.W[1] << 1, 1, 0.5, 0.3;
    p.b[1] << -2, 0.1;
    p.W[2] << 1, 1;
    auto [dim, deficiency] = detect_lowdim_image(p, 1, 500);
    CHECK(dim == 1);
    CHECK(deficiency == 1);

    Params generic = he_init(Architecture({1, 2, 2, 1}), 3);
    auto [gdim, gdef] = detect_lowdim_image(generic, 1, 500);
    CHECK(gdim == 2);
    CHECK(gdef == 0);
}

TEST_CASE("rotation family over a duplicated layer") {
    Params p = Params::zeros(Architecture({1, 2, 2, 1}));
    p.W[0] << 1, 1;
    p.b[0] << 0, 0;
    p.W[1] << 1, 1, 0.5, 0.3;
    p.b[1] << -2, 0.1;
    p.W[2] << 1, 1;

    VectorXd o(2), s_H(2);
    o << 1, -1;       // vanishes along the diagonal image of layer 1
    s_H << 1, 1;      // on the diagonal and on neuron (2,1)'s hyperplane
    for (double t : {-0.5, -0.1, 0.1, 0.5}) {
        Params q = rotate_neuron_family(p, 2, 1, o, s_H, t);
        CHECK(fiber_witness_check(p, q, 1000, 9, 1e-9));
        CHECK((p.to_flat() - q.to_flat()).cwiseAbs().maxCoeff() > 1e-3);
    }

    // breaking the duplication breaks the family
    Params broken = p;
    broken.W[0] << 1, 1.01;
    Params rb = rotate_neuron_family(broken, 2, 1, o, s_H, 0.5);
    CHECK(!fiber_witness_check(broken, rb, 1000, 9, 1e-9));

    VectorXd off(2);
    off << 5, 5;      // not on the neuron hyperplane
    CHECK_THROWS(rotate_neuron_family(p, 2, 1, o, off, 0.1));
}
