#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "net.hpp"
#include "rng.hpp"

using namespace relufd;

namespace {

Params make_111(double w1, double b1, double w2) {
    Params p = Params::zeros(Architecture({1, 1, 1}));
    p.W[0](0, 0) = w1;
    p.b[0][0] = b1;
    p.W[1](0, 0) = w2;
    return p;
}

VectorXd vec1(double x) {
    VectorXd v(1);
    v[0] = x;
    return v;
}

}  // namespace

TEST_CASE("param count formula") {
    CHECK(Architecture({1, 1, 1}).param_count() == 3);
    CHECK(Architecture({2, 5, 3, 3}).param_count() == 42);
    CHECK(Architecture({5, 5, 5, 5, 1}).param_count() == 95);
    CHECK(Architecture({2, 4, 3, 1}).param_count() == 12 + 15 + 3);
}

TEST_CASE("fdim upper bound") {
    CHECK(fdim_upper_bound(Architecture({5, 5, 5, 5, 1})) == 80);
    CHECK(fdim_upper_bound(Architecture({1, 1, 1})) == 2);
    CHECK(fdim_upper_bound(Architecture({2, 5, 3, 3})) == 34);
}

TEST_CASE("architecture validation") {
    std::string why;
    CHECK(!Architecture({3}).valid(&why));
    CHECK(!Architecture({2, 0, 1}).valid(&why));
    CHECK(Architecture({2, 3, 1}).valid());
    CHECK_THROWS(Architecture::parse("2,-1,3"));
    CHECK(Architecture::parse("2,5,3,3").widths == std::vector<int>({2, 5, 3, 3}));
}

TEST_CASE("forward on tiny nets") {
    Params p = make_111(1, 0, 1);
    CHECK(forward(p, vec1(-2)).output[0] == 0.0);
    CHECK(forward(p, vec1(3)).output[0] == 3.0);
    Params q = make_111(2, -1, -1);
    CHECK(forward(q, vec1(2)).output[0] == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK_THROWS(forward(p, VectorXd::Zero(2)));
}

TEST_CASE("trace invariants") {
    Rng r(3);
    Params p = he_init(Architecture({3, 4, 4, 2}), 11);
    for (int t = 0; t < 50; ++t) {
        VectorXd x(3);
        for (int i = 0; i < 3; ++i) x[i] = r.normal();
        EvalTrace tr = forward(p, x);
        for (const auto& a : tr.a) CHECK((a.array() >= 0).all());
        for (size_t l = 0; l < tr.a.size(); ++l)
            CHECK((tr.a[l] - tr.z[l].cwiseMax(0.0)).cwiseAbs().maxCoeff() == 0.0);
        CHECK((tr.output - tr.z.back()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("ternary label") {
    Params p = make_111(2, -1, 1);
    CHECK(ternary_label(p, vec1(0.5)).s[0][0] == 0);
    CHECK(ternary_label(p, vec1(1)).s[0][0] == 1);
    CHECK(ternary_label(p, vec1(0)).s[0][0] == -1);
    Ternary t = ternary_label(p, vec1(1));
    CHECK(t.dim_per_layer() == std::vector<int>({1, 1}));
}

TEST_CASE("hidden ternary zeros are measure zero at random inputs") {
    // the output pre-activation can vanish identically on dead regions, so
    // only the hidden signs are generic
    Params p = he_init(Architecture({2, 3, 3, 1}), 5);
    Rng r(17);
    for (int t = 0; t < 10000; ++t) {
        VectorXd x(2);
        x[0] = r.normal();
        x[1] = r.normal();
        Ternary lab = ternary_label(p, x, 0.0);
        lab.s.pop_back();
        CHECK(lab.all_pm());
    }
}

TEST_CASE("local affinity inside a region") {
    Params p = he_init(Architecture({2, 4, 3, 1}), 23);
    Rng r(29);
    int checked = 0;
    for (int t = 0; t < 200 && checked < 30; ++t) {
        VectorXd x(2), v(2);
        for (int i = 0; i < 2; ++i) {
            x[i] = r.normal();
            v[i] = 0.01 * r.normal();
        }
        Ternary l0 = ternary_label(p, x);
        Ternary l1 = ternary_label(p, x + v);
        Ternary lm = ternary_label(p, x + 0.5 * v);
        if (!(l0 == l1) || !(l0 == lm) || !l0.all_pm()) continue;
        double f0 = forward(p, x).output[0];
        double f1 = forward(p, x + v).output[0];
        double fm = forward(p, x + 0.5 * v).output[0];
        CHECK(std::abs(fm - 0.5 * (f0 + f1)) < 1e-12);
        ++checked;
    }
    CHECK(checked >= 30);
}

TEST_CASE("he init determinism and variance") {
    Architecture arch({10, 10, 1});
    Params a = he_init(arch, 123);
    Params b = he_init(arch, 123);
    CHECK((a.to_flat() - b.to_flat()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.to_flat() - he_init(arch, 124).to_flat()).cwiseAbs().maxCoeff() > 0.0);

    // aggregate many draws of W^1 entries and biases
    double wsum2 = 0, bsum2 = 0;
    int wn = 0, bn = 0;
    for (int seed = 0; seed < 1000; ++seed) {
        Params p = he_init(arch, seed);
        wsum2 += p.W[0].array().square().sum();
        wn += static_cast<int>(p.W[0].size());
        bsum2 += p.b[0].array().square().sum();
        bn += static_cast<int>(p.b[0].size());
    }
    CHECK(std::abs(wsum2 / wn - 0.2) < 0.02 * 0.2);
    CHECK(std::abs(bsum2 / bn - 0.01) < 0.05 * 0.01);
}

TEST_CASE("flat view bijection") {
    Architecture arch({2, 3, 2});
    Params p = he_init(arch, 77);
    VectorXd flat = p.to_flat();
    CHECK(flat.size() == arch.param_count());
    for (long long i = 0; i < flat.size(); ++i) {
        Params q = p;
        q.flat_set(i, flat[i] + 1.0);
        VectorXd f2 = q.to_flat();
        int changed = 0;
        for (long long j = 0; j < flat.size(); ++j)
            if (f2[j] != flat[j]) ++changed;
        CHECK(changed == 1);
        CHECK(q.flat_get(i) == flat[i] + 1.0);
    }
    Params rt = Params::from_flat(arch, flat);
    CHECK((rt.to_flat() - flat).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("flat layout order") {
    // layer-major, row-major weights then biases, output weights last
    Architecture arch({2, 2, 1});
    Params p = Params::zeros(arch);
    p.W[0] << 1, 2, 3, 4;
    p.b[0] << 5, 6;
    p.W[1] << 7, 8;
    VectorXd flat = p.to_flat();
    VectorXd want(8);
    want << 1, 2, 3, 4, 5, 6, 7, 8;
    CHECK((flat - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("json round trip") {
    Params p = he_init(Architecture({2, 3, 3, 2}), 99);
    Params q = params_from_json(to_json(p));
    CHECK((p.to_flat() - q.to_flat()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("json error cases") {
    CHECK_THROWS(params_from_json("not json"));
    CHECK_THROWS(params_from_json(
        R"({"arch":[1,1,1],"weights":[[[1,2]],[[1]]],"biases":[[0]]})"));
    CHECK_THROWS(params_from_json(
        R"({"arch":[1,1,1],"weights":[[["x"]],[[1]]],"biases":[[0]]})"));
    CHECK_THROWS(params_from_json(R"({"arch":[1,1,1]})"));
}
