#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace relufd {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Widths (n_0, ..., n_d).  d layer maps; the final one is affine with no bias.
struct Architecture {
    std::vector<int> widths;

    Architecture() = default;
    explicit Architecture(std::vector<int> w) : widths(std::move(w)) {}

    int depth() const { return static_cast<int>(widths.size()) - 1; }
    int n0() const { return widths.front(); }
    int nd() const { return widths.back(); }
    int hidden_count() const;   // sum of n_1 .. n_{d-1}
    int neuron_count() const;   // sum of n_1 .. n_d
    long long param_count() const;

    bool valid(std::string* why = nullptr) const;
    std::string to_string() const;   // e.g. "2,5,3,3"
    static Architecture parse(const std::string& s);

    bool operator==(const Architecture& o) const { return widths == o.widths; }
};

long long fdim_upper_bound(const Architecture& arch);

// Structured parameters.  W[l] maps activations of layer l (width n_l) to
// pre-activations of layer l+1; b[l] exists for l = 0 .. d-2 only.
struct Params {
    Architecture arch;
    std::vector<MatrixXd> W;
    std::vector<VectorXd> b;

    static Params zeros(const Architecture& arch);

    long long flat_size() const { return arch.param_count(); }
    long long w_offset(int l) const;   // flat index of W[l](0,0)
    long long b_offset(int l) const;   // flat index of b[l](0)

    VectorXd to_flat() const;
    static Params from_flat(const Architecture& arch, const VectorXd& flat);

    double flat_get(long long i) const;
    void flat_set(long long i, double v);
};

struct EvalTrace {
    VectorXd x;
    std::vector<VectorXd> z;   // pre-activations, layers 1..d
    std::vector<VectorXd> a;   // post-activations, layers 1..d-1
    VectorXd output;           // == z.back()
};

// Per-layer sign tuples in {-1,0,+1}, layers 1..d.
struct Ternary {
    std::vector<VectorXi> s;

    std::vector<int> dim_per_layer() const;   // count of +1 entries per layer
    int zero_count() const;
    std::string key() const;                  // "+-0|++-" style, layers joined by '|'
    bool all_pm() const;                      // no zero entries

    bool operator==(const Ternary& o) const;
};

EvalTrace forward(const Params& p, const VectorXd& x);
Ternary ternary_label(const Params& p, const VectorXd& x, double zero_atol = 1e-12);

Params he_init(const Architecture& arch, uint64_t seed, double bias_std = 0.1);

std::string to_json(const Params& p);
Params params_from_json(const std::string& text);

void save_params(const Params& p, const std::string& path);
Params load_params(const std::string& path);

}  // namespace relufd
