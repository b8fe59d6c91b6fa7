#include "symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "regions.hpp"
#include "rng.hpp"
#include "grad.hpp"

namespace relufd {

namespace {

void require_hidden_layer(const Params& p, int layer) {
    if (layer < 1 || layer > p.arch.depth() - 1)
        throw std::invalid_argument("layer must be hidden (1..d-1)");
}

VectorXd normal_input(const Params& p, Rng& r) {
    VectorXd x(p.arch.n0());
    for (int i = 0; i < x.size(); ++i) x[i] = r.normal();
    return x;
}

}  // namespace

Params apply_permutation(const Params& p, int layer, const std::vector<int>& perm) {
    require_hidden_layer(p, layer);
    int n = p.arch.widths[layer];
    if (static_cast<int>(perm.size()) != n)
        throw std::invalid_argument("permutation length mismatch");
    std::vector<bool> hit(n, false);
    for (int v : perm) {
        if (v < 0 || v >= n || hit[v])
            throw std::invalid_argument("not a permutation");
        hit[v] = true;
    }
    Params q = p;
    for (int i = 0; i < n; ++i) {
        q.W[layer - 1].row(i) = p.W[layer - 1].row(perm[i]);
        q.b[layer - 1][i] = p.b[layer - 1][perm[i]];
        q.W[layer].col(i) = p.W[layer].col(perm[i]);
    }
    return q;
}

Params apply_scaling(const Params& p, int layer, int neuron, double c) {
    require_hidden_layer(p, layer);
    if (c <= 0) throw std::invalid_argument("scaling factor must be positive");
    if (neuron < 1 || neuron > p.arch.widths[layer])
        throw std::invalid_argument("bad neuron index");
    Params q = p;
    q.W[layer - 1].row(neuron - 1) *= c;
    q.b[layer - 1][neuron - 1] *= c;
    q.W[layer].col(neuron - 1) /= c;
    return q;
}

std::vector<DeadFinding> detect_stably_unactivated(const Params& p, double margin,
                                                   uint64_t seed, int samples) {
    if (margin <= 0) throw std::invalid_argument("margin must be positive");
    std::vector<DeadFinding> out;
    int d = p.arch.depth();
    // sampled census of pre-activations
    Rng rng(Rng::derive_key(seed, "dead-census"));
    std::vector<std::vector<char>> always_low;
    for (int l = 0; l < d; ++l)
        always_low.emplace_back(p.arch.widths[l + 1], 1);
    for (int s = 0; s < samples; ++s) {
        EvalTrace t = forward(p, normal_input(p, rng));
        for (int l = 0; l < d; ++l)
            for (int i = 0; i < t.z[l].size(); ++i)
                if (t.z[l][i] >= -margin) always_low[l][i] = 0;
    }
    for (int l = 2; l <= d; ++l) {
        for (int i = 1; i <= p.arch.widths[l]; ++i) {
            // inputs to layer l are nonnegative, so all-negative weights and a
            // negative bias keep the pre-activation away from zero
            double bias = l <= d - 1 ? p.b[l - 1][i - 1] : 0.0;
            bool orthant = (p.W[l - 1].row(i - 1).array() <= -margin).all() &&
                           bias <= -margin;
            if (orthant) {
                out.push_back({l, i, DeadCriterion::orthant});
            } else if (always_low[l - 1][i - 1]) {
                out.push_back({l, i, DeadCriterion::sampled});
            }
        }
    }
    return out;
}

std::vector<CoactiveFinding> detect_never_coactive(const Params& p, uint64_t seed,
                                                   int samples) {
    std::vector<CoactiveFinding> out;
    int d = p.arch.depth();
    if (d < 3) return out;   // downstream neuron must gate, i.e. be hidden
    if (p.arch.n0() <= 3) {
        Geometry g = enumerate_regions(p, Bbox::cube(p.arch.n0()));
        for (int l = 1; l <= d - 2; ++l) {
            for (int i = 1; i <= p.arch.widths[l]; ++i) {
                for (int j = 1; j <= p.arch.widths[l + 1]; ++j) {
                    bool co = false;
                    for (const auto& r : g.regions) {
                        if (r.pattern.s[l - 1][i - 1] == 1 &&
                            r.pattern.s[l][j - 1] == 1) {
                            co = true;
                            break;
                        }
                    }
                    if (!co) out.push_back({l, i, j, true});
                }
            }
        }
        return out;
    }
    Rng rng(Rng::derive_key(seed, "coactive-census"));
    std::vector<std::vector<std::vector<char>>> co(d - 2);
    for (int l = 1; l <= d - 2; ++l)
        co[l - 1].assign(p.arch.widths[l],
                         std::vector<char>(p.arch.widths[l + 1], 0));
    for (int s = 0; s < samples; ++s) {
        EvalTrace t = forward(p, normal_input(p, rng));
        for (int l = 1; l <= d - 2; ++l)
            for (int i = 0; i < p.arch.widths[l]; ++i)
                if (t.z[l - 1][i] > 0)
                    for (int j = 0; j < p.arch.widths[l + 1]; ++j)
                        if (t.z[l][j] > 0) co[l - 1][i][j] = 1;
    }
    for (int l = 1; l <= d - 2; ++l)
        for (int i = 0; i < p.arch.widths[l]; ++i)
            for (int j = 0; j < p.arch.widths[l + 1]; ++j)
                if (!co[l - 1][i][j]) out.push_back({l, i + 1, j + 1, false});
    return out;
}

std::vector<CollapseFinding> detect_collapse(const Params& p) {
    if (p.arch.n0() > 3)
        throw std::invalid_argument("collapse detection requires n0 <= 3");
    Geometry g = enumerate_regions(p, Bbox::cube(p.arch.n0()));
    std::vector<CollapseFinding> out;
    int d = p.arch.depth();
    for (const auto& r : g.regions) {
        for (int l = 1; l <= d - 1; ++l) {
            for (int i = 1; i <= p.arch.widths[l]; ++i) {
                if (r.pattern.s[l - 1][i - 1] != 1) continue;   // dedupe: + side
                Ternary flip = r.pattern;
                flip.s[l - 1][i - 1] = -1;
                const Region* other = g.find(flip.key());
                if (!other) continue;
                double dmax = (r.A - other->A).cwiseAbs().maxCoeff();
                dmax = std::max(dmax, (r.c - other->c).cwiseAbs().maxCoeff());
                if (dmax <= 1e-9)
                    out.push_back({r.pattern.key(), flip.key(), l, i});
            }
        }
    }
    return out;
}

std::pair<int, int> detect_lowdim_image(const Params& p, int layer, int samples,
                                        uint64_t seed) {
    if (layer < 1 || layer > p.arch.depth())
        throw std::invalid_argument("bad layer");
    int nl = p.arch.widths[layer];
    if (samples < 10 * nl) throw std::invalid_argument("need at least 10*n_l samples");
    Rng rng(Rng::derive_key(seed, "image-dim"));
    MatrixXd pts(samples, nl);
    for (int s = 0; s < samples; ++s) {
        EvalTrace t = forward(p, normal_input(p, rng));
        if (layer < p.arch.depth())
            pts.row(s) = t.a[layer - 1].transpose();
        else
            pts.row(s) = t.output.transpose();
    }
    pts.rowwise() -= pts.colwise().mean();
    int dim = numerical_rank(pts, 1e-9);
    return {dim, nl - dim};
}

Params rotate_neuron_family(const Params& p, int layer, int neuron, const VectorXd& o,
                            const VectorXd& s_H, double t) {
    require_hidden_layer(p, layer);
    if (neuron < 1 || neuron > p.arch.widths[layer])
        throw std::invalid_argument("bad neuron index");
    int nin = p.arch.widths[layer - 1];
    if (o.size() != nin || s_H.size() != nin)
        throw std::invalid_argument("dimension mismatch for o or s_H");
    if (o.norm() <= 1e-10) throw std::invalid_argument("o must be nonzero");
    VectorXd w = p.W[layer - 1].row(neuron - 1).transpose();
    double b = p.b[layer - 1][neuron - 1];
    if (std::abs(w.dot(s_H) + b) > 1e-10 * std::max(1.0, w.norm() * s_H.norm() + std::abs(b)))
        throw std::invalid_argument("anchor does not lie on the neuron hyperplane");
    Params q = p;
    q.W[layer - 1].row(neuron - 1) = (w + t * o).transpose();
    q.b[layer - 1][neuron - 1] = b - t * s_H.dot(o);
    return q;
}

bool fiber_witness_check(const Params& a, const Params& b, int n_samples, uint64_t seed,
                         double tol) {
    if (!(a.arch == b.arch)) throw std::invalid_argument("architecture mismatch");
    Rng rng(Rng::derive_key(seed, "fiber"));
    double worst = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        VectorXd x = normal_input(a, rng);
        worst = std::max(worst,
                         (forward(a, x).output - forward(b, x).output).cwiseAbs().maxCoeff());
        if (worst >= tol) return false;
    }
    return worst < tol;
}

}  // namespace relufd
