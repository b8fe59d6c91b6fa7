#include "grad.hpp"

#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"

namespace relufd {

namespace {

// Only hidden zeros are kinks: the output layer has no ReLU.  Neurons with an
// identically zero incoming map are dead, not folds, and are skipped.
bool trace_near_fold(const Params& p, const EvalTrace& t, double zero_atol) {
    for (size_t l = 0; l + 1 < t.z.size(); ++l) {
        for (int i = 0; i < t.z[l].size(); ++i) {
            if (std::abs(t.z[l][i]) > zero_atol) continue;
            if (p.W[l].row(i).lpNorm<Eigen::Infinity>() <= zero_atol &&
                std::abs(p.b[l][i]) <= zero_atol)
                continue;
            return true;
        }
    }
    return false;
}

MatrixXd grad_from_trace(const Params& p, const EvalTrace& t) {
    int d = p.arch.depth();
    int nd = p.arch.nd();
    MatrixXd G = MatrixXd::Zero(nd, p.flat_size());
    MatrixXd Delta = MatrixXd::Identity(nd, nd);   // dF / dz^{l+1}
    for (int l = d - 1; l >= 0; --l) {
        const VectorXd& a_prev = l > 0 ? t.a[l - 1] : t.x;
        long long woff = p.w_offset(l);
        int cols = static_cast<int>(p.W[l].cols());
        for (int i = 0; i < p.W[l].rows(); ++i) {
            G.block(0, woff + static_cast<long long>(i) * cols, nd, cols) =
                Delta.col(i) * a_prev.transpose();
        }
        if (l < d - 1) {
            G.block(0, p.b_offset(l), nd, p.W[l].rows()) = Delta;
        }
        if (l > 0) {
            Eigen::ArrayXd mask = (t.z[l - 1].array() > 0.0).cast<double>();
            Delta = Delta * p.W[l];
            Delta.array().rowwise() *= mask.transpose();
        }
    }
    return G;
}

}  // namespace

MatrixXd grad_wrt_params(const Params& p, const VectorXd& x) {
    EvalTrace t = forward(p, x);
    for (const auto& z : t.z)
        if (!z.allFinite()) throw std::runtime_error("non-finite pre-activation");
    return grad_from_trace(p, t);
}

PathPoly path_polynomial(const Params& p, const VectorXd& x, int k, double zero_atol) {
    if (p.arch.neuron_count() > 20)
        throw std::invalid_argument("path enumeration capped at 20 neurons");
    int d = p.arch.depth();
    if (k < 0 || k >= p.arch.nd()) throw std::invalid_argument("bad output index");
    Ternary lab = ternary_label(p, x, zero_atol);

    PathPoly out;
    out.grad = VectorXd::Zero(p.flat_size());

    // One factor of a monomial: flat parameter index (-1 for the structural
    // final-bias edge, which has no parameter and value 0) and its value.
    struct Factor {
        long long idx;
        double value;
        std::string name;
    };
    std::vector<Factor> factors;

    // Extend a partial path ending at node `node` of layer `layer` (1-based
    // layers; layer d is the output layer) up to output k.
    auto emit = [&](double x_coeff) {
        double prod = 1.0;
        for (const auto& f : factors) prod *= f.value;
        out.value += x_coeff * prod;
        for (size_t i = 0; i < factors.size(); ++i) {
            if (factors[i].idx < 0) continue;
            double rest = 1.0;
            for (size_t j = 0; j < factors.size(); ++j)
                if (j != i) rest *= factors[j].value;
            out.grad[factors[i].idx] += x_coeff * rest;
        }
        std::string term;
        for (const auto& f : factors) {
            if (!term.empty()) term += ' ';
            term += f.name;
        }
        out.terms.push_back(term);
    };

    std::function<void(int, int, double)> walk = [&](int layer, int node, double x_coeff) {
        if (layer == d) {
            if (node == k) emit(x_coeff);
            return;
        }
        // Intermediate hidden nodes must be strictly active for openness.
        if (lab.s[layer - 1][node] != 1) return;
        for (int nxt = 0; nxt < p.arch.widths[layer + 1]; ++nxt) {
            std::ostringstream nm;
            nm << 'W' << (layer + 1) << '_' << (nxt + 1) << (node + 1);
            factors.push_back({p.w_offset(layer) +
                                   static_cast<long long>(nxt) * p.W[layer].cols() + node,
                               p.W[layer](nxt, node), nm.str()});
            walk(layer + 1, nxt, x_coeff);
            factors.pop_back();
        }
    };

    // Bias-started paths, including the structural final-bias edge (the
    // network family carries no final bias, so that edge has value 0).
    for (int layer = 1; layer <= d; ++layer) {
        for (int node = 0; node < p.arch.widths[layer]; ++node) {
            if (layer == d) {
                if (node == k) {
                    std::ostringstream nm;
                    nm << 'b' << layer << '_' << (node + 1);
                    factors.push_back({-1, 0.0, nm.str()});
                    emit(1.0);
                    factors.pop_back();
                }
                continue;
            }
            std::ostringstream nm;
            nm << 'b' << layer << '_' << (node + 1);
            factors.push_back({p.b_offset(layer - 1) + node, p.b[layer - 1][node], nm.str()});
            walk(layer, node, 1.0);
            factors.pop_back();
        }
    }
    // Input-started paths.
    for (int i = 0; i < p.arch.n0(); ++i) {
        for (int node = 0; node < p.arch.widths[1]; ++node) {
            std::ostringstream nm;
            nm << "W1_" << (node + 1) << (i + 1);
            factors.push_back({p.w_offset(0) +
                                   static_cast<long long>(node) * p.W[0].cols() + i,
                               p.W[0](node, i), nm.str()});
            walk(1, node, x[i]);
            factors.pop_back();
        }
    }
    return out;
}

VectorXd sample_smooth_point(const Params& p, uint64_t seed, long long index,
                             double zero_atol, int* resamples) {
    Rng root(Rng::derive_key(seed, "z", static_cast<uint64_t>(index)));
    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng r = root.split("try", attempt);
        VectorXd x(p.arch.n0());
        for (int i = 0; i < x.size(); ++i) x[i] = r.normal();
        if (!trace_near_fold(p, forward(p, x), zero_atol)) return x;
        if (resamples) ++(*resamples);
    }
    throw std::runtime_error("could not sample a parametrically smooth point");
}

JacobianBatch batch_jacobian(const Params& p, long long m, uint64_t seed,
                             double zero_atol) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    JacobianBatch out;
    out.seed = seed;
    int nd = p.arch.nd();
    out.J.resize(m * nd, p.flat_size());
    out.Z.resize(m, p.arch.n0());
    for (long long i = 0; i < m; ++i) {
        VectorXd x = sample_smooth_point(p, seed, i, zero_atol, &out.resamples);
        out.Z.row(i) = x.transpose();
        out.J.middleRows(i * nd, nd) = grad_wrt_params(p, x);
    }
    return out;
}

int numerical_rank(const MatrixXd& M, double rel_tol) {
    if (M.size() == 0) return 0;
    Eigen::BDCSVD<MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] <= 0.0) return 0;
    double thr = rel_tol * sv[0];
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > thr) ++r;
    return r;
}

StreamingRank::StreamingRank(long long dim, double rel_tol, long long cap)
    : dim_(dim), rel_tol_(rel_tol), cap_(cap) {
    Q_.resize(dim_, 0);
}

void StreamingRank::absorb(const VectorXd& row) {
    double thr = rel_tol_ * max_norm_;
    VectorXd w = row;
    if (r_ > 0) {
        w.noalias() -= Q_.leftCols(r_) * (Q_.leftCols(r_).transpose() * row);
        // one reorthogonalization pass
        w.noalias() -= Q_.leftCols(r_) * (Q_.leftCols(r_).transpose() * w);
    }
    double nw = w.norm();
    if (nw > thr) {
        if (Q_.cols() <= r_) Q_.conservativeResize(Eigen::NoChange, r_ + 32);
        Q_.col(r_) = w / nw;
        ++r_;
        stall_ = 0;
    } else {
        ++stall_;
    }
}

void StreamingRank::build_complement() {
    long long c = dim_ - r_;
    if (c <= 0) {
        comp_mode_ = true;
        N_.resize(dim_, 0);
        return;
    }
    // Random-range complement: project a random block away from Q and keep
    // the well-conditioned left singular directions.
    Rng r(Rng::derive_key(0x5eedc0de, "complement", static_cast<uint64_t>(dim_ * 131 + r_)));
    MatrixXd G(dim_, c + 8);
    for (long long i = 0; i < G.rows(); ++i)
        for (long long j = 0; j < G.cols(); ++j) G(i, j) = r.normal();
    if (r_ > 0) {
        G.noalias() -= Q_.leftCols(r_) * (Q_.leftCols(r_).transpose() * G);
        G.noalias() -= Q_.leftCols(r_) * (Q_.leftCols(r_).transpose() * G);
    }
    Eigen::BDCSVD<MatrixXd> svd(G, Eigen::ComputeThinU);
    N_ = svd.matrixU().leftCols(c);
    comp_mode_ = true;
}

void StreamingRank::add_row(const VectorXd& row) {
    if (saturated()) return;
    max_norm_ = std::max(max_norm_, row.norm());
    if (max_norm_ <= 0.0) return;
    if (!comp_mode_) {
        absorb(row);
        if (stall_ >= 30 && dim_ - r_ < r_) build_complement();
        return;
    }
    double thr = rel_tol_ * max_norm_;
    if (N_.cols() == 0) return;
    VectorXd c = N_.transpose() * row;
    double nc = c.norm();
    if (nc <= thr) return;
    // A new direction appeared: move it from the complement into the basis.
    VectorXd w = N_ * (c / nc);
    if (Q_.cols() <= r_) Q_.conservativeResize(Eigen::NoChange, r_ + 32);
    Q_.col(r_) = w;
    ++r_;
    MatrixXd M = N_ - w * (w.transpose() * N_);
    Eigen::BDCSVD<MatrixXd> svd(M, Eigen::ComputeThinU);
    long long keep = N_.cols() - 1;
    N_ = svd.matrixU().leftCols(keep);
}

void StreamingRank::add_rows(const MatrixXd& rows) {
    if (saturated()) return;
    if (!comp_mode_) {
        for (long long i = 0; i < rows.rows(); ++i) {
            add_row(rows.row(i).transpose());
            if (saturated()) return;
            if (comp_mode_) {
                if (i + 1 < rows.rows())
                    add_rows(rows.bottomRows(rows.rows() - i - 1));
                return;
            }
        }
        return;
    }
    for (long long i = 0; i < rows.rows(); ++i)
        max_norm_ = std::max(max_norm_, rows.row(i).norm());
    double thr = rel_tol_ * max_norm_;
    if (N_.cols() == 0) return;
    MatrixXd C = rows * N_;   // block test against the complement
    for (long long i = 0; i < C.rows(); ++i) {
        if (C.row(i).norm() > thr) {
            add_row(rows.row(i).transpose());
            if (saturated()) return;
        }
    }
}

FdimEstimate estimate_fdim(const Params& p, int m_multiplier, uint64_t seed,
                           double rel_tol) {
    std::vector<int> mults = {m_multiplier};
    return estimate_fdim_multi(p, mults, seed, rel_tol).front();
}

std::vector<FdimEstimate> estimate_fdim_multi(const Params& p,
                                              const std::vector<int>& multipliers,
                                              uint64_t seed, double rel_tol) {
    if (multipliers.empty() || multipliers.front() < 1)
        throw std::invalid_argument("m_multiplier must be >= 1");
    for (size_t i = 1; i < multipliers.size(); ++i)
        if (multipliers[i] <= multipliers[i - 1])
            throw std::invalid_argument("multipliers must be strictly ascending");
    auto t0 = std::chrono::steady_clock::now();
    long long ub = fdim_upper_bound(p.arch);
    long long D = p.flat_size();
    int nd = p.arch.nd();
    const double zero_atol = 1e-12;

    StreamingRank sr(D, rel_tol, ub);
    std::vector<FdimEstimate> out;
    int resamples = 0;
    const long long block = 128;
    long long next = 0;
    for (int mult : multipliers) {
        long long m = static_cast<long long>(mult) * ub;
        while (next < m && !sr.saturated()) {
            long long take = std::min(block, m - next);
            MatrixXd rows(take * nd, D);
            for (long long i = 0; i < take; ++i) {
                VectorXd x = sample_smooth_point(p, seed, next + i, zero_atol, &resamples);
                rows.middleRows(i * nd, nd) = grad_wrt_params(p, x);
            }
            sr.add_rows(rows);
            next += take;
        }
        FdimEstimate est;
        est.rank = sr.rank();
        est.m = m;
        est.tolerance = rel_tol;
        est.upper_bound = ub;
        est.attained_max = est.rank == ub;
        est.resamples = resamples;
        est.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        out.push_back(est);
    }
    return out;
}

}  // namespace relufd
