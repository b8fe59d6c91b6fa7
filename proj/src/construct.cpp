#include "construct.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"
#include <json.hpp>

namespace relufd {

using nlohmann::json;

std::pair<VectorXd, double> positive_axis_hyperplane(int dim, uint64_t seed,
                                                     double bias_scale) {
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (bias_scale <= 0) throw std::invalid_argument("bias_scale must be positive");
    Rng r(Rng::derive_key(seed, "pos-axis"));
    VectorXd w(dim);
    for (int i = 0; i < dim; ++i) w[i] = r.uniform(0.5, 1.5);
    return {w, -bias_scale};
}

namespace {

// Truncation of the first L layer maps, with a dummy width-1 output so the
// hidden bias of layer L is retained.  Dummy row is all ones.
Params truncated(const Params& full, int L) {
    std::vector<int> widths(full.arch.widths.begin(), full.arch.widths.begin() + L + 1);
    widths.push_back(1);
    Params t = Params::zeros(Architecture(widths));
    for (int l = 0; l < L; ++l) {
        t.W[l] = full.W[l];
        t.b[l] = full.b[l];
    }
    t.W[L] = MatrixXd::Ones(1, full.arch.widths[L]);
    return t;
}

// Chain pattern (+1^k, -1^rest) on layers 1..L.
Ternary chain_pattern(const Architecture& arch, int L, int k) {
    Ternary t;
    for (int l = 1; l <= L; ++l) {
        VectorXi s = VectorXi::Constant(arch.widths[l], -1);
        for (int i = 0; i < k && i < arch.widths[l]; ++i) s[i] = 1;
        t.s.push_back(s);
    }
    return t;
}

bool prefix_matches(const Ternary& pattern, const Ternary& chain) {
    for (size_t l = 0; l < chain.s.size(); ++l)
        if (pattern.s[l] != chain.s[l]) return false;
    return true;
}

// Post-activation affine map of real layer L on a region of truncated(., L).
std::pair<MatrixXd, VectorXd> masked_image_map(const Region& r, int L) {
    MatrixXd A = r.preacts.C[L - 1];
    VectorXd c = r.preacts.e[L - 1];
    for (int i = 0; i < A.rows(); ++i) {
        if (r.pattern.s[L - 1][i] <= 0) {
            A.row(i).setZero();
            c[i] = 0.0;
        }
    }
    return {A, c};
}

struct StepResult {
    bool ok = false;
    double beta = 0.0;
    double bbox_radius = 0.0;
    VectorXd meet_point;     // domain point where the base plane meets S
    VectorXd image_point;    // its image, the common clone point
    int retries = 0;
    std::string fail;
};

}  // namespace

std::pair<Params, ConstructionState> construct_no_hidden_symmetry(
    const Architecture& arch, uint64_t seed, const ConstructOptions& opt) {
    std::string why;
    if (!arch.valid(&why)) throw std::invalid_argument(why);
    int k = arch.n0();
    int d = arch.depth();
    if (k > 3)
        throw std::invalid_argument("construction requires n0 <= 3 (geometric witness search)");
    for (int l = 1; l <= d; ++l) {
        if (arch.widths[l] < k) {
            std::ostringstream os;
            os << "width condition violated: n_" << l << " = " << arch.widths[l]
               << " < n_0 = " << k;
            throw std::invalid_argument(os.str());
        }
    }

    Rng root(Rng::derive_key(seed, "construct"));
    json log;
    log["arch"] = arch.widths;
    log["seed"] = seed;
    log["layers"] = json::array();

    Params p = Params::zeros(arch);

    // Layer 1: k near-axis hyperplanes, the rest kept away from the chain
    // cell with all-negative weights and biases.
    {
        Rng r1 = root.split("layer", 1);
        for (int i = 0; i < arch.widths[1]; ++i) {
            if (i < k) {
                for (int j = 0; j < k; ++j)
                    p.W[0](i, j) = (i == j ? 1.0 : 0.0) + 0.05 * r1.normal();
                if (d > 1) p.b[0][i] = 0.05 * r1.normal();
            } else {
                for (int j = 0; j < k; ++j) p.W[0](i, j) = r1.uniform(-1.5, -0.5);
                if (d > 1) p.b[0][i] = r1.uniform(-1.5, -0.5);
            }
        }
        json rec;
        rec["layer"] = 1;
        rec["kind"] = "near-axis";
        log["layers"].push_back(rec);
    }

    double bbox_radius = 10.0;
    std::vector<VectorXd> witnesses;

    // Hidden layers 2..d-1: positive-axis hyperplane with geometric bias
    // growth, cloned through a common image point, then flipped beyond k.
    for (int L = 2; L <= d - 1; ++L) {
        Rng rl = root.split("layer", L);
        int nin = arch.widths[L - 1];
        auto [u, b0] = positive_axis_hyperplane(nin, rl.split("axis").key(), 1.0);
        (void)b0;
        Ternary chain = chain_pattern(arch, L - 1, k);

        StepResult step;
        double beta = 1.0;
        for (int retry = 0; retry < opt.max_bias_retries && !step.ok; ++retry, beta *= 2.0) {
            step.retries = retry;
            double B = 10.0 + 40.0 * beta;
            Params sub = truncated(p, L - 1);
            Geometry geom = enumerate_regions(sub, Bbox::cube(k, B));

            // (a) the base plane must cut the chain cell
            const Region* sreg = nullptr;
            for (const auto& r : geom.regions)
                if (prefix_matches(r.pattern, chain)) { sreg = &r; break; }
            if (!sreg) { step.fail = "chain cell not found"; continue; }
            auto [Aim, cim] = masked_image_map(*sreg, L - 1);
            LinCon eq{Aim.transpose() * u, u.dot(cim) - beta};
            LpResult meet = chebyshev_center(sreg->halfspaces, {eq});
            if (!meet.feasible) { step.fail = "base plane misses the chain cell"; continue; }

            // (b) the base plane's bent fold must cross every previous-layer fold
            bool pairs_ok = true;
            for (int i = 1; i <= nin && pairs_ok; ++i) {
                bool found = false;
                for (const auto& r : geom.regions) {
                    LinCon e1{r.preacts.C[L - 2].row(i - 1).transpose(),
                              r.preacts.e[L - 2][i - 1]};
                    if (e1.a.norm() < 1e-12) continue;
                    auto [Ar, cr] = masked_image_map(r, L - 1);
                    LinCon e2{Ar.transpose() * u, u.dot(cr) - beta};
                    if (e2.a.norm() < 1e-12) continue;
                    LpResult res = chebyshev_center(r.halfspaces, {e1, e2});
                    if (!res.feasible) continue;
                    MatrixXd M(2, k);
                    M.row(0) = e1.a.transpose() / e1.a.norm();
                    M.row(1) = e2.a.transpose() / e2.a.norm();
                    Eigen::JacobiSVD<MatrixXd> svd(M);
                    if (svd.singularValues().minCoeff() > 1e-9) {
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    pairs_ok = false;
                    std::ostringstream os;
                    os << "no transverse witness against neuron (" << (L - 1) << "," << i << ")";
                    step.fail = os.str();
                }
            }
            if (!pairs_ok) continue;

            step.ok = true;
            step.beta = beta;
            step.bbox_radius = B;
            step.meet_point = meet.x;
            step.image_point = Aim * meet.x + cim;
        }
        if (!step.ok) {
            std::ostringstream os;
            os << "bias growth budget exhausted at layer " << L << ": " << step.fail;
            throw std::runtime_error(os.str());
        }
        bbox_radius = step.bbox_radius;

        // clone through the common image point, verify, then flip the tail
        bool layer_ok = false;
        for (int attempt = 0; attempt < 5 && !layer_ok; ++attempt) {
            Rng rc = rl.split("clones", attempt);
            for (int j = 0; j < arch.widths[L]; ++j) {
                VectorXd wj(nin);
                for (int q = 0; q < nin; ++q)
                    wj[q] = u[q] * (1.0 + opt.clone_spread * rc.normal());
                p.W[L - 1].row(j) = wj.transpose();
                // a small offset from the common point keeps every clone
                // cutting the chain cell while breaking the concurrency of
                // the fold intersections (the bias-free output would pin all
                // of them to one corner otherwise)
                p.b[L - 1][j] = -wj.dot(step.image_point) +
                                opt.clone_bias_jitter * step.beta * rc.normal();
            }
            Params subL = truncated(p, L);
            Geometry geomL = enumerate_regions(subL, Bbox::cube(k, step.bbox_radius));
            TpicReport tp = check_tpic(geomL);
            layer_ok = true;
            for (const auto& pc : tp.pairs) {
                if (pc.l1 != L - 1 || pc.i2 > arch.widths[L]) continue;
                if (!(pc.nonempty && pc.transversal)) layer_ok = false;
                else witnesses.push_back(pc.witness);
            }
        }
        if (!layer_ok)
            throw std::runtime_error("clone verification failed at layer " +
                                     std::to_string(L));
        for (int j = k; j < arch.widths[L]; ++j) {
            p.W[L - 1].row(j) = -p.W[L - 1].row(j);
            p.b[L - 1][j] = -p.b[L - 1][j];
        }

        // chain-cell witness for S_L
        Ternary chainL = chain_pattern(arch, L, k);
        Params subL = truncated(p, L);
        Ternary padded = chainL;
        padded.s.push_back(VectorXi::Constant(1, 1));   // dummy output sign
        NeuronAffines na = pattern_preacts(subL, padded);
        std::vector<LinCon> hs;
        for (int l = 0; l < L; ++l)
            for (int i = 0; i < na.C[l].rows(); ++i) {
                double s = chainL.s[l][i] > 0 ? 1.0 : -1.0;
                hs.push_back({s * na.C[l].row(i).transpose(), s * na.e[l][i]});
            }
        for (const auto& c : Bbox::cube(k, step.bbox_radius).constraints())
            hs.push_back(c);
        LpResult sw = chebyshev_center(hs, {});
        if (!sw.feasible || sw.objective <= 1e-9)
            throw std::runtime_error("chain cell vanished at layer " + std::to_string(L));
        witnesses.push_back(sw.x);

        json rec;
        rec["layer"] = L;
        rec["kind"] = "positive-axis-clones";
        rec["beta"] = step.beta;
        rec["bias_retries"] = step.retries;
        rec["bbox_radius"] = step.bbox_radius;
        rec["common_point"] = std::vector<double>(step.image_point.data(),
                                                 step.image_point.data() + nin);
        log["layers"].push_back(rec);
    }

    // Output layer: random mixed-sign rows, accepted when the whole net
    // passes the pairwise checks.
    {
        Rng rl = root.split("layer", d);
        bool ok = false;
        int used_attempt = -1;
        std::string last_fail;
        for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
            Rng ra = rl.split("rows", attempt);
            for (int i = 0; i < arch.nd(); ++i) {
                for (int tries = 0; tries < 50; ++tries) {
                    for (int j = 0; j < arch.widths[d - 1]; ++j)
                        p.W[d - 1](i, j) = ra.normal();
                    bool pos = (p.W[d - 1].row(i).array() > 0).any();
                    bool neg = (p.W[d - 1].row(i).array() < 0).any();
                    if (arch.widths[d - 1] == 1 || (pos && neg)) break;
                }
            }
            Geometry geom = enumerate_regions(p, Bbox::cube(k, bbox_radius));
            TpicReport tp = check_tpic(geom);
            if (!tp.overall_pass) {
                for (const auto& pc : tp.pairs)
                    if (!(pc.nonempty && pc.transversal)) {
                        std::ostringstream os;
                        os << "tpic pair (" << pc.l1 << "," << pc.i1 << ")x("
                           << pc.l2 << "," << pc.i2 << "): " << pc.reason;
                        last_fail = os.str();
                        break;
                    }
                continue;
            }
            LraReport lra = check_lra_near_intersections(geom, tp);
            if (!lra.all_pass) {
                last_fail = "lra failed";
                for (const auto& c : lra.checks)
                    if (!c.pass) {
                        const auto& pc2 = tp.pairs[c.pair_index];
                        std::ostringstream os;
                        os << "lra pair (" << pc2.l1 << "," << pc2.i1 << ")x("
                           << pc2.l2 << "," << pc2.i2 << ") in " << pc2.region_key
                           << ": " << c.reason;
                        last_fail = os.str();
                        break;
                    }
                continue;
            }
            ok = true;
            used_attempt = attempt;
            for (const auto& pc : tp.pairs) witnesses.push_back(pc.witness);
        }
        if (!ok)
            throw std::runtime_error("output layer retry budget exhausted: " + last_fail);
        json rec;
        rec["layer"] = d;
        rec["kind"] = "mixed-sign-output";
        rec["attempt"] = used_attempt;
        log["layers"].push_back(rec);
    }

    // Rescale the input layer so the standard-normal rank protocol can see
    // the certified geometry.  The right scale depends on how the cells are
    // spread: too tight and rare cells are never sampled, too wide and the
    // far cells sit past the sampling tail.  Try a few and keep the first at
    // which the rank attains its bound.
    double rstar = 0.0;
    for (const auto& w : witnesses)
        if (w.size() == k) rstar = std::max(rstar, w.cwiseAbs().maxCoeff());
    double lambda = 1.0;
    if (rstar > 0) {
        MatrixXd W0 = p.W[0];
        double best_lambda = rstar / opt.target_radius;
        long long best_rank = -1;
        for (double target : {opt.target_radius, 2.0 * opt.target_radius,
                              4.0 * opt.target_radius, 0.5 * opt.target_radius}) {
            double cand = rstar / target;
            if (cand <= 1e-6) continue;
            p.W[0] = W0 * cand;
            FdimEstimate fd = estimate_fdim(p, 100, 17, 1e-6);
            if (fd.attained_max) {
                best_lambda = cand;
                best_rank = fd.rank;
                break;
            }
            if (fd.rank > best_rank) {
                best_rank = fd.rank;
                best_lambda = cand;
            }
        }
        lambda = best_lambda;
        p.W[0] = W0 * lambda;
    }
    log["rescale"] = lambda;

    // Final global perturbation restoring genericity; verified against the
    // chain witness, shrinking if a pattern breaks.
    {
        Ternary chain = chain_pattern(arch, d - 1, k);
        VectorXd chain_witness = VectorXd::Zero(k);
        if (!witnesses.empty()) chain_witness = witnesses.back() / lambda;
        Rng rp = root.split("perturb");
        VectorXd flat = p.to_flat();
        VectorXd g(flat.size());
        for (long long i = 0; i < g.size(); ++i) g[i] = rp.normal();
        double eps = opt.final_perturb;
        bool placed = false;
        for (int tries = 0; tries < 4 && !placed; ++tries, eps *= 0.1) {
            VectorXd pert = flat.array() * (1.0 + eps * g.array());
            Params cand = Params::from_flat(arch, pert);
            if (d == 1) { p = cand; log["perturb"] = eps; break; }
            Ternary lab = ternary_label(cand, chain_witness, 0.0);
            bool match = true;
            for (int l = 0; l < d - 1 && match; ++l)
                if (lab.s[l] != chain.s[l]) match = false;
            if (!match) continue;
            // the perturbed point must still carry the whole certificate
            if (!verify_construction(cand).certified) continue;
            p = cand;
            log["perturb"] = eps;
            placed = true;
        }
        if (!placed && d > 1) log["perturb"] = 0.0;
    }

    ConstructionState state;
    state.log_json = log.dump(2);
    return {p, state};
}

CertificationReport verify_construction(const Params& p, uint64_t seed) {
    if (p.arch.n0() > 3)
        throw std::invalid_argument("verification requires n0 <= 3");
    CertificationReport rep;
    Geometry g = enumerate_regions(p, Bbox::cube(p.arch.n0()));
    rep.tpic = check_tpic(g);
    rep.lra = check_lra_near_intersections(g, rep.tpic);
    rep.fdim = estimate_fdim(p, 100, seed, 1e-6);
    rep.certified = rep.tpic.overall_pass && rep.lra.all_pass && rep.fdim.attained_max;
    return rep;
}

int image_dimension_probe(const Params& p, int layer, const Ternary& cell_pattern,
                          uint64_t seed) {
    if (layer < 1 || layer > p.arch.depth()) throw std::invalid_argument("bad layer");
    int n0 = p.arch.n0();
    NeuronAffines na = pattern_preacts(p, cell_pattern);
    std::vector<LinCon> ineqs;
    std::vector<LinCon> eqs;
    for (size_t l = 0; l < cell_pattern.s.size(); ++l) {
        for (int i = 0; i < cell_pattern.s[l].size(); ++i) {
            LinCon con{na.C[l].row(i).transpose(), na.e[l][i]};
            int s = cell_pattern.s[l][i];
            if (s == 0) eqs.push_back(con);
            else if (s < 0) ineqs.push_back({-con.a, -con.b});
            else ineqs.push_back(con);
        }
    }
    for (const auto& c : Bbox::cube(n0).constraints()) ineqs.push_back(c);
    LpResult ip = chebyshev_center(ineqs, eqs);
    if (!ip.feasible) throw std::runtime_error("empty cell");

    std::vector<VectorXd> pts;
    pts.push_back(ip.x);
    Rng rng(Rng::derive_key(seed, "image-probe"));
    int want = 3 * n0 + 5;
    for (int t = 0; t < want; ++t) {
        VectorXd obj(n0);
        for (int i = 0; i < n0; ++i) obj[i] = rng.normal();
        LpResult v = lp_maximize(ineqs, eqs, obj);
        if (v.feasible) pts.push_back(v.x);
    }
    int nl = p.arch.widths[layer];
    MatrixXd img(pts.size(), nl);
    for (size_t i = 0; i < pts.size(); ++i) {
        EvalTrace t = forward(p, pts[i]);
        img.row(i) = (layer < p.arch.depth() ? t.a[layer - 1] : t.output).transpose();
    }
    img.rowwise() -= img.colwise().mean();
    return numerical_rank(img, 1e-9);
}

}  // namespace relufd
