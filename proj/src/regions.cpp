#include "regions.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"

namespace relufd {

namespace {

constexpr double kInteriorTol = 1e-9;

}  // namespace

Bbox Bbox::cube(int n, double r) {
    Bbox b;
    b.lo = VectorXd::Constant(n, -r);
    b.hi = VectorXd::Constant(n, r);
    return b;
}

std::vector<LinCon> Bbox::constraints() const {
    std::vector<LinCon> out;
    int n = static_cast<int>(lo.size());
    for (int i = 0; i < n; ++i) {
        VectorXd a = VectorXd::Zero(n);
        a[i] = 1.0;
        out.push_back({a, -lo[i]});     //  x_i - lo >= 0
        a[i] = -1.0;
        out.push_back({a, hi[i]});      // -x_i + hi >= 0
    }
    return out;
}

NeuronAffines pattern_preacts(const Params& p, const Ternary& pattern) {
    int d = p.arch.depth();
    int layers = static_cast<int>(pattern.s.size());
    if (layers != d && layers != d - 1)
        throw std::invalid_argument("pattern layer count mismatch");
    NeuronAffines na;
    MatrixXd Acur = MatrixXd::Identity(p.arch.n0(), p.arch.n0());
    VectorXd ccur = VectorXd::Zero(p.arch.n0());
    for (int l = 0; l < d; ++l) {
        MatrixXd C = p.W[l] * Acur;
        VectorXd e = p.W[l] * ccur;
        if (l < d - 1) e += p.b[l];
        na.C.push_back(C);
        na.e.push_back(e);
        if (l < d - 1) {
            MatrixXd Agate = C;
            VectorXd cgate = e;
            for (int i = 0; i < C.rows(); ++i) {
                if (pattern.s[l][i] <= 0) {
                    Agate.row(i).setZero();
                    cgate[i] = 0.0;
                }
            }
            Acur = Agate;
            ccur = cgate;
        }
    }
    return na;
}

Ternary hidden_part(const Ternary& full) {
    Ternary h;
    if (!full.s.empty()) h.s.assign(full.s.begin(), full.s.end() - 1);
    return h;
}

std::pair<MatrixXd, VectorXd> region_affine_map(const Params& p, const Ternary& pattern) {
    NeuronAffines na = pattern_preacts(p, pattern);
    return {na.C.back(), na.e.back()};
}

int cell_dim_from_label(const Ternary& label, int n0) {
    int dim = n0 - label.zero_count();
    return std::max(dim, -1);
}

const Region* Geometry::find(const std::string& key) const {
    auto it = index.find(key);
    return it == index.end() ? nullptr : &regions[it->second];
}

namespace {

std::vector<LinCon> region_halfspaces(const NeuronAffines& na, const Ternary& pattern,
                                      const Bbox& bbox) {
    std::vector<LinCon> out;
    for (size_t l = 0; l < pattern.s.size(); ++l) {
        for (int i = 0; i < na.C[l].rows(); ++i) {
            double s = pattern.s[l][i] > 0 ? 1.0 : -1.0;
            out.push_back({s * na.C[l].row(i).transpose(), s * na.e[l][i]});
        }
    }
    for (const auto& c : bbox.constraints()) out.push_back(c);
    return out;
}

bool region_touches_bbox(const std::vector<LinCon>& halfspaces, const Bbox& bbox) {
    int n = static_cast<int>(bbox.lo.size());
    for (int i = 0; i < n; ++i) {
        for (double sgn : {1.0, -1.0}) {
            VectorXd obj = VectorXd::Zero(n);
            obj[i] = sgn;
            LpResult r = lp_maximize(halfspaces, {}, obj);
            if (!r.feasible) continue;
            double v = r.x[i];
            if (sgn > 0 && bbox.hi[i] - v <= 1e-6) return true;
            if (sgn < 0 && v - bbox.lo[i] <= 1e-6) return true;
        }
    }
    return false;
}

}  // namespace

Geometry enumerate_regions(const Params& p, const Bbox& bbox) {
    int n0 = p.arch.n0();
    if (n0 > 3) throw std::invalid_argument("region enumeration requires n0 <= 3");
    if (bbox.lo.size() != n0 || bbox.hi.size() != n0 ||
        !((bbox.hi - bbox.lo).array() > 0).all())
        throw std::invalid_argument("infeasible bbox");

    Geometry g;
    g.params = p;
    g.bbox = bbox;

    int d = p.arch.depth();
    std::deque<std::string> queue;
    std::set<std::string> seen;
    std::map<std::string, Ternary> pending;

    auto push_pattern = [&](const Ternary& t) {
        std::string k = t.key();
        if (seen.insert(k).second) {
            queue.push_back(k);
            pending[k] = t;
        }
    };

    // Seed with labels of scattered probe points.
    Rng seeds(Rng::derive_key(0x9e0935, "region-seeds"));
    std::vector<VectorXd> probes;
    probes.push_back((bbox.lo + bbox.hi) / 2.0);
    for (int i = 0; i < 64; ++i) {
        VectorXd x(n0);
        for (int j = 0; j < n0; ++j) x[j] = seeds.uniform(bbox.lo[j], bbox.hi[j]);
        probes.push_back(x);
    }
    for (const auto& x : probes) {
        Ternary t = hidden_part(ternary_label(p, x, 0.0));
        if (t.all_pm()) push_pattern(t);
    }

    while (!queue.empty()) {
        std::string key = queue.front();
        queue.pop_front();
        Ternary pat = pending[key];
        NeuronAffines na = pattern_preacts(p, pat);
        // canonicalize neurons with identically-zero pre-activation to the
        // inactive side so degenerate cells are not enumerated twice
        bool canonical = true;
        for (int l = 0; l < d - 1 && canonical; ++l)
            for (int i = 0; i < pat.s[l].size() && canonical; ++i)
                if (pat.s[l][i] > 0 && na.C[l].row(i).norm() <= 1e-12 &&
                    std::abs(na.e[l][i]) <= 1e-12)
                    canonical = false;
        if (!canonical) continue;
        std::vector<LinCon> hs = region_halfspaces(na, pat, bbox);
        LpResult ip = chebyshev_center(hs, {});
        if (!ip.feasible || ip.objective <= kInteriorTol) continue;

        Region r;
        r.pattern = pat;
        auto map = region_affine_map(p, pat);
        r.A = map.first;
        r.c = map.second;
        r.halfspaces = hs;
        r.witness = ip.x;
        r.radius = ip.objective;
        r.fragile = ip.fragile;
        r.touches_bbox = region_touches_bbox(hs, bbox);
        r.preacts = na;
        g.regions.push_back(std::move(r));

        for (int l = 0; l < d - 1; ++l) {
            for (int i = 0; i < pat.s[l].size(); ++i) {
                Ternary flip = pat;
                flip.s[l][i] = -flip.s[l][i];
                push_pattern(flip);
            }
        }
    }

    std::sort(g.regions.begin(), g.regions.end(),
              [](const Region& a, const Region& b) {
                  return a.pattern.key() < b.pattern.key();
              });
    for (size_t i = 0; i < g.regions.size(); ++i)
        g.index[g.regions[i].pattern.key()] = static_cast<int>(i);
    return g;
}

std::vector<bool> genericity_check(const Params& p) {
    int d = p.arch.depth();
    std::vector<bool> out;
    Rng rng(Rng::derive_key(0xa11ce, "genericity"));
    for (int l = 0; l < d; ++l) {
        const MatrixXd& W = p.W[l];
        VectorXd bias = l < d - 1 ? p.b[l] : VectorXd::Zero(W.rows());
        int nprev = static_cast<int>(W.cols());
        int nh = static_cast<int>(W.rows());
        bool ok = true;

        for (int i = 0; i < nh && ok; ++i)
            if (W.row(i).norm() < 1e-12) ok = false;

        auto subset_ok = [&](const std::vector<int>& idx) {
            int k = static_cast<int>(idx.size());
            bool augmented = k == nprev + 1;
            MatrixXd M(k, augmented ? nprev + 1 : nprev);
            for (int r = 0; r < k; ++r) {
                VectorXd row(M.cols());
                row.head(nprev) = W.row(idx[r]).transpose();
                if (augmented) row[nprev] = bias[idx[r]];
                double n = row.norm();
                if (n < 1e-12) return false;
                M.row(r) = row.transpose() / n;
            }
            Eigen::JacobiSVD<MatrixXd> svd(M);
            return svd.singularValues().minCoeff() > 1e-9;
        };

        // All subsets up to size nprev+1, sampled beyond a budget.
        for (int k = 2; k <= std::min(nh, nprev + 1) && ok; ++k) {
            double total = 1.0;
            for (int t = 0; t < k; ++t) total *= double(nh - t) / (t + 1);
            if (total <= 20000) {
                std::vector<int> idx(k);
                for (int t = 0; t < k; ++t) idx[t] = t;
                while (ok) {
                    if (!subset_ok(idx)) ok = false;
                    int i = k - 1;
                    while (i >= 0 && idx[i] == nh - k + i) --i;
                    if (i < 0) break;
                    ++idx[i];
                    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
                }
            } else {
                for (int trial = 0; trial < 20000 && ok; ++trial) {
                    std::set<int> pickset;
                    while (static_cast<int>(pickset.size()) < k)
                        pickset.insert(static_cast<int>(rng.next_u64() % nh));
                    std::vector<int> idx(pickset.begin(), pickset.end());
                    if (!subset_ok(idx)) ok = false;
                }
            }
        }
        out.push_back(ok);
    }
    return out;
}

namespace {

// Vertices of region ∩ {fold = 0}; used for fold pieces at n0 = 2 and 3.
std::vector<VectorXd> fold_face_vertices(const Region& r, const LinCon& eq) {
    int n = static_cast<int>(eq.a.size());
    std::vector<VectorXd> verts;
    int m = static_cast<int>(r.halfspaces.size());
    std::vector<int> pick(n - 1);
    if (n - 1 == 0) return verts;
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n - 1) {
            MatrixXd A(n, n);
            VectorXd rhs(n);
            A.row(0) = eq.a.transpose() / eq.a.norm();
            rhs[0] = -eq.b / eq.a.norm();
            for (int t = 0; t < n - 1; ++t) {
                const LinCon& c = r.halfspaces[pick[t]];
                double nn = c.a.norm();
                if (nn < 1e-14) return;
                A.row(t + 1) = c.a.transpose() / nn;
                rhs[t + 1] = -c.b / nn;
            }
            Eigen::FullPivLU<MatrixXd> lu(A);
            lu.setThreshold(1e-10);
            if (!lu.isInvertible()) return;
            VectorXd x = lu.solve(rhs);
            if (!x.allFinite()) return;
            for (const auto& c : r.halfspaces) {
                double nn = c.a.norm();
                if (nn < 1e-14) continue;
                if ((c.a.dot(x) + c.b) / nn < -1e-8) return;
            }
            verts.push_back(x);
            return;
        }
        for (int i = start; i < m; ++i) {
            pick[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    // dedupe
    std::vector<VectorXd> uniq;
    for (const auto& v : verts) {
        bool dup = false;
        for (const auto& u : uniq)
            if ((u - v).norm() < 1e-7) { dup = true; break; }
        if (!dup) uniq.push_back(v);
    }
    return uniq;
}

LinCon fold_eq(const Region& r, int layer, int neuron) {
    return {r.preacts.C[layer - 1].row(neuron - 1).transpose(),
            r.preacts.e[layer - 1][neuron - 1]};
}

}  // namespace

int BentHyperplanes::curve_count() const {
    std::set<std::pair<int, int>> ids;
    for (const auto& p : pieces) ids.insert({p.layer, p.neuron});
    return static_cast<int>(ids.size());
}

BentHyperplanes bent_hyperplanes(const Geometry& g) {
    int n0 = g.params.arch.n0();
    if (n0 < 2 || n0 > 3)
        throw std::invalid_argument("bent hyperplane extraction requires n0 in {2,3}");
    BentHyperplanes out;
    int d = g.params.arch.depth();
    for (const auto& r : g.regions) {
        for (int l = 1; l <= d; ++l) {
            for (int i = 1; i <= g.params.arch.widths[l]; ++i) {
                LinCon eq = fold_eq(r, l, i);
                if (eq.a.norm() < 1e-12) continue;
                if (l < d) {
                    // hidden folds are region facets, shared by the +/- sides;
                    // emit from the + side only
                    if (r.pattern.s[l - 1][i - 1] != 1) continue;
                } else {
                    // output folds cross region interiors; emit only where the
                    // pre-activation genuinely changes sign over the region
                    LpResult hipos = lp_maximize(r.halfspaces, {}, eq.a);
                    LpResult hineg = lp_maximize(r.halfspaces, {}, (-eq.a).eval());
                    if (!hipos.feasible || !hineg.feasible) continue;
                    if (hipos.objective + eq.b <= 1e-9) continue;
                    if (hineg.objective - eq.b <= 1e-9) continue;
                }
                std::vector<VectorXd> verts = fold_face_vertices(r, eq);
                if (static_cast<int>(verts.size()) < n0) continue;   // lower-dim touch
                FoldPiece piece;
                piece.layer = l;
                piece.neuron = i;
                piece.region_key = r.pattern.key();
                if (n0 == 2) {
                    // extreme points along the fold line
                    VectorXd dir(2);
                    dir << -eq.a[1], eq.a[0];
                    auto cmp = [&](const VectorXd& a, const VectorXd& b) {
                        return dir.dot(a) < dir.dot(b);
                    };
                    auto mn = *std::min_element(verts.begin(), verts.end(), cmp);
                    auto mx = *std::max_element(verts.begin(), verts.end(), cmp);
                    if ((mx - mn).norm() < 1e-9) continue;
                    piece.pts.resize(2, 2);
                    piece.pts.row(0) = mn.transpose();
                    piece.pts.row(1) = mx.transpose();
                } else {
                    // order polygon vertices by angle around the centroid
                    VectorXd ctr = VectorXd::Zero(3);
                    for (const auto& v : verts) ctr += v;
                    ctr /= static_cast<double>(verts.size());
                    Eigen::Vector3d n = (eq.a / eq.a.norm()).head<3>();
                    Eigen::Vector3d u = n.unitOrthogonal();
                    Eigen::Vector3d w = n.cross(u);
                    std::sort(verts.begin(), verts.end(),
                              [&](const VectorXd& a, const VectorXd& b) {
                                  double ta = std::atan2(w.dot(a - ctr), u.dot(a - ctr));
                                  double tb = std::atan2(w.dot(b - ctr), u.dot(b - ctr));
                                  return ta < tb;
                              });
                    piece.pts.resize(verts.size(), 3);
                    for (size_t v = 0; v < verts.size(); ++v)
                        piece.pts.row(v) = verts[v].transpose();
                }
                out.pieces.push_back(std::move(piece));
            }
        }
    }
    return out;
}

TpicReport check_tpic(const Geometry& g) {
    const Params& p = g.params;
    int d = p.arch.depth();
    TpicReport rep;

    // fold-touch cache: region x neuron feasibility of the one-equality system
    int nregions = static_cast<int>(g.regions.size());
    std::vector<std::map<std::pair<int, int>, bool>> touch(nregions);
    auto fold_touches = [&](int ri, int l, int i) {
        auto key = std::make_pair(l, i);
        auto& cache = touch[ri];
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const Region& r = g.regions[ri];
        LinCon eq = fold_eq(r, l, i);
        bool ok = false;
        if (eq.a.norm() >= 1e-12) {
            LpResult res = chebyshev_center(r.halfspaces, {eq});
            ok = res.feasible;
        }
        cache[key] = ok;
        return ok;
    };

    for (int l = 1; l < d; ++l) {
        for (int i = 1; i <= p.arch.widths[l]; ++i) {
            for (int j = 1; j <= p.arch.widths[l + 1]; ++j) {
                PairCheck pc;
                pc.l1 = l;
                pc.i1 = i;
                pc.l2 = l + 1;
                pc.i2 = j;
                for (int ri = 0; ri < nregions && !(pc.nonempty && pc.transversal); ++ri) {
                    if (!fold_touches(ri, l, i) || !fold_touches(ri, l + 1, j)) continue;
                    const Region& r = g.regions[ri];
                    LinCon e1 = fold_eq(r, l, i);
                    LinCon e2 = fold_eq(r, l + 1, j);
                    if (e2.a.norm() < 1e-12) continue;
                    LpResult res = chebyshev_center(r.halfspaces, {e1, e2});
                    if (!res.feasible) continue;
                    pc.nonempty = true;
                    MatrixXd M(2, p.arch.n0());
                    M.row(0) = e1.a.transpose() / e1.a.norm();
                    M.row(1) = e2.a.transpose() / e2.a.norm();
                    Eigen::JacobiSVD<MatrixXd> svd(M);
                    if (svd.singularValues().minCoeff() > 1e-9) {
                        pc.transversal = true;
                        pc.witness = res.x;
                        pc.region_key = r.pattern.key();
                    }
                }
                if (!pc.nonempty) pc.reason = "no region admits both folds";
                else if (!pc.transversal) pc.reason = "intersection found but not transversal";
                rep.pairs.push_back(std::move(pc));
            }
        }
    }
    rep.overall_pass = !rep.pairs.empty() || d == 1;
    for (const auto& pc : rep.pairs)
        if (!(pc.nonempty && pc.transversal)) rep.overall_pass = false;
    if (d == 1) rep.overall_pass = true;   // no adjacent pairs: vacuous
    return rep;
}

LraReport check_lra_near_intersections(const Geometry& g, const TpicReport& t) {
    const Params& p = g.params;
    int d = p.arch.depth();
    LraReport rep;
    rep.all_pass = true;

    auto map_of = [&](const Ternary& pat, bool* feasible) {
        const Region* r = g.find(pat.key());
        if (r) {
            *feasible = true;
            return std::make_pair(r->A, r->c);
        }
        NeuronAffines na = pattern_preacts(p, pat);
        std::vector<LinCon> hs = region_halfspaces(na, pat, g.bbox);
        LpResult ip = chebyshev_center(hs, {});
        *feasible = ip.feasible && ip.objective > kInteriorTol;
        return region_affine_map(p, pat);
    };
    auto maps_differ = [](const std::pair<MatrixXd, VectorXd>& a,
                          const std::pair<MatrixXd, VectorXd>& b) {
        double dmax = (a.first - b.first).cwiseAbs().maxCoeff();
        dmax = std::max(dmax, (a.second - b.second).cwiseAbs().maxCoeff());
        return dmax > 1e-9;
    };

    // The quadrant test at one crossing can degenerate (e.g. flipping the only
    // active neuron of a layer zeroes the map on both sides), so each pair may
    // certify at any region carrying a transversal crossing of its two folds.
    auto try_region = [&](const PairCheck& pc, const Region* base, LraCheck& chk) {
        chk.pass = false;
        if (pc.l2 < d) {
            // both neurons gate: four adjacent regions, pairwise-distinct maps
            std::vector<std::pair<MatrixXd, VectorXd>> maps;
            bool all_feasible = true;
            for (int s1 : {1, -1}) {
                for (int s2 : {1, -1}) {
                    Ternary pat = base->pattern;
                    pat.s[pc.l1 - 1][pc.i1 - 1] = s1;
                    pat.s[pc.l2 - 1][pc.i2 - 1] = s2;
                    bool feas = false;
                    maps.push_back(map_of(pat, &feas));
                    all_feasible = all_feasible && feas;
                }
            }
            if (!all_feasible) {
                chk.reason = "fewer than four feasible adjacent regions";
            } else {
                bool distinct = true;
                for (size_t a = 0; a < maps.size() && distinct; ++a)
                    for (size_t b = a + 1; b < maps.size() && distinct; ++b)
                        if (!maps_differ(maps[a], maps[b])) distinct = false;
                if (distinct) chk.pass = true;
                else chk.reason = "adjacent regions share an affine map";
            }
        } else {
            // The deeper neuron is an output: its zero set does not gate the
            // map, so require the hidden flip to change the map and the output
            // coordinate to have a nonzero gradient on both sides.
            bool ok = true;
            std::vector<std::pair<MatrixXd, VectorXd>> maps;
            for (int s1 : {1, -1}) {
                Ternary pat = base->pattern;
                pat.s[pc.l1 - 1][pc.i1 - 1] = s1;
                bool feas = false;
                maps.push_back(map_of(pat, &feas));
                if (!feas) ok = false;
                NeuronAffines na = pattern_preacts(p, pat);
                if (na.C[pc.l2 - 1].row(pc.i2 - 1).norm() <= 1e-9) ok = false;
            }
            if (!ok) {
                chk.reason = "missing adjacent region or degenerate output fold";
            } else if (maps_differ(maps[0], maps[1])) {
                chk.pass = true;
            } else {
                chk.reason = "hidden fold invisible in the network map";
            }
        }
        return chk.pass;
    };

    for (size_t pi = 0; pi < t.pairs.size(); ++pi) {
        const PairCheck& pc = t.pairs[pi];
        if (!(pc.nonempty && pc.transversal)) continue;
        LraCheck chk;
        chk.pair_index = static_cast<int>(pi);
        bool found_base = false;
        for (const auto& r : g.regions) {
            bool is_witness = r.pattern.key() == pc.region_key;
            if (!is_witness) {
                LinCon e1 = fold_eq(r, pc.l1, pc.i1);
                LinCon e2 = fold_eq(r, pc.l2, pc.i2);
                if (e1.a.norm() < 1e-12 || e2.a.norm() < 1e-12) continue;
                LpResult res = chebyshev_center(r.halfspaces, {e1, e2});
                if (!res.feasible) continue;
                MatrixXd M(2, p.arch.n0());
                M.row(0) = e1.a.transpose() / e1.a.norm();
                M.row(1) = e2.a.transpose() / e2.a.norm();
                Eigen::JacobiSVD<MatrixXd> svd(M);
                if (svd.singularValues().minCoeff() <= 1e-9) continue;
            }
            found_base = true;
            if (try_region(pc, &r, chk)) break;
        }
        if (!found_base) chk.reason = "witness region missing";
        if (!chk.pass) rep.all_pass = false;
        rep.checks.push_back(std::move(chk));
    }
    return rep;
}

void render_svg(const Geometry& g, const BentHyperplanes& bent, const std::string& path) {
    if (g.params.arch.n0() != 2)
        throw std::invalid_argument("SVG rendering requires n0 = 2");
    const double W = 640, H = 640, M = 20;
    auto px = [&](double x) {
        return M + (x - g.bbox.lo[0]) / (g.bbox.hi[0] - g.bbox.lo[0]) * (W - 2 * M);
    };
    auto py = [&](double y) {
        return H - M - (y - g.bbox.lo[1]) / (g.bbox.hi[1] - g.bbox.lo[1]) * (H - 2 * M);
    };

    static const char* colors[] = {"#1b1b1b", "#c0392b", "#2962ab", "#2f8f4e",
                                   "#8e44ad", "#b8860b"};
    std::ostringstream svg;
    svg.setf(std::ios::fixed);
    svg.precision(3);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
        << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<style>\n";
    int d = g.params.arch.depth();
    for (int l = 1; l <= d; ++l) {
        svg << ".layer" << l << "{stroke:" << colors[(l - 1) % 6]
            << ";fill:none;stroke-width:1.6;";
        if (l > 1) svg << "stroke-dasharray:" << (l == 2 ? "7,4" : "2,3") << ";";
        svg << "}\n";
    }
    svg << "</style>\n";
    svg << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << W - 2 * M
        << "\" height=\"" << H - 2 * M
        << "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n";

    // group pieces per neuron, sorted
    std::map<std::pair<int, int>, std::vector<const FoldPiece*>> by_neuron;
    for (const auto& piece : bent.pieces)
        by_neuron[{piece.layer, piece.neuron}].push_back(&piece);
    for (const auto& [id, pieces] : by_neuron) {
        svg << "<g id=\"curve-l" << id.first << "-n" << id.second << "\" class=\"layer"
            << id.first << "\">\n";
        for (const FoldPiece* piece : pieces) {
            svg << "  <polyline points=\"";
            for (int r = 0; r < piece->pts.rows(); ++r) {
                if (r) svg << ' ';
                svg << px(piece->pts(r, 0)) << ',' << py(piece->pts(r, 1));
            }
            svg << "\"/>\n";
        }
        svg << "</g>\n";
    }
    svg << "</svg>\n";

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << svg.str();
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace relufd
