#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lp.hpp"
#include "net.hpp"

namespace relufd {

struct Bbox {
    VectorXd lo, hi;
    static Bbox cube(int n, double r = 10.0);
    std::vector<LinCon> constraints() const;
};

// Affine pre-activation of every neuron under a fixed gating pattern:
// z_{l,i}(x) = C[l].row(i).x + e[l][i].
struct NeuronAffines {
    std::vector<MatrixXd> C;
    std::vector<VectorXd> e;
};
NeuronAffines pattern_preacts(const Params& p, const Ternary& pattern);

// Region patterns cover hidden layers only: the output layer has no ReLU, so
// its sign does not gate the map and its zero set lives inside regions.
Ternary hidden_part(const Ternary& full);

struct Region {
    Ternary pattern;
    MatrixXd A;
    VectorXd c;
    std::vector<LinCon> halfspaces;   // neuron sign rows first, bbox rows last
    VectorXd witness;
    double radius = 0.0;
    bool touches_bbox = false;
    bool fragile = false;
    NeuronAffines preacts;
};

struct Geometry {
    Params params;
    Bbox bbox;
    std::vector<Region> regions;   // sorted by pattern key
    std::map<std::string, int> index;
    const Region* find(const std::string& key) const;
};

Geometry enumerate_regions(const Params& p, const Bbox& bbox);
std::pair<MatrixXd, VectorXd> region_affine_map(const Params& p, const Ternary& pattern);
int cell_dim_from_label(const Ternary& label, int n0);
std::vector<bool> genericity_check(const Params& p);

struct FoldPiece {
    int layer = 0, neuron = 0;   // 1-based layer
    MatrixXd pts;                // one vertex per row
    std::string region_key;
};
struct BentHyperplanes {
    std::vector<FoldPiece> pieces;
    int curve_count() const;     // distinct neurons with at least one piece
};
BentHyperplanes bent_hyperplanes(const Geometry& g);

struct PairCheck {
    int l1 = 0, i1 = 0, l2 = 0, i2 = 0;   // 1-based; l2 == l1 + 1
    bool nonempty = false;
    bool transversal = false;
    VectorXd witness;
    std::string region_key;
    std::string reason;
};
struct TpicReport {
    std::vector<PairCheck> pairs;
    bool overall_pass = false;
};
TpicReport check_tpic(const Geometry& g);

struct LraCheck {
    int pair_index = -1;
    bool pass = false;
    std::string reason;
};
struct LraReport {
    std::vector<LraCheck> checks;
    bool all_pass = false;
};
LraReport check_lra_near_intersections(const Geometry& g, const TpicReport& t);

void render_svg(const Geometry& g, const BentHyperplanes& bent, const std::string& path);

}  // namespace relufd
