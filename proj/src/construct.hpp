#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "grad.hpp"
#include "net.hpp"
#include "regions.hpp"

namespace relufd {

struct ConstructOptions {
    double clone_spread = 1e-2;     // relative spread of cloned hyperplanes
    double clone_bias_jitter = 1e-3;   // offset of clones from the common point
    double final_perturb = 1e-6;    // relative genericity perturbation
    int max_bias_retries = 60;      // geometric bias growth budget
    double target_radius = 1.5;     // base rescale radius for the sampled geometry
};

struct ConstructionState {
    std::string log_json;
};

std::pair<VectorXd, double> positive_axis_hyperplane(int dim, uint64_t seed,
                                                     double bias_scale);

std::pair<Params, ConstructionState> construct_no_hidden_symmetry(
    const Architecture& arch, uint64_t seed, const ConstructOptions& opt = {});

struct CertificationReport {
    TpicReport tpic;
    LraReport lra;
    FdimEstimate fdim;
    bool certified = false;
};
CertificationReport verify_construction(const Params& p, uint64_t seed = 17);

int image_dimension_probe(const Params& p, int layer, const Ternary& cell_pattern,
                          uint64_t seed = 17);

}  // namespace relufd
