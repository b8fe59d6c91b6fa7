#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "net.hpp"

namespace relufd {

Params apply_permutation(const Params& p, int layer, const std::vector<int>& perm);
Params apply_scaling(const Params& p, int layer, int neuron, double c);

enum class DeadCriterion { orthant, sampled };
struct DeadFinding {
    int layer = 0, neuron = 0;   // 1-based
    DeadCriterion criterion = DeadCriterion::orthant;
};
std::vector<DeadFinding> detect_stably_unactivated(const Params& p,
                                                   double margin = 1e-6,
                                                   uint64_t seed = 7,
                                                   int samples = 10000);

struct CoactiveFinding {
    int layer = 0, i = 0, j = 0;   // neuron i in `layer`, j in layer+1 (1-based)
    bool exact = false;            // region enumeration vs sample census
};
std::vector<CoactiveFinding> detect_never_coactive(const Params& p,
                                                   uint64_t seed = 7,
                                                   int samples = 100000);

struct CollapseFinding {
    std::string region_a, region_b;   // pattern keys differing in one hidden sign
    int layer = 0, neuron = 0;        // the invisible fold
};
std::vector<CollapseFinding> detect_collapse(const Params& p);

std::pair<int, int> detect_lowdim_image(const Params& p, int layer,
                                        int samples, uint64_t seed = 7);

// Rotation family of a single neuron about the hyperplane S (normal o,
// anchor s_H); the new neuron agrees with the old one on S exactly.
Params rotate_neuron_family(const Params& p, int layer, int neuron,
                            const VectorXd& o, const VectorXd& s_H, double t);

bool fiber_witness_check(const Params& a, const Params& b, int n_samples,
                         uint64_t seed = 7, double tol = 1e-9);

}  // namespace relufd
