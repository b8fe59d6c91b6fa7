#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grad.hpp"
#include "net.hpp"

namespace relufd {

struct SweepConfig {
    std::vector<Architecture> architectures;
    int trials = 1000;
    int m_multiplier = 100;
    double rel_tol = 1e-6;
    double bias_std = 0.1;
    uint64_t base_seed = 1;
    int threads = 0;            // 0: env override, then hardware concurrency
    std::string out_dir;        // empty: in-memory only (no resume)
};

struct TrialRecord {
    int trial = 0;
    uint64_t seed = 0;
    int rank = 0;
    long long upper_bound = 0;
    int resamples = 0;
    double wall_ms = 0.0;
};

struct ArchResult {
    Architecture arch;
    long long upper_bound = 0;
    std::map<int, int> histogram;
    double fraction_at_max = 0.0;
    std::vector<TrialRecord> trials;
};

struct SweepResult {
    std::vector<ArchResult> archs;
};

std::vector<Architecture> make_arch_list(const std::vector<int>& depths,
                                         const std::vector<int>& widths,
                                         const std::string& mode, int input);

int resolve_threads(int requested);
uint64_t trial_seed(uint64_t base_seed, const Architecture& arch, int trial);

SweepResult run_sweep(const SweepConfig& config);

struct ModeAnalysis {
    std::vector<int> peaks;      // descending rank values
    std::vector<int> spacings;   // consecutive differences, size = peaks-1
};
ModeAnalysis mode_gap_analysis(const ArchResult& result, int window = 3,
                               double prominence = 0.01);

struct MSensitivity {
    std::vector<int> multipliers;
    std::vector<double> fraction_at_max;
};
MSensitivity m_sensitivity(const Architecture& arch, const std::vector<int>& multipliers,
                           int trials, uint64_t seed, double rel_tol = 1e-6,
                           int threads = 0);

void export_csv(const SweepResult& result, const std::string& dir);
void plot_histograms(const SweepResult& result, const std::string& dir);
std::string sweep_to_json(const SweepResult& result);

}  // namespace relufd
