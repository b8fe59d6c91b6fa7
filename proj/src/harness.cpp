#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rng.hpp"
#include <json.hpp>

namespace relufd {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<Architecture> make_arch_list(const std::vector<int>& depths,
                                         const std::vector<int>& widths,
                                         const std::string& mode, int input) {
    if (mode != "input-equals-width" && mode != "fixed-input")
        throw std::invalid_argument("mode must be input-equals-width or fixed-input");
    std::vector<Architecture> out;
    for (int d : depths) {
        if (d < 1) throw std::invalid_argument("depth must be >= 1");
        for (int w : widths) {
            std::vector<int> v;
            v.push_back(mode == "fixed-input" ? input : w);
            for (int l = 1; l < d; ++l) v.push_back(w);
            v.push_back(1);
            out.emplace_back(std::move(v));
        }
    }
    return out;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RELUFD_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

uint64_t trial_seed(uint64_t base_seed, const Architecture& arch, int trial) {
    return Rng::derive_key(base_seed, arch.to_string(), static_cast<uint64_t>(trial));
}

namespace {

std::string trials_path(const std::string& dir, const Architecture& arch) {
    std::string name = arch.to_string();
    for (char& c : name)
        if (c == ',') c = '-';
    return dir + "/trials-" + name + ".csv";
}

std::map<int, TrialRecord> load_completed(const std::string& path) {
    std::map<int, TrialRecord> out;
    std::ifstream f(path);
    if (!f) return out;
    std::string line;
    std::getline(f, line);   // header
    while (std::getline(f, line)) {
        std::istringstream is(line);
        std::string tok;
        TrialRecord r;
        try {
            std::getline(is, tok, ','); r.trial = std::stoi(tok);
            std::getline(is, tok, ','); r.seed = std::stoull(tok);
            std::getline(is, tok, ','); r.rank = std::stoi(tok);
            std::getline(is, tok, ','); r.upper_bound = std::stoll(tok);
            std::getline(is, tok, ','); r.resamples = std::stoi(tok);
            std::getline(is, tok, ','); r.wall_ms = std::stod(tok);
        } catch (...) {
            continue;   // partial tail line from an interrupted run
        }
        out[r.trial] = r;
    }
    return out;
}

void finalize(ArchResult& ar, int trials) {
    ar.histogram.clear();
    int at_max = 0;
    for (const auto& t : ar.trials) {
        ++ar.histogram[t.rank];
        if (t.rank == ar.upper_bound) ++at_max;
    }
    ar.fraction_at_max = trials > 0 ? static_cast<double>(at_max) / trials : 0.0;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
    if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (config.m_multiplier < 1) throw std::invalid_argument("m_multiplier must be >= 1");
    if (config.architectures.empty())
        throw std::invalid_argument("no architectures configured");
    int nthreads = resolve_threads(config.threads);
    if (!config.out_dir.empty()) fs::create_directories(config.out_dir);

    SweepResult result;
    for (const auto& arch : config.architectures) {
        ArchResult ar;
        ar.arch = arch;
        ar.upper_bound = fdim_upper_bound(arch);
        ar.trials.resize(config.trials);

        std::map<int, TrialRecord> done;
        std::string path;
        if (!config.out_dir.empty()) {
            path = trials_path(config.out_dir, arch);
            done = load_completed(path);
        }
        std::ofstream log;
        std::mutex log_mu;
        if (!path.empty()) {
            bool fresh = done.empty() && !fs::exists(path);
            log.open(path, std::ios::app);
            if (!log) throw std::runtime_error("cannot open " + path);
            if (fresh) log << "trial,seed,rank,upper_bound,resamples,wall_ms\n";
        }

        std::atomic<int> next{0};
        auto worker = [&]() {
            while (true) {
                int t = next.fetch_add(1);
                if (t >= config.trials) return;
                uint64_t seed = trial_seed(config.base_seed, arch, t);
                auto it = done.find(t);
                if (it != done.end() && it->second.seed == seed) {
                    ar.trials[t] = it->second;
                    continue;
                }
                Params p = he_init(arch, seed, config.bias_std);
                FdimEstimate est = estimate_fdim(p, config.m_multiplier, seed,
                                                 config.rel_tol);
                TrialRecord rec{t, seed, est.rank, est.upper_bound, est.resamples,
                                est.wall_ms};
                ar.trials[t] = rec;
                if (log.is_open()) {
                    std::lock_guard<std::mutex> lk(log_mu);
                    log << rec.trial << ',' << rec.seed << ',' << rec.rank << ','
                        << rec.upper_bound << ',' << rec.resamples << ','
                        << rec.wall_ms << '\n';
                    log.flush();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();

        finalize(ar, config.trials);
        result.archs.push_back(std::move(ar));
    }
    return result;
}

ModeAnalysis mode_gap_analysis(const ArchResult& result, int window, double prominence) {
    if (result.histogram.empty()) throw std::invalid_argument("empty histogram");
    int lo = result.histogram.begin()->first;
    int hi = result.histogram.rbegin()->first;
    int total = 0;
    for (const auto& [v, c] : result.histogram) total += c;
    auto raw = [&](int v) {
        auto it = result.histogram.find(v);
        return it == result.histogram.end() ? 0.0 : static_cast<double>(it->second);
    };
    int half = window / 2;
    auto smooth = [&](int v) {
        double s = 0;
        for (int u = v - half; u <= v + half; ++u) s += raw(u);
        return s / window;
    };
    ModeAnalysis out;
    double thresh = prominence * total;
    for (int v = hi; v >= lo; --v) {
        double c = smooth(v);
        if (c < thresh) continue;
        if (c >= smooth(v - 1) && c > smooth(v + 1)) out.peaks.push_back(v);
    }
    for (size_t i = 0; i + 1 < out.peaks.size(); ++i)
        out.spacings.push_back(out.peaks[i] - out.peaks[i + 1]);
    return out;
}

MSensitivity m_sensitivity(const Architecture& arch, const std::vector<int>& multipliers,
                           int trials, uint64_t seed, double rel_tol, int threads) {
    for (size_t i = 1; i < multipliers.size(); ++i)
        if (multipliers[i] <= multipliers[i - 1])
            throw std::invalid_argument("multipliers must be ascending");
    if (multipliers.empty() || trials < 1)
        throw std::invalid_argument("bad m-sensitivity request");
    long long ub = fdim_upper_bound(arch);
    int nthreads = resolve_threads(threads);
    std::vector<std::vector<int>> at_max(trials);
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            int t = next.fetch_add(1);
            if (t >= trials) return;
            uint64_t s = trial_seed(seed, arch, t);
            Params p = he_init(arch, s);
            auto ests = estimate_fdim_multi(p, multipliers, s, rel_tol);
            std::vector<int> flags;
            for (const auto& e : ests) flags.push_back(e.rank == ub ? 1 : 0);
            at_max[t] = std::move(flags);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    MSensitivity out;
    out.multipliers = multipliers;
    for (size_t mi = 0; mi < multipliers.size(); ++mi) {
        int count = 0;
        for (int t = 0; t < trials; ++t) count += at_max[t][mi];
        out.fraction_at_max.push_back(static_cast<double>(count) / trials);
    }
    return out;
}

void export_csv(const SweepResult& result, const std::string& dir) {
    if (result.archs.empty()) throw std::invalid_argument("empty result");
    fs::create_directories(dir);
    std::ofstream f(dir + "/sweep.csv");
    if (!f) throw std::runtime_error("cannot open sweep.csv");
    f << "arch,trial,seed,rank,upper_bound,resamples,wall_ms\n";
    for (const auto& ar : result.archs)
        for (const auto& t : ar.trials)
            f << ar.arch.to_string() << ',' << t.trial << ',' << t.seed << ','
              << t.rank << ',' << t.upper_bound << ',' << t.resamples << ','
              << t.wall_ms << '\n';
    std::ofstream s(dir + "/summary.json");
    s << sweep_to_json(result) << '\n';
}

std::string sweep_to_json(const SweepResult& result) {
    json doc = json::array();
    for (const auto& ar : result.archs) {
        json a;
        a["arch"] = ar.arch.widths;
        a["upper_bound"] = ar.upper_bound;
        a["fraction_at_max"] = ar.fraction_at_max;
        json hist = json::object();
        for (const auto& [v, c] : ar.histogram) hist[std::to_string(v)] = c;
        a["histogram"] = hist;
        a["trials"] = ar.trials.size();
        doc.push_back(std::move(a));
    }
    return doc.dump(2);
}

void plot_histograms(const SweepResult& result, const std::string& dir) {
    if (result.archs.empty()) throw std::invalid_argument("empty result");
    fs::create_directories(dir);
    for (const auto& ar : result.archs) {
        std::string name = ar.arch.to_string();
        for (char& c : name)
            if (c == ',') c = '-';
        std::ofstream f(dir + "/hist-" + name + ".svg");
        if (!f) throw std::runtime_error("cannot open histogram svg");
        int lo = ar.histogram.begin()->first;
        int hi = ar.histogram.rbegin()->first;
        int maxc = 1;
        for (const auto& [v, c] : ar.histogram) maxc = std::max(maxc, c);
        const double W = 640, H = 360, M = 40;
        double bw = (W - 2 * M) / std::max(1, hi - lo + 1);
        f.setf(std::ios::fixed);
        f.precision(2);
        f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
          << "\" height=\"" << H << "\">\n";
        for (const auto& [v, c] : ar.histogram) {
            double h = (H - 2 * M) * c / maxc;
            f << "<rect x=\"" << M + (v - lo) * bw << "\" y=\"" << H - M - h
              << "\" width=\"" << bw * 0.9 << "\" height=\"" << h
              << "\" fill=\"#4878a8\"/>\n";
        }
        f << "<text x=\"" << M << "\" y=\"" << M / 2
          << "\" font-family=\"sans-serif\" font-size=\"14\">" << ar.arch.to_string()
          << "  fraction_at_max=" << ar.fraction_at_max << "</text>\n";
        f << "</svg>\n";
    }
}

}  // namespace relufd
