#include "relufd.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "construct.hpp"
#include "grad.hpp"
#include "harness.hpp"
#include "net.hpp"
#include "regions.hpp"
#include "symmetry.hpp"
#include <json.hpp>

using namespace relufd;
using nlohmann::json;

struct rf_net {
    Params params;
};

namespace {

thread_local std::string g_last_error;

rf_status fail(rf_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename Fn>
rf_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        return fail(RF_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        std::string what = e.what();
        if (what.find("parse") != std::string::npos)
            return fail(RF_ERR_PARSE, what);
        return fail(RF_ERR_RUNTIME, what);
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

Architecture arch_from(const int* widths, int n) {
    if (!widths || n < 2) throw std::invalid_argument("need at least two widths");
    Architecture a(std::vector<int>(widths, widths + n));
    std::string why;
    if (!a.valid(&why)) throw std::invalid_argument(why);
    return a;
}

json fdim_json(const FdimEstimate& e) {
    json out;
    out["rank"] = e.rank;
    out["m"] = e.m;
    out["tolerance"] = e.tolerance;
    out["upper_bound"] = e.upper_bound;
    out["attained_max"] = e.attained_max;
    out["resamples"] = e.resamples;
    out["wall_ms"] = e.wall_ms;
    return out;
}

json tpic_json(const TpicReport& t) {
    json pairs = json::array();
    for (const auto& pc : t.pairs) {
        json o;
        o["pair"] = {pc.l1, pc.i1, pc.l2, pc.i2};
        o["nonempty"] = pc.nonempty;
        o["transversal"] = pc.transversal;
        if (pc.witness.size() > 0)
            o["witness"] = std::vector<double>(pc.witness.data(),
                                               pc.witness.data() + pc.witness.size());
        if (!pc.reason.empty()) o["reason"] = pc.reason;
        pairs.push_back(std::move(o));
    }
    json out;
    out["pairs"] = std::move(pairs);
    out["overall_pass"] = t.overall_pass;
    return out;
}

json lra_json(const LraReport& l) {
    json checks = json::array();
    for (const auto& c : l.checks) {
        json o;
        o["pair_index"] = c.pair_index;
        o["pass"] = c.pass;
        if (!c.reason.empty()) o["reason"] = c.reason;
        checks.push_back(std::move(o));
    }
    json out;
    out["checks"] = std::move(checks);
    out["all_pass"] = l.all_pass;
    return out;
}

SweepConfig sweep_config_from_json(const json& cfg) {
    SweepConfig sc;
    if (cfg.contains("architectures")) {
        for (const auto& a : cfg["architectures"])
            sc.architectures.emplace_back(a.get<std::vector<int>>());
    } else {
        sc.architectures = make_arch_list(
            cfg.at("depths").get<std::vector<int>>(),
            cfg.at("widths").get<std::vector<int>>(),
            cfg.value("mode", std::string("input-equals-width")),
            cfg.value("input", 5));
    }
    sc.trials = cfg.value("trials", 1000);
    sc.m_multiplier = cfg.value("m_multiplier", 100);
    sc.rel_tol = cfg.value("rel_tol", 1e-6);
    sc.base_seed = cfg.value("seed", 1ull);
    sc.threads = cfg.value("threads", 0);
    sc.out_dir = cfg.value("out_dir", std::string());
    return sc;
}

}  // namespace

extern "C" {

const char* rf_last_error(void) { return g_last_error.c_str(); }

void rf_string_free(char* s) { std::free(s); }

void rf_net_free(rf_net* net) { delete net; }

rf_status rf_net_from_json(const char* text, rf_net** out) {
    return guarded([&] {
        if (!text || !out) throw std::invalid_argument("null argument");
        *out = new rf_net{params_from_json(text)};
        return RF_OK;
    });
}

rf_status rf_net_to_json(const rf_net* net, char** out) {
    return guarded([&] {
        if (!net || !out) throw std::invalid_argument("null argument");
        *out = dup_string(to_json(net->params));
        return RF_OK;
    });
}

rf_status rf_net_load(const char* path, rf_net** out) {
    return guarded([&] {
        if (!path || !out) throw std::invalid_argument("null argument");
        *out = new rf_net{load_params(path)};
        return RF_OK;
    });
}

rf_status rf_net_save(const rf_net* net, const char* path) {
    return guarded([&] {
        if (!net || !path) throw std::invalid_argument("null argument");
        save_params(net->params, path);
        return RF_OK;
    });
}

rf_status rf_net_he_init(const int* widths, int n, uint64_t seed, double bias_std,
                         rf_net** out) {
    return guarded([&] {
        if (!out) throw std::invalid_argument("null argument");
        Architecture a = arch_from(widths, n);
        *out = new rf_net{he_init(a, seed, bias_std < 0 ? 0.1 : bias_std)};
        return RF_OK;
    });
}

rf_status rf_net_arch(const rf_net* net, int* widths, int* n) {
    return guarded([&] {
        if (!net || !n) throw std::invalid_argument("null argument");
        int count = static_cast<int>(net->params.arch.widths.size());
        if (widths) {
            if (*n < count) throw std::invalid_argument("widths buffer too small");
            for (int i = 0; i < count; ++i) widths[i] = net->params.arch.widths[i];
        }
        *n = count;
        return RF_OK;
    });
}

rf_status rf_param_count(const rf_net* net, long long* out) {
    return guarded([&] {
        if (!net || !out) throw std::invalid_argument("null argument");
        *out = net->params.arch.param_count();
        return RF_OK;
    });
}

rf_status rf_fdim_upper_bound(const int* widths, int n, long long* out) {
    return guarded([&] {
        if (!out) throw std::invalid_argument("null argument");
        *out = fdim_upper_bound(arch_from(widths, n));
        return RF_OK;
    });
}

rf_status rf_forward(const rf_net* net, const double* x, int nx, double* y, int ny) {
    return guarded([&] {
        if (!net || !x || !y) throw std::invalid_argument("null argument");
        if (nx != net->params.arch.n0())
            throw std::invalid_argument("input length mismatch");
        if (ny < net->params.arch.nd())
            throw std::invalid_argument("output buffer too small");
        VectorXd in(nx);
        for (int i = 0; i < nx; ++i) in[i] = x[i];
        VectorXd outv = forward(net->params, in).output;
        for (int i = 0; i < outv.size(); ++i) y[i] = outv[i];
        return RF_OK;
    });
}

rf_status rf_estimate_fdim(const rf_net* net, int m_multiplier, uint64_t seed,
                           double rel_tol, char** result_json) {
    return guarded([&] {
        if (!net || !result_json) throw std::invalid_argument("null argument");
        FdimEstimate est = estimate_fdim(net->params, m_multiplier, seed,
                                         rel_tol <= 0 ? 1e-6 : rel_tol);
        *result_json = dup_string(fdim_json(est).dump(2));
        return RF_OK;
    });
}

rf_status rf_sweep(const char* config_json, char** result_json) {
    return guarded([&] {
        if (!config_json || !result_json) throw std::invalid_argument("null argument");
        json cfg = json::parse(config_json);
        SweepConfig sc = sweep_config_from_json(cfg);
        SweepResult res = run_sweep(sc);
        if (!sc.out_dir.empty()) {
            export_csv(res, sc.out_dir);
            plot_histograms(res, sc.out_dir);
        }
        *result_json = dup_string(sweep_to_json(res));
        return RF_OK;
    });
}

rf_status rf_m_sensitivity(const char* config_json, char** result_json) {
    return guarded([&] {
        if (!config_json || !result_json) throw std::invalid_argument("null argument");
        json cfg = json::parse(config_json);
        Architecture arch(cfg.at("arch").get<std::vector<int>>());
        MSensitivity ms = m_sensitivity(arch,
                                        cfg.at("multipliers").get<std::vector<int>>(),
                                        cfg.value("trials", 200),
                                        cfg.value("seed", 1ull),
                                        cfg.value("rel_tol", 1e-6),
                                        cfg.value("threads", 0));
        json out;
        out["multipliers"] = ms.multipliers;
        out["fraction_at_max"] = ms.fraction_at_max;
        *result_json = dup_string(out.dump(2));
        return RF_OK;
    });
}

rf_status rf_mode_gap(const char* summary_json, const int* widths, int n,
                      char** result_json) {
    return guarded([&] {
        if (!summary_json || !result_json) throw std::invalid_argument("null argument");
        Architecture want = arch_from(widths, n);
        json doc = json::parse(summary_json);
        for (const auto& entry : doc) {
            Architecture a(entry.at("arch").get<std::vector<int>>());
            if (!(a == want)) continue;
            ArchResult ar;
            ar.arch = a;
            ar.upper_bound = entry.at("upper_bound").get<long long>();
            for (const auto& [key, val] : entry.at("histogram").items())
                ar.histogram[std::stoi(key)] = val.get<int>();
            ModeAnalysis ma = mode_gap_analysis(ar);
            json out;
            out["peaks"] = ma.peaks;
            out["spacings"] = ma.spacings;
            *result_json = dup_string(out.dump(2));
            return RF_OK;
        }
        throw std::invalid_argument("architecture not present in summary");
    });
}

rf_status rf_geometry(const rf_net* net, double bbox_radius, const char* svg_path,
                      char** report_json) {
    return guarded([&] {
        if (!net || !report_json) throw std::invalid_argument("null argument");
        const Params& p = net->params;
        if (p.arch.n0() > 3)
            return fail(RF_ERR_UNSUPPORTED, "exact geometry requires n0 <= 3");
        Bbox box = Bbox::cube(p.arch.n0(), bbox_radius > 0 ? bbox_radius : 10.0);
        Geometry g = enumerate_regions(p, box);
        TpicReport tp = check_tpic(g);
        LraReport lra = check_lra_near_intersections(g, tp);
        json out;
        json regions = json::array();
        for (const auto& r : g.regions) {
            json o;
            o["pattern"] = r.pattern.key();
            o["witness"] = std::vector<double>(r.witness.data(),
                                               r.witness.data() + r.witness.size());
            o["radius"] = r.radius;
            o["touches_bbox"] = r.touches_bbox;
            regions.push_back(std::move(o));
        }
        out["regions"] = std::move(regions);
        out["region_count"] = g.regions.size();
        out["tpic"] = tpic_json(tp);
        out["lra"] = lra_json(lra);
        if (p.arch.n0() == 2) {
            BentHyperplanes bent = bent_hyperplanes(g);
            out["curve_count"] = bent.curve_count();
            if (svg_path) render_svg(g, bent, svg_path);
        } else if (svg_path) {
            return fail(RF_ERR_UNSUPPORTED, "SVG rendering requires n0 = 2");
        }
        *report_json = dup_string(out.dump(2));
        return RF_OK;
    });
}

rf_status rf_mechanisms(const rf_net* net, uint64_t seed, char** report_json) {
    return guarded([&] {
        if (!net || !report_json) throw std::invalid_argument("null argument");
        const Params& p = net->params;
        json out;
        json dead = json::array();
        for (const auto& f : detect_stably_unactivated(p, 1e-6, seed)) {
            json o;
            o["layer"] = f.layer;
            o["neuron"] = f.neuron;
            o["criterion"] =
                f.criterion == DeadCriterion::orthant ? "orthant-separation" : "sampled";
            dead.push_back(std::move(o));
        }
        out["stably_unactivated"] = std::move(dead);
        json co = json::array();
        for (const auto& f : detect_never_coactive(p, seed)) {
            json o;
            o["layer"] = f.layer;
            o["i"] = f.i;
            o["j"] = f.j;
            o["evidence"] = f.exact ? "regions" : "sampled";
            co.push_back(std::move(o));
        }
        out["never_coactive"] = std::move(co);
        if (p.arch.n0() <= 3) {
            json col = json::array();
            for (const auto& f : detect_collapse(p)) {
                json o;
                o["region_a"] = f.region_a;
                o["region_b"] = f.region_b;
                o["layer"] = f.layer;
                o["neuron"] = f.neuron;
                col.push_back(std::move(o));
            }
            out["collapse"] = std::move(col);
        }
        json low = json::array();
        for (int l = 1; l <= p.arch.depth() - 1; ++l) {
            auto [dim, deficiency] =
                detect_lowdim_image(p, l, 10 * p.arch.widths[l] + 50, seed);
            json o;
            o["layer"] = l;
            o["dimension"] = dim;
            o["deficiency"] = deficiency;
            low.push_back(std::move(o));
        }
        out["lowdim_image"] = std::move(low);
        out["seed"] = seed;
        *report_json = dup_string(out.dump(2));
        return RF_OK;
    });
}

rf_status rf_construct(const int* widths, int n, uint64_t seed, rf_net** out,
                       char** state_json) {
    return guarded([&] {
        if (!out) throw std::invalid_argument("null argument");
        Architecture a = arch_from(widths, n);
        auto [params, state] = construct_no_hidden_symmetry(a, seed);
        *out = new rf_net{std::move(params)};
        if (state_json) *state_json = dup_string(state.log_json);
        return RF_OK;
    });
}

rf_status rf_verify(const rf_net* net, uint64_t seed, char** report_json) {
    return guarded([&] {
        if (!net || !report_json) throw std::invalid_argument("null argument");
        CertificationReport rep = verify_construction(net->params, seed);
        json out;
        out["tpic"] = tpic_json(rep.tpic);
        out["lra"] = lra_json(rep.lra);
        out["fdim"] = fdim_json(rep.fdim);
        out["certified"] = rep.certified;
        *report_json = dup_string(out.dump(2));
        return RF_OK;
    });
}

}  // extern "C"
