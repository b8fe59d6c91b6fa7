// Command line front end; talks to the library through the C API only.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <relufd.h>

using nlohmann::json;

namespace {

struct NetHandle {
    rf_net* net = nullptr;
    ~NetHandle() { rf_net_free(net); }
};

struct StringHandle {
    char* s = nullptr;
    ~StringHandle() { rf_string_free(s); }
};

int die(const char* where) {
    std::cerr << where << ": " << rf_last_error() << "\n";
    return 1;
}

std::vector<int> parse_ints(const std::string& csv) {
    std::vector<int> out;
    std::istringstream is(csv);
    std::string tok;
    while (std::getline(is, tok, ','))
        if (!tok.empty()) out.push_back(std::stoi(tok));
    return out;
}

int load_net(const std::string& path, NetHandle& h) {
    if (rf_net_load(path.c_str(), &h.net) != RF_OK) return die("load");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"functional dimension and hidden-symmetry analysis of ReLU networks"};
    app.require_subcommand(1);

    // fdim
    auto* fdim = app.add_subcommand("fdim", "estimate functional dimension of a network");
    std::string fdim_net;
    int fdim_mult = 100;
    double fdim_tol = 1e-6;
    uint64_t fdim_seed = 1;
    fdim->add_option("--net", fdim_net, "network JSON file")->required();
    fdim->add_option("--m-mult", fdim_mult, "sample multiplier");
    fdim->add_option("--tol", fdim_tol, "rank tolerance");
    fdim->add_option("--seed", fdim_seed, "sample seed");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "He-init functional dimension sweep");
    std::string sw_depths = "4", sw_widths = "5", sw_mode = "input-equals-width";
    std::string sw_out;
    int sw_input = 5, sw_trials = 1000, sw_mult = 100, sw_threads = 0;
    double sw_tol = 1e-6;
    uint64_t sw_seed = 1;
    bool sw_full = false;
    sweep->add_option("--depths", sw_depths, "comma-separated depths");
    sweep->add_option("--widths", sw_widths, "comma-separated widths");
    sweep->add_option("--mode", sw_mode, "input-equals-width | fixed-input");
    sweep->add_option("--input", sw_input, "input dimension for fixed-input mode");
    sweep->add_option("--trials", sw_trials, "trials per architecture");
    sweep->add_option("--seed", sw_seed, "base seed");
    sweep->add_option("--out", sw_out, "output directory (resumable)");
    sweep->add_option("--threads", sw_threads, "thread budget (0 = auto)");
    sweep->add_option("--m-mult", sw_mult, "sample multiplier");
    sweep->add_option("--tol", sw_tol, "rank tolerance");
    sweep->add_flag("--full-scale", sw_full,
                    "5000 trials per architecture (slow; overrides --trials)");

    // msweep
    auto* msweep = app.add_subcommand("msweep", "m-sensitivity curve");
    std::string ms_arch, ms_mults = "2,10,50,100", ms_out;
    int ms_trials = 200, ms_threads = 0;
    uint64_t ms_seed = 1;
    msweep->add_option("--arch", ms_arch, "architecture, e.g. 5,5,5,5,1")->required();
    msweep->add_option("--mults", ms_mults, "ascending multipliers");
    msweep->add_option("--trials", ms_trials, "trials");
    msweep->add_option("--seed", ms_seed, "base seed");
    msweep->add_option("--threads", ms_threads, "thread budget (0 = auto)");
    msweep->add_option("--out", ms_out, "write result JSON here");

    // geometry
    auto* geometry = app.add_subcommand("geometry", "exact region geometry (n0 <= 3)");
    std::string geo_net, geo_svg;
    double geo_bbox = 10.0;
    geometry->add_option("--net", geo_net, "network JSON file")->required();
    geometry->add_option("--svg", geo_svg, "render bent hyperplanes (n0 = 2)");
    geometry->add_option("--bbox", geo_bbox, "bounding box radius");

    // mechanisms
    auto* mechanisms = app.add_subcommand("mechanisms", "hidden-symmetry mechanism report");
    std::string mech_net;
    uint64_t mech_seed = 7;
    mechanisms->add_option("--net", mech_net, "network JSON file")->required();
    mechanisms->add_option("--seed", mech_seed, "sampling seed");

    // construct
    auto* construct = app.add_subcommand("construct", "no-hidden-symmetry construction");
    std::string con_arch, con_out;
    uint64_t con_seed = 1;
    construct->add_option("--arch", con_arch, "architecture, e.g. 2,5,3,3")->required();
    construct->add_option("--seed", con_seed, "construction seed");
    construct->add_option("--out", con_out, "output directory")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "certify a network (TPIC, LRA, fdim)");
    std::string ver_net;
    uint64_t ver_seed = 17;
    verify->add_option("--net", ver_net, "network JSON file")->required();
    verify->add_option("--seed", ver_seed, "rank sample seed");

    CLI11_PARSE(app, argc, argv);

    if (*fdim) {
        NetHandle h;
        if (load_net(fdim_net, h)) return 1;
        StringHandle out;
        if (rf_estimate_fdim(h.net, fdim_mult, fdim_seed, fdim_tol, &out.s) != RF_OK)
            return die("fdim");
        std::cout << out.s << "\n";
        return 0;
    }

    if (*sweep) {
        json cfg;
        cfg["depths"] = parse_ints(sw_depths);
        cfg["widths"] = parse_ints(sw_widths);
        cfg["mode"] = sw_mode;
        cfg["input"] = sw_input;
        cfg["trials"] = sw_full ? 5000 : sw_trials;
        cfg["m_multiplier"] = sw_mult;
        cfg["rel_tol"] = sw_tol;
        cfg["seed"] = sw_seed;
        cfg["threads"] = sw_threads;
        if (!sw_out.empty()) cfg["out_dir"] = sw_out;
        if (sw_full)
            std::cerr << "full-scale sweep requested; expect hours at width 15\n";
        StringHandle out;
        if (rf_sweep(cfg.dump().c_str(), &out.s) != RF_OK) return die("sweep");
        std::cout << out.s << "\n";
        return 0;
    }

    if (*msweep) {
        json cfg;
        cfg["arch"] = parse_ints(ms_arch);
        cfg["multipliers"] = parse_ints(ms_mults);
        cfg["trials"] = ms_trials;
        cfg["seed"] = ms_seed;
        cfg["threads"] = ms_threads;
        StringHandle out;
        if (rf_m_sensitivity(cfg.dump().c_str(), &out.s) != RF_OK) return die("msweep");
        if (!ms_out.empty()) {
            std::ofstream f(ms_out);
            f << out.s << "\n";
            if (!f) {
                std::cerr << "msweep: cannot write " << ms_out << "\n";
                return 1;
            }
        }
        std::cout << out.s << "\n";
        return 0;
    }

    if (*geometry) {
        NetHandle h;
        if (load_net(geo_net, h)) return 1;
        StringHandle out;
        if (rf_geometry(h.net, geo_bbox, geo_svg.empty() ? nullptr : geo_svg.c_str(),
                        &out.s) != RF_OK)
            return die("geometry");
        std::cout << out.s << "\n";
        return 0;
    }

    if (*mechanisms) {
        NetHandle h;
        if (load_net(mech_net, h)) return 1;
        StringHandle out;
        if (rf_mechanisms(h.net, mech_seed, &out.s) != RF_OK) return die("mechanisms");
        std::cout << out.s << "\n";
        return 0;
    }

    if (*construct) {
        std::vector<int> widths = parse_ints(con_arch);
        NetHandle h;
        StringHandle state;
        if (rf_construct(widths.data(), static_cast<int>(widths.size()), con_seed,
                         &h.net, &state.s) != RF_OK)
            return die("construct");
        std::filesystem::create_directories(con_out);
        if (rf_net_save(h.net, (con_out + "/network.json").c_str()) != RF_OK)
            return die("construct");
        {
            std::ofstream f(con_out + "/construction.json");
            f << state.s << "\n";
        }
        StringHandle report;
        if (rf_verify(h.net, 17, &report.s) != RF_OK) return die("verify");
        {
            std::ofstream f(con_out + "/certification.json");
            f << report.s << "\n";
        }
        json rep = json::parse(report.s);
        std::cout << report.s << "\n";
        if (!rep.value("certified", false)) {
            std::cerr << "construction not certified\n";
            return 1;
        }
        return 0;
    }

    if (*verify) {
        NetHandle h;
        if (load_net(ver_net, h)) return 1;
        StringHandle out;
        if (rf_verify(h.net, ver_seed, &out.s) != RF_OK) return die("verify");
        std::cout << out.s << "\n";
        json rep = json::parse(out.s);
        return rep.value("certified", false) ? 0 : 1;
    }

    return 1;
}
