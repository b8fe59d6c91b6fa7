#include "net.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"
#include <json.hpp>

namespace relufd {

using nlohmann::json;

int Architecture::hidden_count() const {
    int s = 0;
    for (size_t i = 1; i + 1 < widths.size(); ++i) s += widths[i];
    return s;
}

int Architecture::neuron_count() const {
    int s = 0;
    for (size_t i = 1; i < widths.size(); ++i) s += widths[i];
    return s;
}

long long Architecture::param_count() const {
    long long d = 0;
    for (size_t i = 1; i < widths.size(); ++i) {
        d += static_cast<long long>(widths[i]) * (widths[i - 1] + 1);
    }
    return d - widths.back();
}

bool Architecture::valid(std::string* why) const {
    if (widths.size() < 2) {
        if (why) *why = "architecture needs at least (n0, n1)";
        return false;
    }
    for (int w : widths) {
        if (w < 1) {
            if (why) *why = "all widths must be >= 1";
            return false;
        }
    }
    if (param_count() <= 0) {
        if (why) *why = "parameter count must be positive";
        return false;
    }
    return true;
}

std::string Architecture::to_string() const {
    std::ostringstream os;
    for (size_t i = 0; i < widths.size(); ++i) {
        if (i) os << ',';
        os << widths[i];
    }
    return os.str();
}

Architecture Architecture::parse(const std::string& s) {
    Architecture a;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        a.widths.push_back(std::stoi(tok));
    }
    std::string why;
    if (!a.valid(&why)) throw std::invalid_argument("bad architecture '" + s + "': " + why);
    return a;
}

long long fdim_upper_bound(const Architecture& arch) {
    return arch.param_count() - arch.hidden_count();
}

Params Params::zeros(const Architecture& arch) {
    Params p;
    p.arch = arch;
    int d = arch.depth();
    for (int l = 0; l < d; ++l) {
        p.W.push_back(MatrixXd::Zero(arch.widths[l + 1], arch.widths[l]));
        if (l < d - 1) p.b.push_back(VectorXd::Zero(arch.widths[l + 1]));
    }
    return p;
}

long long Params::w_offset(int l) const {
    long long off = 0;
    for (int j = 0; j < l; ++j) {
        off += W[j].size();
        if (j < arch.depth() - 1) off += arch.widths[j + 1];
    }
    return off;
}

long long Params::b_offset(int l) const {
    return w_offset(l) + W[l].size();
}

VectorXd Params::to_flat() const {
    VectorXd flat(flat_size());
    long long k = 0;
    int d = arch.depth();
    for (int l = 0; l < d; ++l) {
        for (int i = 0; i < W[l].rows(); ++i)
            for (int j = 0; j < W[l].cols(); ++j) flat[k++] = W[l](i, j);
        if (l < d - 1)
            for (int i = 0; i < b[l].size(); ++i) flat[k++] = b[l][i];
    }
    return flat;
}

Params Params::from_flat(const Architecture& arch, const VectorXd& flat) {
    if (flat.size() != arch.param_count())
        throw std::invalid_argument("flat vector length does not match architecture");
    Params p = zeros(arch);
    long long k = 0;
    int d = arch.depth();
    for (int l = 0; l < d; ++l) {
        for (int i = 0; i < p.W[l].rows(); ++i)
            for (int j = 0; j < p.W[l].cols(); ++j) p.W[l](i, j) = flat[k++];
        if (l < d - 1)
            for (int i = 0; i < p.b[l].size(); ++i) p.b[l][i] = flat[k++];
    }
    return p;
}

double Params::flat_get(long long i) const {
    int d = arch.depth();
    for (int l = 0; l < d; ++l) {
        long long wo = w_offset(l);
        if (i < wo + W[l].size()) {
            long long r = i - wo;
            return W[l](r / W[l].cols(), r % W[l].cols());
        }
        if (l < d - 1) {
            long long bo = b_offset(l);
            if (i < bo + b[l].size()) return b[l][i - bo];
        }
    }
    throw std::out_of_range("flat index out of range");
}

void Params::flat_set(long long i, double v) {
    int d = arch.depth();
    for (int l = 0; l < d; ++l) {
        long long wo = w_offset(l);
        if (i < wo + W[l].size()) {
            long long r = i - wo;
            W[l](r / W[l].cols(), r % W[l].cols()) = v;
            return;
        }
        if (l < d - 1) {
            long long bo = b_offset(l);
            if (i < bo + b[l].size()) {
                b[l][i - bo] = v;
                return;
            }
        }
    }
    throw std::out_of_range("flat index out of range");
}

std::vector<int> Ternary::dim_per_layer() const {
    std::vector<int> out;
    for (const auto& v : s) out.push_back(static_cast<int>((v.array() > 0).count()));
    return out;
}

int Ternary::zero_count() const {
    int z = 0;
    for (const auto& v : s) z += static_cast<int>((v.array() == 0).count());
    return z;
}

std::string Ternary::key() const {
    std::string k;
    for (size_t l = 0; l < s.size(); ++l) {
        if (l) k += '|';
        for (int i = 0; i < s[l].size(); ++i) {
            k += s[l][i] > 0 ? '+' : (s[l][i] < 0 ? '-' : '0');
        }
    }
    return k;
}

bool Ternary::all_pm() const {
    for (const auto& v : s)
        if ((v.array() == 0).any()) return false;
    return true;
}

bool Ternary::operator==(const Ternary& o) const {
    if (s.size() != o.s.size()) return false;
    for (size_t l = 0; l < s.size(); ++l)
        if (s[l] != o.s[l]) return false;
    return true;
}

EvalTrace forward(const Params& p, const VectorXd& x) {
    if (x.size() != p.arch.n0())
        throw std::invalid_argument("input length does not match n0");
    EvalTrace t;
    t.x = x;
    VectorXd cur = x;
    int d = p.arch.depth();
    for (int l = 0; l < d; ++l) {
        VectorXd z = p.W[l] * cur;
        if (l < d - 1) z += p.b[l];
        t.z.push_back(z);
        if (l < d - 1) {
            VectorXd a = z.cwiseMax(0.0);
            t.a.push_back(a);
            cur = a;
        }
    }
    t.output = t.z.back();
    return t;
}

Ternary ternary_label(const Params& p, const VectorXd& x, double zero_atol) {
    EvalTrace t = forward(p, x);
    Ternary lab;
    for (const auto& z : t.z) {
        VectorXi s(z.size());
        for (int i = 0; i < z.size(); ++i) {
            s[i] = std::abs(z[i]) <= zero_atol ? 0 : (z[i] > 0 ? 1 : -1);
        }
        lab.s.push_back(s);
    }
    return lab;
}

Params he_init(const Architecture& arch, uint64_t seed, double bias_std) {
    std::string why;
    if (!arch.valid(&why)) throw std::invalid_argument(why);
    Params p = Params::zeros(arch);
    Rng root(Rng::derive_key(seed, "he-init"));
    int d = arch.depth();
    for (int l = 0; l < d; ++l) {
        double wstd = std::sqrt(2.0 / arch.widths[l]);
        Rng rw = root.split("w", l);
        for (int i = 0; i < p.W[l].rows(); ++i)
            for (int j = 0; j < p.W[l].cols(); ++j) p.W[l](i, j) = wstd * rw.normal();
        if (l < d - 1) {
            Rng rb = root.split("b", l);
            for (int i = 0; i < p.b[l].size(); ++i) p.b[l][i] = bias_std * rb.normal();
        }
    }
    return p;
}

std::string to_json(const Params& p) {
    json doc;
    doc["arch"] = p.arch.widths;
    json ws = json::array();
    for (const auto& W : p.W) {
        json rows = json::array();
        for (int i = 0; i < W.rows(); ++i) {
            json row = json::array();
            for (int j = 0; j < W.cols(); ++j) row.push_back(W(i, j));
            rows.push_back(std::move(row));
        }
        ws.push_back(std::move(rows));
    }
    doc["weights"] = std::move(ws);
    json bs = json::array();
    for (const auto& b : p.b) {
        json v = json::array();
        for (int i = 0; i < b.size(); ++i) v.push_back(b[i]);
        bs.push_back(std::move(v));
    }
    doc["biases"] = std::move(bs);
    return doc.dump(2);
}

Params params_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("parse error: ") + e.what());
    }
    if (!doc.contains("arch") || !doc.contains("weights") || !doc.contains("biases"))
        throw std::runtime_error("document must contain arch, weights, biases");
    Architecture arch(doc["arch"].get<std::vector<int>>());
    std::string why;
    if (!arch.valid(&why)) throw std::runtime_error("invalid arch: " + why);
    int d = arch.depth();
    const json& ws = doc["weights"];
    const json& bs = doc["biases"];
    if (static_cast<int>(ws.size()) != d)
        throw std::runtime_error("expected one weight matrix per layer map");
    if (static_cast<int>(bs.size()) != d - 1)
        throw std::runtime_error("expected one bias vector per hidden layer");
    Params p = Params::zeros(arch);
    for (int l = 0; l < d; ++l) {
        if (static_cast<int>(ws[l].size()) != arch.widths[l + 1])
            throw std::runtime_error("weight matrix row count mismatch");
        for (int i = 0; i < arch.widths[l + 1]; ++i) {
            const json& row = ws[l][i];
            if (static_cast<int>(row.size()) != arch.widths[l])
                throw std::runtime_error("weight row length mismatch");
            for (int j = 0; j < arch.widths[l]; ++j) {
                if (!row[j].is_number())
                    throw std::runtime_error("non-numeric weight entry");
                double v = row[j].get<double>();
                if (!std::isfinite(v)) throw std::runtime_error("non-finite weight entry");
                p.W[l](i, j) = v;
            }
        }
        if (l < d - 1) {
            const json& bv = bs[l];
            if (static_cast<int>(bv.size()) != arch.widths[l + 1])
                throw std::runtime_error("bias length mismatch");
            for (int i = 0; i < arch.widths[l + 1]; ++i) {
                if (!bv[i].is_number())
                    throw std::runtime_error("non-numeric bias entry");
                double v = bv[i].get<double>();
                if (!std::isfinite(v)) throw std::runtime_error("non-finite bias entry");
                p.b[l][i] = v;
            }
        }
    }
    return p;
}

void save_params(const Params& p, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << to_json(p) << "\n";
    if (!f) throw std::runtime_error("write failed: " + path);
}

Params load_params(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return params_from_json(ss.str());
}

}  // namespace relufd
