#include "dirmoment/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dirmoment/errors.hpp"

namespace dirmoment {

void EulerTruncation::validate() const {
    if (P < 100) throw PreconditionError("EulerTruncation: prime cutoff P must be >= 100");
    if (M < 10) throw PreconditionError("EulerTruncation: series cutoff M must be >= 10");
    if (!(delta0 > 0)) throw PreconditionError("EulerTruncation: delta0 must be positive");
    if (!(series_budget > 0)) throw PreconditionError("EulerTruncation: series_budget must be positive");
    if (!(eps > 0)) throw PreconditionError("EulerTruncation: eps must be positive");
}

void GridSettings::validate() const {
    if (!(sigma >= 1e-2)) throw PreconditionError("GridSettings: sigma must be >= 0.01");
    if (!(h > 0) || !(T_s > 0) || !(T_u > 0)) throw PreconditionError("GridSettings: h, T_s, T_u must be positive");
    if (u_stride < 1) throw PreconditionError("GridSettings: u_stride must be >= 1");
    if (circle_points < 4) throw PreconditionError("GridSettings: circle_points must be >= 4");
    if (circle_radius < 0) throw PreconditionError("GridSettings: circle_radius must be >= 0");
}

double MomentConfig::X() const { return std::pow(Q, eta); }

double MomentConfig::split_C() const { return C > 0 ? C : std::pow(Q, 1 - eta / 2); }

void MomentConfig::validate() const {
    if (!(Q > 0) || !std::isfinite(Q)) throw PreconditionError("Q: must be positive and finite");
    if (!(eta > 1 && eta < 2)) throw PreconditionError("eta: must satisfy 1 < eta < 2 (X = Q^eta regime)");
    if (h < 1 || k < 1) throw PreconditionError("h, k: must be positive integers");
    if (C != 0 && C < 1) throw PreconditionError("C: split parameter must be >= 1");
    if (threads < 1) throw PreconditionError("threads: must be >= 1");
    trunc.validate();
    grid.validate();
}

void default_shifts(std::size_t nA, std::size_t nB, double Q, ShiftSet& A, ShiftSet& B, double C0) {
    if (!(Q > 1)) throw PreconditionError("default_shifts: need Q > 1");
    double unit = C0 / std::log(Q);
    std::vector<cplx> a, b;
    std::size_t idx = 0;
    auto next = [&](std::size_t nu) {
        double sign = (idx++ % 2 == 0) ? 1.0 : -1.0;
        return cplx(sign * std::ldexp(unit, static_cast<int>(nu)), 0);
    };
    for (std::size_t nu = 1; nu <= nA; ++nu) a.push_back(next(nu));
    for (std::size_t nu = 1; nu <= nB; ++nu) b.push_back(next(nA + nu));
    A = ShiftSet(a);
    B = ShiftSet(b);
}

MomentConfig default_config(double Q, std::size_t nA, std::size_t nB) {
    MomentConfig c;
    c.Q = Q;
    default_shifts(nA, nB, Q, c.A, c.B);
    return c;
}

namespace {

double as_double(const YAML::Node& n, const std::string& key) {
    try {
        return n.as<double>();
    } catch (const YAML::Exception&) {
        throw PreconditionError(key + ": expected a number");
    }
}

std::int64_t as_int(const YAML::Node& n, const std::string& key) {
    double x = as_double(n, key);
    if (x != std::floor(x)) throw PreconditionError(key + ": expected an integer");
    return static_cast<std::int64_t>(x);
}

ShiftSet as_shifts(const YAML::Node& n, const std::string& key) {
    if (!n.IsSequence()) throw PreconditionError(key + ": expected a list of shifts");
    std::vector<cplx> xs;
    for (const auto& e : n) {
        if (e.IsSequence()) {
            if (e.size() != 2) throw PreconditionError(key + ": complex shift must be [re, im]");
            xs.emplace_back(as_double(e[0], key), as_double(e[1], key));
        } else {
            xs.emplace_back(as_double(e, key), 0.0);
        }
    }
    try {
        return ShiftSet(xs);
    } catch (const DomainError& e) {
        throw PreconditionError(key + ": " + e.what());
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& yaml_text) {
    RunConfig rc;
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw PreconditionError(std::string("config: not valid YAML: ") + e.what());
    }
    if (root.IsNull()) return rc;
    if (!root.IsMap()) throw PreconditionError("config: expected a flat key-value map");
    bool hasA = false, hasB = false;
    for (const auto& kv : root) {
        std::string key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        MomentConfig& b = rc.base;
        if (key == "Q") {
            rc.Q_list.clear();
            if (v.IsSequence())
                for (const auto& e : v) rc.Q_list.push_back(as_double(e, key));
            else if (!v.IsNull())
                rc.Q_list.push_back(as_double(v, key));
            for (double q : rc.Q_list)
                if (!(q > 1)) throw PreconditionError("Q: every entry must exceed 1");
        } else if (key == "eta") {
            b.eta = as_double(v, key);
        } else if (key == "A") {
            b.A = as_shifts(v, key);
            hasA = true;
        } else if (key == "B") {
            b.B = as_shifts(v, key);
            hasB = true;
        } else if (key == "nA") {
            rc.nA = static_cast<std::size_t>(as_int(v, key));
        } else if (key == "nB") {
            rc.nB = static_cast<std::size_t>(as_int(v, key));
        } else if (key == "h") {
            b.h = as_int(v, key);
        } else if (key == "k") {
            b.k = as_int(v, key);
        } else if (key == "C") {
            b.C = as_double(v, key);
        } else if (key == "P" || key == "prime_cutoff") {
            b.trunc.P = as_int(v, key);
        } else if (key == "M" || key == "series_cutoff") {
            b.trunc.M = static_cast<int>(as_int(v, key));
        } else if (key == "delta0") {
            b.trunc.delta0 = as_double(v, key);
        } else if (key == "sigma") {
            b.grid.sigma = as_double(v, key);
        } else if (key == "grid_h") {
            b.grid.h = as_double(v, key);
        } else if (key == "T_s") {
            b.grid.T_s = as_double(v, key);
        } else if (key == "T_u") {
            b.grid.T_u = as_double(v, key);
        } else if (key == "u_stride") {
            b.grid.u_stride = static_cast<int>(as_int(v, key));
        } else if (key == "circle_points") {
            b.grid.circle_points = static_cast<int>(as_int(v, key));
        } else if (key == "circle_radius") {
            b.grid.circle_radius = as_double(v, key);
        } else if (key == "threads") {
            b.threads = static_cast<int>(as_int(v, key));
        } else {
            throw PreconditionError(key + ": unknown configuration key");
        }
    }
    if (hasA != hasB) throw PreconditionError(hasA ? "B: must be given together with A" : "A: must be given together with B");
    rc.explicit_shifts = hasA;
    if (rc.explicit_shifts) {
        rc.nA = rc.base.A.size();
        rc.nB = rc.base.B.size();
    }
    if (rc.nA < 1 || rc.nB < 1) throw PreconditionError("nA: shift sets must be nonempty");
    // Regime check on a representative Q so bad keys fail before any work.
    MomentConfig probe = rc.base;
    probe.Q = rc.Q_list.empty() ? 100 : rc.Q_list.front();
    probe.validate();
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

}  // namespace dirmoment
