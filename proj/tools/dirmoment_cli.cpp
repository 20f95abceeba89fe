#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dirmoment/characters.hpp"
#include "dirmoment/errors.hpp"
#include "dirmoment/identities.hpp"
#include "dirmoment/moment.hpp"

using namespace dirmoment;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json cert_json(const Certified& c) {
    return {{"quad_err", c.quad_err}, {"trunc_err", c.trunc_err}, {"sigma", c.sigma}, {"seconds", c.seconds}};
}

json config_json(const MomentConfig& c) {
    json a = json::array(), b = json::array();
    for (cplx x : c.A) a.push_back(cjson(x));
    for (cplx x : c.B) b.push_back(cjson(x));
    return {{"Q", c.Q},
            {"eta", c.eta},
            {"A", a},
            {"B", b},
            {"h", c.h},
            {"k", c.k},
            {"C", c.split_C()},
            {"P", c.trunc.P},
            {"M", c.trunc.M},
            {"delta0", c.trunc.delta0},
            {"sigma", c.grid.sigma},
            {"grid_h", c.grid.h},
            {"T_s", c.grid.T_s},
            {"T_u", c.grid.T_u},
            {"u_stride", c.grid.u_stride},
            {"circle_points", c.grid.circle_points},
            {"threads", c.threads}};
}

const char* kVerifyHeader =
    "Q,S_re,S_im,I0_re,I0_im,I1_re,I1_im,L_re,L_im,D_re,D_im,U_re,U_im,residual,rel_residual,"
    "I0_quad_err,I0_trunc_err,I1_quad_err,I1_trunc_err";

std::string verify_row(const MomentReport& r) {
    std::string s = g17(r.Q);
    for (cplx z : {r.S, r.I0, r.I1, r.parts.L, r.parts.D, r.parts.U}) s += "," + g17(z.real()) + "," + g17(z.imag());
    for (double x : {r.residual, r.rel_residual, r.cert_I0.quad_err, r.cert_I0.trunc_err, r.cert_I1.quad_err,
                     r.cert_I1.trunc_err})
        s += "," + g17(x);
    return s;
}

struct Common {
    std::string config;
    std::string out = ".";
    int threads = 1;
    std::uint64_t seed = IdentityOptions{}.seed;
    std::optional<std::int64_t> prime_cutoff;
    std::optional<int> series_cutoff;
    std::optional<double> tolerance;
};

int cmd_verify(const Common& o) {
    RunConfig rc = o.config.empty() ? RunConfig{} : load_run_config(o.config);
    MomentConfig base = rc.base;
    base.threads = o.threads;
    if (o.prime_cutoff) base.trunc.P = *o.prime_cutoff;
    if (o.series_cutoff) base.trunc.M = *o.series_cutoff;
    std::filesystem::create_directories(o.out);
    std::string csv_path = (std::filesystem::path(o.out) / "verify.csv").string();
    std::string json_path = (std::filesystem::path(o.out) / "manifest.json").string();
    std::ofstream csv(csv_path);
    csv << kVerifyHeader << "\n";
    json rows = json::array();
    for (double Q : rc.Q_list) {
        MomentConfig cfg = base;
        cfg.Q = Q;
        if (!rc.explicit_shifts) default_shifts(rc.nA, rc.nB, Q, cfg.A, cfg.B);
        cfg.validate();
        MomentReport r = run_moment(cfg);
        csv << verify_row(r) << "\n";
        std::cout << "Q=" << Q << "  S=" << g17(r.S.real()) << "  I0+I1=" << g17((r.I0 + r.I1).real())
                  << "  rel_residual=" << g17(r.rel_residual) << "\n";
        rows.push_back({{"config", config_json(cfg)},
                        {"S", cjson(r.S)},
                        {"I0", cjson(r.I0)},
                        {"I1", cjson(r.I1)},
                        {"L", cjson(r.parts.L)},
                        {"D", cjson(r.parts.D)},
                        {"U", cjson(r.parts.U)},
                        {"residual", r.residual},
                        {"rel_residual", r.rel_residual},
                        {"certificates", {{"I0", cert_json(r.cert_I0)}, {"I1", cert_json(r.cert_I1)}}},
                        {"seconds", {{"S", r.seconds_S}, {"I0", r.seconds_I0}, {"I1", r.seconds_I1}}}});
    }
    json manifest = {{"toolkit", "dirmoment"},
                     {"version", kVersion},
                     {"command", "verify"},
                     {"config_path", o.config},
                     {"base_config", config_json(base)},
                     {"rows", rows},
                     {"outputs", {{"csv", csv_path}, {"json", json_path}}}};
    std::ofstream(json_path) << manifest.dump(2) << "\n";
    return 0;
}

int cmd_identities(const Common& o, std::int64_t cases, bool corrupt) {
    IdentityOptions io;
    io.seed = o.seed;
    io.corrupt_tau = corrupt;
    if (o.prime_cutoff) io.P = *o.prime_cutoff;
    io.P_check = 3 * io.P;
    if (cases >= 0) {
        io.tau_cases = cases;
        io.pair_count = std::min<std::int64_t>(io.pair_count, cases);
        io.kfun_cases = std::min<std::int64_t>(io.kfun_cases, cases);
        io.product_cases = std::min<std::int64_t>(io.product_cases, cases);
    }
    if (cases == 0) std::cerr << "warning: case count 0, every suite passes vacuously\n";
    std::vector<SuiteResult> rs = run_identity_suites(io);
    bool ok = true;
    json js = json::array();
    for (SuiteResult& r : rs) {
        if (o.tolerance && r.name != "euler_tail_certificates") {
            r.tolerance = *o.tolerance;
            r.failures = (r.cases > 0 && !(r.worst <= r.tolerance)) ? std::max<std::int64_t>(r.failures, 1) : 0;
        }
        ok = ok && r.pass();
        std::printf("%-26s %s  cases=%lld  failures=%lld  worst=%.3e  tol=%.1e  %.2fs\n", r.name.c_str(),
                    r.pass() ? "PASS" : "FAIL", static_cast<long long>(r.cases), static_cast<long long>(r.failures),
                    r.worst, r.tolerance, r.seconds);
        js.push_back({{"suite", r.name},
                      {"cases", r.cases},
                      {"failures", r.failures},
                      {"worst", r.worst},
                      {"tolerance", r.tolerance},
                      {"seconds", r.seconds},
                      {"pass", r.pass()}});
    }
    json summary = {{"toolkit", "dirmoment"}, {"version", kVersion}, {"command", "identities"},
                    {"seed", o.seed},         {"suites", js},       {"pass", ok}};
    std::filesystem::create_directories(o.out);
    std::ofstream(std::filesystem::path(o.out) / "identities.json") << summary.dump(2) << "\n";
    return ok ? 0 : 1;
}

int cmd_chartable(std::int64_t q, const std::string& path) {
    if (q < 1) throw PreconditionError("q: must be >= 1");
    if (euler_phi(q) > 100000) throw ScaleError("chartable: phi(q) exceeds 1e5");
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!path.empty() && path != "-") {
        file.open(path);
        os = &file;
    }
    *os << "q,index,exponents,parity,conductor,primitive\n";
    std::vector<Character> table = characters(q);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const Character& c = table[i];
        std::string ex;
        for (std::size_t j = 0; j < c.exponents().size(); ++j) ex += (j ? ";" : "") + std::to_string(c.exponents()[j]);
        *os << q << "," << i << "," << ex << "," << (c.even() ? "even" : "odd") << "," << c.conductor() << ","
            << (c.primitive() ? 1 : 0) << "\n";
    }
    return 0;
}

int cmd_selfcheck(const Common& o) {
    bool ok = true;
    auto line = [&](const std::string& name, bool pass, double err) {
        ok = ok && pass;
        std::printf("%-36s %s  (%.3e)\n", name.c_str(), pass ? "PASS" : "FAIL", err);
    };
    double tol = o.tolerance.value_or(1e-10);
    IdentityOptions io;
    io.seed = o.seed;
    io.tau_cases = 200;
    io.pair_qmax = 40;
    io.pair_count = 10;
    for (auto* f : {suite_pair_sums, suite_multiplicativity, suite_swap_exchange, suite_swap_expansion}) {
        SuiteResult r = f(io);
        line(r.name, r.pass(), r.worst);
    }
    MomentConfig cfg = default_config(12);
    cfg.threads = o.threads;
    cplx a = compute_S_characters(cfg), b = compute_S_divisor(cfg);
    double e = std::abs(a - b) / std::abs(b);
    line("S characters vs divisor (Q=12)", e <= tol, e);
    LDU p = split_LDU(cfg);
    e = std::abs(p.total() - b) / std::abs(b);
    line("S = L + D + U (Q=12)", e <= tol, e);
    cfg.C = 2;
    ComplementaryReport cr = complementary_modulus_check(cfg, 50000000);
    line("complementary modulus (Q=12, C=2)", !cr.partial && cr.rel_diff <= 1e-9, cr.rel_diff);
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Twisted moments of even primitive Dirichlet L-functions and their recipe predictions"};
    app.require_subcommand(1);
    Common o;
    std::int64_t cases = -1, q = 0;
    bool corrupt = false;
    std::string chart_out;

    auto add_common = [&](CLI::App* sc, bool with_config) {
        if (with_config) sc->add_option("--config", o.config, "YAML run configuration")->envname("DIRMOMENT_CONFIG");
        sc->add_option("--out", o.out, "output directory")->envname("DIRMOMENT_OUT");
        sc->add_option("--threads", o.threads, "parallelism degree")->envname("DIRMOMENT_THREADS")->check(CLI::PositiveNumber);
        sc->add_option("--seed", o.seed, "random seed")->envname("DIRMOMENT_SEED");
        sc->add_option("--prime-cutoff", o.prime_cutoff, "Euler product prime cutoff P")->envname("DIRMOMENT_PRIME_CUTOFF");
        sc->add_option("--series-cutoff", o.series_cutoff, "local series cutoff M")->envname("DIRMOMENT_SERIES_CUTOFF");
        sc->add_option("--tolerance", o.tolerance, "pass threshold override")->envname("DIRMOMENT_TOLERANCE");
    };
    CLI::App* verify = app.add_subcommand("verify", "S versus I0 + I1 sweep over the configured Q list");
    add_common(verify, true);
    CLI::App* ident = app.add_subcommand("identities", "randomized identity suites");
    add_common(ident, false);
    ident->add_option("--cases", cases, "cases per tau suite (others capped by it)")->envname("DIRMOMENT_CASES");
    ident->add_flag("--corrupt-tau", corrupt, "negative control: perturb one tau entry in the swap-exchange suite")
        ->envname("DIRMOMENT_CORRUPT_TAU");
    CLI::App* chart = app.add_subcommand("chartable", "character table mod q as CSV");
    chart->add_option("q", q, "modulus")->required();
    chart->add_option("--out", chart_out, "output CSV path (default stdout)")->envname("DIRMOMENT_OUT");
    CLI::App* self = app.add_subcommand("selfcheck", "fast consistency checks at tiny scale");
    add_common(self, false);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*verify) return cmd_verify(o);
        if (*ident) return cmd_identities(o, cases, corrupt);
        if (*chart) return cmd_chartable(q, chart_out);
        if (*self) return cmd_selfcheck(o);
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ScaleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
