#include "dirmoment/moment.hpp"

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "dirmoment/characters.hpp"
#include "dirmoment/errors.hpp"

namespace dirmoment {

namespace {

// a_m = tau_E(m) V(m / X) / sqrt(m) for 1 <= m < X; index 0 unused.
std::vector<cplx> weight_table(const ShiftSet& E, const MomentConfig& cfg) {
    double X = cfg.X();
    std::int64_t lim = static_cast<std::int64_t>(std::ceil(X * cfg.V->hi));
    std::vector<cplx> a(lim + 1, 0.0);
    if (lim < 1) return a;
    TauTable t(E, lim);
    for (std::int64_t m = 1; m <= lim; ++m) {
        double v = window_eval(*cfg.V, m / X);
        if (v != 0) a[m] = t[m] * v / std::sqrt(static_cast<double>(m));
    }
    return a;
}

// Moduli q in the support of W(q / Q) with gcd(q, hk) = 1.
std::vector<std::int64_t> support_q(const MomentConfig& cfg) {
    std::vector<std::int64_t> qs;
    std::int64_t lo = static_cast<std::int64_t>(std::floor(cfg.Q * cfg.W->lo)) + 1;
    std::int64_t hi = static_cast<std::int64_t>(std::ceil(cfg.Q * cfg.W->hi));
    for (std::int64_t q = std::max<std::int64_t>(lo, 1); q <= hi; ++q)
        if (std::gcd(q, cfg.h * cfg.k) == 1 && window_eval(*cfg.W, q / cfg.Q) != 0) qs.push_back(q);
    return qs;
}

template <class T, class F>
std::vector<T> per_q(const MomentConfig& cfg, const std::vector<std::int64_t>& qs, F&& fn) {
    std::vector<T> out(qs.size());
    tbb::task_arena arena(cfg.threads);
    arena.execute([&] {
        tbb::parallel_for(std::size_t{0}, qs.size(), [&](std::size_t i) { out[i] = fn(qs[i]); });
    });
    return out;
}

}  // namespace

cplx compute_S_characters(const MomentConfig& cfg) {
    cfg.validate();
    std::int64_t qmax = static_cast<std::int64_t>(std::ceil(cfg.Q * cfg.W->hi));
    double work = 0;
    for (std::int64_t q = 1; q <= qmax; ++q) work += static_cast<double>(euler_phi(q));
    if (work > 1e7)
        throw ScaleError("compute_S_characters: character enumeration too large (sum phi(q) = " +
                         std::to_string(static_cast<long long>(work)) + " > 1e7); use compute_S_divisor");
    auto a = weight_table(cfg.A, cfg), b = weight_table(cfg.B, cfg);
    std::vector<std::int64_t> qs;
    for (std::int64_t q = 1; q <= qmax; ++q)
        if (window_eval(*cfg.W, q / cfg.Q) != 0) qs.push_back(q);
    auto parts = per_q<cplx>(cfg, qs, [&](std::int64_t q) {
        double wq = window_eval(*cfg.W, q / cfg.Q);
        KahanSum s;
        for (const Character& chi : characters(q)) {
            if (!chi.even() || !chi.primitive()) continue;
            cplx twist = chi.value(cfg.h).to_complex() * std::conj(chi.value(cfg.k).to_complex());
            if (twist == 0.0) continue;
            KahanSum sa, sb;
            for (std::size_t m = 1; m < a.size(); ++m)
                if (a[m] != 0.0) sa.add(a[m] * chi.value(static_cast<std::int64_t>(m)).to_complex());
            for (std::size_t n = 1; n < b.size(); ++n)
                if (b[n] != 0.0) sb.add(b[n] * std::conj(chi.value(static_cast<std::int64_t>(n)).to_complex()));
            s.add(wq * twist * sa.value() * sb.value());
        }
        return s.value();
    });
    KahanSum total;
    for (cplx x : parts) total.add(x);
    return total.value();
}

LDU split_LDU(const MomentConfig& cfg) {
    cfg.validate();
    auto a = weight_table(cfg.A, cfg), b = weight_table(cfg.B, cfg);
    std::int64_t g0 = std::gcd(cfg.h, cfg.k), H = cfg.h / g0, K = cfg.k / g0;
    double C = cfg.split_C();
    std::vector<std::int64_t> qs = support_q(cfg);
    auto parts = per_q<LDU>(cfg, qs, [&](std::int64_t q) {
        double wq = window_eval(*cfg.W, q / cfg.Q);
        // Diagonal mh = nk: m = K l, n = H l.
        KahanSum dg;
        for (std::int64_t l = 1; K * l < static_cast<std::int64_t>(a.size()) && H * l < static_cast<std::int64_t>(b.size()); ++l)
            if (std::gcd(l, q) == 1) dg.add(a[K * l] * b[H * l]);
        cplx diag = dg.value();
        KahanSum L, D, U;
        for (std::int64_t d : divisors(q)) {
            std::int64_t c = q / d;
            int mu = mobius(c);
            if (mu == 0) continue;
            std::vector<cplx> Am(d, 0.0), Bn(d, 0.0);
            for (std::size_t m = 1; m < a.size(); ++m)
                if (std::gcd(static_cast<std::int64_t>(m), q) == 1) Am[m % d] += a[m];
            for (std::size_t n = 1; n < b.size(); ++n)
                if (std::gcd(static_cast<std::int64_t>(n), q) == 1) Bn[n % d] += b[n];
            // d | mh - nk  <=>  n = m h kbar (mod d); d | mh + nk  <=>  n = -m h kbar (mod d).
            std::int64_t hk = (cfg.h % d) * mod_inverse(cfg.k % d, d) % d;
            KahanSum tm, tp;
            for (std::int64_t r = 0; r < d; ++r) {
                if (Am[r] == 0.0) continue;
                std::int64_t s = r * hk % d;
                tm.add(Am[r] * Bn[s]);
                tp.add(Am[r] * Bn[(d - s) % d]);
            }
            double coef = 0.5 * wq * static_cast<double>(euler_phi(d)) * mu;
            cplx all = coef * (tm.value() + tp.value());
            if (c > C) {
                L.add(all);
            } else {
                // The + copy meets mh = nk only when d | 2.
                cplx dpart = coef * diag * (2 % d == 0 ? 2.0 : 1.0);
                D.add(dpart);
                U.add(all - dpart);
            }
        }
        return LDU{L.value(), D.value(), U.value()};
    });
    KahanSum L, D, U;
    for (const LDU& p : parts) {
        L.add(p.L);
        D.add(p.D);
        U.add(p.U);
    }
    return {L.value(), D.value(), U.value()};
}

cplx compute_S_divisor(const MomentConfig& cfg) { return split_LDU(cfg).total(); }

ComplementaryReport complementary_modulus_check(const MomentConfig& cfg, std::int64_t sample_budget) {
    cfg.validate();
    if (cfg.Q > 20) throw PreconditionError("complementary_modulus_check: intended for Q <= 20");
    ComplementaryReport rep;
    rep.U_direct = split_LDU(cfg).U;
    auto a = weight_table(cfg.A, cfg), b = weight_table(cfg.B, cfg);
    double C = cfg.split_C();
    const std::int64_t h = cfg.h, k = cfg.k;
    std::map<std::int64_t, std::vector<Character>> tables;
    auto table = [&](std::int64_t M) -> const std::vector<Character>& {
        auto it = tables.find(M);
        if (it == tables.end()) it = tables.emplace(M, characters(M)).first;
        return it->second;
    };
    auto mod = [](std::int64_t x, std::int64_t M) { return ((x % M) + M) % M; };
    KahanSum U;
    std::int64_t cmax = static_cast<std::int64_t>(std::floor(C));
    for (std::int64_t c = 1; c <= cmax && !rep.partial; ++c) {
        int muc = mobius(c);
        if (muc == 0 || std::gcd(c, h * k) != 1) continue;
        for (std::size_t m = 1; m < a.size() && !rep.partial; ++m) {
            if (a[m] == 0.0 || std::gcd(static_cast<std::int64_t>(m), c) != 1) continue;
            for (std::size_t n = 1; n < b.size() && !rep.partial; ++n) {
                if (b[n] == 0.0 || std::gcd(static_cast<std::int64_t>(n), c) != 1) continue;
                std::int64_t mh = static_cast<std::int64_t>(m) * h, nk = static_cast<std::int64_t>(n) * k;
                if (mh == nk) continue;
                std::int64_t g = std::gcd(mh, nk), x = mh / g, y = nk / g;
                KahanSum dsum;
                for (int sign : {-1, 1}) {
                    std::int64_t N = std::llabs(mh + sign * nk);  // |mh -+ nk|
                    // W(c N / (g ell Q)) needs lo < c N / (g ell Q) < hi.
                    double top = c * static_cast<double>(N) / (g * cfg.Q);
                    std::int64_t l_lo = static_cast<std::int64_t>(std::floor(top / cfg.W->hi)) + 1;
                    std::int64_t l_hi = static_cast<std::int64_t>(std::ceil(top / cfg.W->lo));
                    for (std::int64_t ell = std::max<std::int64_t>(l_lo, 1); ell <= l_hi; ++ell) {
                        double wv = window_eval(*cfg.W, top / static_cast<double>(ell));
                        if (wv == 0) continue;
                        double amp = static_cast<double>(N) / static_cast<double>(g * ell) * wv;
                        for (std::int64_t aa : divisors(g)) {
                            int mua = mobius(aa);
                            if (mua == 0) continue;
                            // The psi-sum vanishes once e a ell exceeds |x -+ y|.
                            std::int64_t emax = (N / g) / (aa * ell);
                            for (std::int64_t e = 1; e <= emax; ++e) {
                                int mue = mobius(e);
                                if (mue == 0 || std::gcd(e, g) != 1) continue;
                                std::int64_t M = e * aa * ell;
                                if (std::gcd(M, x * y) != 1) continue;
                                const auto& chars = table(M);
                                rep.evaluations += static_cast<std::int64_t>(chars.size());
                                if (rep.evaluations > sample_budget) {
                                    rep.partial = true;
                                    break;
                                }
                                // psi(x) conj(psi(-+ y)): the "-" copy pairs with +y, the "+" copy with -y.
                                std::int64_t yy = mod(-sign * y, M), xx = mod(x, M);
                                KahanSum ps;
                                for (const Character& psi : chars)
                                    ps.add(psi.value(xx).to_complex() * std::conj(psi.value(yy).to_complex()));
                                double ind = ps.value().real() / static_cast<double>(chars.size());
                                dsum.add(static_cast<double>(mue) / e * mua * ind * amp);
                            }
                            if (rep.partial) break;
                        }
                        if (rep.partial) break;
                    }
                }
                U.add(0.5 * muc * a[m] * b[n] * dsum.value());
            }
        }
    }
    rep.U_switched = U.value();
    double den = std::max(std::abs(rep.U_direct), 1e-300);
    rep.rel_diff = std::abs(rep.U_switched - rep.U_direct) / den;
    if (rep.U_direct == 0.0 && rep.U_switched == 0.0) rep.rel_diff = 0;
    return rep;
}

MomentReport run_moment(const MomentConfig& cfg) {
    cfg.validate();
    MomentReport r;
    r.Q = cfg.Q;
    auto t0 = std::chrono::steady_clock::now();
    r.parts = split_LDU(cfg);
    r.S = r.parts.total();
    r.seconds_S = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.cert_I0 = compute_I(0, cfg.h, cfg.k, cfg);
    r.I0 = r.cert_I0.value;
    r.seconds_I0 = r.cert_I0.seconds;
    bool repeats = cfg.A.has_repeats() || cfg.B.has_repeats();
    r.cert_I1 = repeats ? i1_confluent(cfg.h, cfg.k, cfg) : compute_I(1, cfg.h, cfg.k, cfg);
    r.I1 = r.cert_I1.value;
    r.seconds_I1 = r.cert_I1.seconds;
    r.residual = std::abs(r.S - r.I0 - r.I1);
    r.rel_residual = r.residual / std::abs(r.I0 + r.I1);
    return r;
}

}  // namespace dirmoment
