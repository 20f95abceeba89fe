#include "dirmoment/recipe.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <tuple>

#include "dirmoment/characters.hpp"
#include "dirmoment/errors.hpp"
#include "dirmoment/quadrature.hpp"

namespace dirmoment {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Coefficients of (1 + RF x)^{nF} / (1 - RE x)^{nE} up to degree L: a majorant of the ratio series.
std::vector<double> majorant(int nE, double RE, int nF, double RF, int L) {
    std::vector<double> b(L + 1, 0.0);
    b[0] = 1;
    for (int i = 0; i < nE; ++i)
        for (int j = 1; j <= L; ++j) b[j] += RE * b[j - 1];
    for (int i = 0; i < nF; ++i)
        for (int j = L; j >= 1; --j) b[j] += RF * b[j - 1];
    return b;
}

struct SeriesShape {
    int nE = 0, nF = 0;
    double RE = 0, RF = 0;  // largest |p^{-xi}| over E and F
};

// tail[m] bounds sum_{l > m} |c1(l + o1) c2(l + o2)| x^{l + (o1 + o2) / 2} for coefficients dominated by the
// shapes, with a geometric remainder past degree L. Folding sqrt(x) into each ratio keeps the terms finite.
std::vector<double> tail_profile(const SeriesShape& s1, const SeriesShape& s2, int o1, int o2, double x, int L) {
    double r = std::sqrt(x);
    auto b1 = majorant(s1.nE, s1.RE * r, s1.nF, s1.RF * r, L + o1);
    auto b2 = majorant(s2.nE, s2.RE * r, s2.nF, s2.RF * r, L + o2);
    std::vector<double> t(L + 1);
    for (int l = 0; l <= L; ++l) t[l] = b1[l + o1] * b2[l + o2];
    double rem = 0;
    if (L >= 1 && t[L] > 0) {
        double rho = t[L] / t[L - 1];
        rem = rho < 1 ? t[L] * rho / (1 - rho) : std::numeric_limits<double>::infinity();
    }
    std::vector<double> tail(L + 1);
    tail[L] = rem;
    for (int m = L - 1; m >= 0; --m) tail[m] = tail[m + 1] + t[m + 1];
    return tail;
}

// Smallest cutoff in [lo, hi] whose tail is at most target, or -1.
int choose_cutoff(const std::vector<double>& tail, int lo, int hi, double target) {
    hi = std::min(hi, static_cast<int>(tail.size()) - 1);
    for (int m = lo; m <= hi; ++m)
        if (tail[m] <= target) return m;
    return -1;
}

// Local series may run past M when the certified tail at M misses the budget.
constexpr int kCutoffGrowth = 8;

double max_abs_power(const ShiftSet& E, double p) {
    double r = 0;
    for (cplx x : E) r = std::max(r, std::abs(ppow(p, x)));
    return r;
}

}  // namespace

double prime_tail_sum(std::int64_t P, double delta) {
    // pi(x) <= 1.25506 x / log x and partial summation.
    double lp = std::log(static_cast<double>(P));
    return 1.25506 * (1 + delta) / (delta * lp) * std::pow(static_cast<double>(P), -delta);
}

void SwapTermSpec::validate() const {
    if (U.size() != V.size()) throw PreconditionError("SwapTermSpec: |U| must equal |V|");
    if (U.size() > 1) throw PreconditionError("SwapTermSpec: only ell in {0, 1} is supported");
    ShiftSet u = ShiftSet::unchecked(U), v = ShiftSet::unchecked(V);
    if (A.minus(u).size() + u.size() != A.size()) throw PreconditionError("SwapTermSpec: U is not contained in A");
    if (B.minus(v).size() + v.size() != B.size()) throw PreconditionError("SwapTermSpec: V is not contained in B");
}

LocalFactor local_factor_I(std::int64_t p, const SwapTermSpec& spec, cplx s1, cplx s2, std::int64_t h,
                           std::int64_t k, const EulerTruncation& trunc, bool divides_q) {
    spec.validate();
    if (!is_prime(p)) throw DomainError("local_factor_I: p is not prime");
    double pd = static_cast<double>(p);
    ShiftSet Us = ShiftSet::unchecked(spec.U).shifted(s1), Vs = ShiftSet::unchecked(spec.V).shifted(s2);
    ShiftSet E1 = spec.A.shifted(s1).minus(Us).united(Vs.negated());
    ShiftSet E2 = spec.B.shifted(s2).minus(Vs).united(Us.negated());
    cplx pref = 1;
    for (cplx g : E1)
        for (cplx d : E2) pref *= 1.0 - ppow(pd, 1.0 + g + d);
    int a = ord_p(h, p), b = ord_p(k, p);
    if (divides_q) {
        if (a + b > 0) throw PreconditionError("local_factor_I: p cannot divide both q and hk");
        return {pref, 0};
    }
    int m0 = std::max(b - a, 0), n0 = std::max(a - b, 0);
    int L = kCutoffGrowth * trunc.M + 200;
    auto tl = tail_profile({static_cast<int>(E1.size()), 0, max_abs_power(E1, pd), 0},
                           {static_cast<int>(E2.size()), 0, max_abs_power(E2, pd), 0}, m0, n0, 1 / pd, L);
    int M = choose_cutoff(tl, trunc.M, kCutoffGrowth * trunc.M, trunc.series_budget);
    if (M < 0)
        throw AccuracyError("local_factor_I: series truncation budget exceeded at p = " + std::to_string(p),
                            tl[kCutoffGrowth * trunc.M]);
    std::vector<cplx> c1 = tau_pp_series(E1, pd, M + m0), c2 = tau_pp_series(E2, pd, M + n0);
    KahanSum s;
    for (int l = 0; l <= M; ++l) s.add(c1[l + m0] * c2[l + n0] * std::pow(pd, -l - 0.5 * (m0 + n0)));
    double tail = tl[M];
    cplx sum = s.value();
    return {pref * sum, std::abs(pref) * tail};
}

double effective_sigma(const MomentConfig& cfg) {
    double worst = -std::numeric_limits<double>::infinity();
    for (cplx a : cfg.A)
        for (cplx b : cfg.B) worst = std::max(worst, -(a + b).real());
    double s = cfg.grid.sigma;
    if (std::isfinite(worst)) s = std::max(s, 0.5 * (worst + 0.1));
    return s;
}

// ---------------------------------------------------------------------------------------------
// Grid engine: I = (1/2 pi i) int_{(2 sigma)} J(u) Inner(u) du with
// Inner(u) = (1/2 pi i) int_{(sigma)} f(s) g(u - s) ds, both by trapezoid sums on s_j = sigma + i j h.

namespace {

// Shift value c + e u with e in {-1, 0, 1}.
struct Affine {
    cplx c;
    int e;
};

// (1 - p^{-1-a})^pow in local factors, zeta(1 + a)^pow in the prefactor.
struct Factor {
    Affine a;
    int pow;
};

struct GridTerm {
    std::vector<Affine> E1, F1, E2, F2;
    std::vector<Factor> pre, zeta;
    cplx q_const = 0;  // q^{-q_const - q_u u}
    int q_u = 0;
    std::vector<cplx> f, g;
    cplx weight = 1;
};

struct QEntry {
    double q;
    double coef;  // W(q/Q) times the even-primitive count
    std::vector<int> small;  // indices of p | q among the small primes
};

struct GridSetup {
    double sigma, hs;
    std::int64_t N;
    int stride;
    std::int64_t h, k;
    double logX;
    std::int64_t P;
    std::vector<std::int64_t> primes;  // product range: p <= max(P, 2Q) plus p | hk
    std::vector<int> small_index;      // slot for p < 2Q with p not dividing hk, else -1
    int n_small = 0;
    std::vector<QEntry> qs;
    const EulerTruncation* trunc;
    double T_u;
    int threads;
};

struct TermResult {
    cplx value, coarse;
    double tail_u = 0, tail_s = 0, trunc = 0;
};

double block_tail(const std::vector<cplx>& v, double step) {
    // Extrapolated int |v| beyond both ends from the decay across the last two blocks.
    std::size_t n = v.size(), blk = std::max<std::size_t>(n / 40, 4);
    if (n < 4 * blk) return 0;
    double total = 0;
    for (int side = 0; side < 2; ++side) {
        double a = 0, b = 0;
        for (std::size_t i = 0; i < blk; ++i) {
            std::size_t ia = side ? n - 1 - i : i, ib = side ? n - 1 - blk - i : blk + i;
            a += std::abs(v[ia]) * step;
            b += std::abs(v[ib]) * step;
        }
        if (a == 0) continue;
        double rho = (b > 0) ? a / b : 1;
        total += rho < 1 ? a * rho / (1 - rho) : 20 * a;
    }
    return total;
}

GridSetup make_setup(const MomentConfig& cfg, std::int64_t h, std::int64_t k, double sigma) {
    GridSetup G;
    G.sigma = sigma;
    G.hs = cfg.grid.h;
    G.N = static_cast<std::int64_t>(std::ceil(cfg.grid.T_s / G.hs));
    if (G.N % 2) ++G.N;
    G.stride = cfg.grid.u_stride;
    G.h = h;
    G.k = k;
    G.logX = std::log(cfg.X());
    G.trunc = &cfg.trunc;
    G.T_u = cfg.grid.T_u;
    G.threads = cfg.threads;
    std::int64_t hk = h * k;
    std::int64_t qmax = static_cast<std::int64_t>(std::ceil(2 * cfg.Q));
    G.P = std::max<std::int64_t>(cfg.trunc.P, qmax);
    G.primes = primes_up_to(G.P);
    for (auto [p, e] : factorize(hk))
        if (p > G.P) G.primes.push_back(p);
    G.small_index.assign(G.primes.size(), -1);
    std::map<std::int64_t, int> slot;
    for (std::size_t i = 0; i < G.primes.size(); ++i) {
        std::int64_t p = G.primes[i];
        if (p < qmax && hk % p != 0) {
            G.small_index[i] = G.n_small;
            slot[p] = G.n_small++;
        }
    }
    for (std::int64_t q = static_cast<std::int64_t>(std::floor(cfg.Q)) + 1; q < qmax; ++q) {
        double wq = window_eval(*cfg.W, q / cfg.Q);
        if (wq == 0 || std::gcd(q, hk) != 1) continue;
        QEntry e{static_cast<double>(q), wq * even_primitive_count(q), {}};
        for (auto [p, ex] : factorize(q)) e.small.push_back(slot.at(p));
        G.qs.push_back(std::move(e));
    }
    return G;
}

// Minimal decay exponent of |L_p - 1|: twice the smallest first-order exponent.
double term_delta(const GridTerm& T, double sigma, double delta0) {
    double emin = std::numeric_limits<double>::infinity();
    double reu = 2 * sigma;
    auto re = [&](const Affine& a) { return a.c.real() + a.e * reu; };
    for (const Factor& f : T.pre) emin = std::min(emin, 1 + re(f.a));
    auto both = [&](const std::vector<Affine>& X1, const std::vector<Affine>& X2) {
        for (const Affine& x : X1)
            for (const Affine& y : X2) emin = std::min(emin, 1 + re(x) + re(y));
    };
    both(T.E1, T.E2);
    both(T.E1, T.F2);
    both(T.F1, T.E2);
    both(T.F1, T.F2);
    double d = std::min(delta0, 2 * emin - 1);
    if (!(d > 0)) throw PreconditionError("recipe: Euler product not absolutely convergent on the chosen line");
    return d;
}

struct PrimeData {
    double p, lnp;
    std::vector<cplx> w;  // p^{-c} for E1, F1, E2, F2, pre in order
    int Mp, m0, n0;
    bool hk;
    double tail_rel;
};

std::vector<PrimeData> prime_data(const GridSetup& G, const GridTerm& T) {
    std::vector<PrimeData> out;
    out.reserve(G.primes.size());
    double reu = 2 * G.sigma;
    const EulerTruncation& tr = *G.trunc;
    for (std::int64_t pi : G.primes) {
        PrimeData d;
        d.p = static_cast<double>(pi);
        d.lnp = std::log(d.p);
        auto push = [&](const std::vector<Affine>& xs) {
            for (const Affine& a : xs) d.w.push_back(ppow(d.p, a.c));
        };
        push(T.E1);
        push(T.F1);
        push(T.E2);
        push(T.F2);
        for (const Factor& f : T.pre) d.w.push_back(ppow(d.p, f.a.c));
        int a = ord_p(G.h, pi), b = ord_p(G.k, pi);
        d.hk = (a + b) > 0;
        d.m0 = std::max(b - a, 0);
        d.n0 = std::max(a - b, 0);
        auto R = [&](const std::vector<Affine>& xs) {
            double r = 0;
            for (const Affine& x : xs) r = std::max(r, std::exp(-(x.c.real() + x.e * reu) * d.lnp));
            return r;
        };
        int L = kCutoffGrowth * tr.M + 200;
        SeriesShape s1{static_cast<int>(T.E1.size()), static_cast<int>(T.F1.size()), R(T.E1), R(T.F1)};
        SeriesShape s2{static_cast<int>(T.E2.size()), static_cast<int>(T.F2.size()), R(T.E2), R(T.F2)};
        auto tl = tail_profile(s1, s2, d.m0, d.n0, 1 / d.p, L);
        // Shortest cutoff with a negligible tail; past M only as far as the budget requires.
        d.Mp = choose_cutoff(tl, 1, tr.M, 1e-17);
        if (d.Mp < 0) d.Mp = choose_cutoff(tl, tr.M, kCutoffGrowth * tr.M, tr.series_budget);
        if (d.Mp < 0)
            throw AccuracyError("recipe: local series truncation budget exceeded at p = " + std::to_string(pi),
                                tl.back());
        d.tail_rel = tl[d.Mp];
        out.push_back(std::move(d));
    }
    return out;
}

cplx powi(cplx x, int n) {
    if (n == 1) return x;
    if (n == -1) return 1.0 / x;
    cplx r = 1;
    cplx b = n < 0 ? 1.0 / x : x;
    for (int i = 0; i < std::abs(n); ++i) r *= b;
    return r;
}

// J(u) for nodes m = m_begin, m_begin + stride, ...; also fills the tail constants c(u).
void euler_nodes(const GridSetup& G, const GridTerm& T, const std::vector<PrimeData>& PD, double delta,
                 std::int64_t m_begin, std::size_t count, cplx* J, double* cmax) {
    std::vector<cplx> prod(count, 1.0), rho(count * std::max(G.n_small, 1), 1.0), z(count);
    std::fill(cmax, cmax + count, 0.0);
    std::size_t nE1 = T.E1.size(), nF1 = T.F1.size(), nE2 = T.E2.size(), nF2 = T.F2.size();
    std::size_t len = 1;
    for (const PrimeData& d : PD) len = std::max<std::size_t>(len, d.Mp + std::max(d.m0, d.n0) + 1);
    std::vector<cplx> c1(len), c2(len);
    double Phalf = 0.5 * static_cast<double>(G.trunc->P);
    double reu = 2 * G.sigma;
    for (std::size_t ip = 0; ip < PD.size(); ++ip) {
        const PrimeData& d = PD[ip];
        double zmod = std::exp(-reu * d.lnp), zimod = 1 / (zmod * zmod);
        cplx rot = std::exp(cplx(0, -G.stride * G.hs * d.lnp));
        int slot = G.small_index[ip];
        bool tail_prime = !d.hk && d.p > Phalf && d.p <= static_cast<double>(G.trunc->P);
        double pw = std::pow(d.p, 1 + delta);
        int L1 = d.Mp + d.m0, L2 = d.Mp + d.n0;
        double pinv = 1 / d.p, scale = std::pow(d.p, -0.5 * (d.m0 + d.n0));
        cplx zc;
        for (std::size_t i = 0; i < count; ++i) {
            std::int64_t m = m_begin + static_cast<std::int64_t>(i) * G.stride;
            if (i % 64 == 0)
                zc = std::exp(cplx(-reu * d.lnp, -static_cast<double>(m) * G.hs * d.lnp));
            else
                zc *= rot;
            cplx zi = std::conj(zc) * zimod;
            auto rv = [&](const cplx& w, int e) { return e == 0 ? w : (e > 0 ? w * zc : w * zi); };
            std::size_t wi = 0;
            std::fill(c1.begin(), c1.begin() + L1 + 1, cplx(0));
            c1[0] = 1;
            for (std::size_t t = 0; t < nE1; ++t, ++wi) {
                cplx r = rv(d.w[wi], T.E1[t].e);
                for (int j = 1; j <= L1; ++j) c1[j] += r * c1[j - 1];
            }
            for (std::size_t t = 0; t < nF1; ++t, ++wi) {
                cplx r = rv(d.w[wi], T.F1[t].e);
                for (int j = L1; j >= 1; --j) c1[j] -= r * c1[j - 1];
            }
            std::fill(c2.begin(), c2.begin() + L2 + 1, cplx(0));
            c2[0] = 1;
            for (std::size_t t = 0; t < nE2; ++t, ++wi) {
                cplx r = rv(d.w[wi], T.E2[t].e);
                for (int j = 1; j <= L2; ++j) c2[j] += r * c2[j - 1];
            }
            for (std::size_t t = 0; t < nF2; ++t, ++wi) {
                cplx r = rv(d.w[wi], T.F2[t].e);
                for (int j = L2; j >= 1; --j) c2[j] -= r * c2[j - 1];
            }
            cplx ser = 0;
            double xl = 1;
            for (int l = 0; l <= d.Mp; ++l, xl *= pinv) ser += c1[l + d.m0] * c2[l + d.n0] * xl;
            ser *= scale;
            cplx pref = 1;
            for (const Factor& f : T.pre) {
                cplx r = rv(d.w[wi++], f.a.e) * pinv;
                pref *= f.pow == 1 ? (1.0 - r) : powi(1.0 - r, f.pow);
            }
            cplx Lp = pref * ser;
            prod[i] *= Lp;
            if (slot >= 0) rho[i * G.n_small + slot] = 1.0 / ser;
            if (tail_prime) cmax[i] = std::max(cmax[i], std::abs(Lp - 1.0) * pw);
        }
    }
    for (std::size_t i = 0; i < count; ++i) {
        std::int64_t m = m_begin + static_cast<std::int64_t>(i) * G.stride;
        cplx u(reu, static_cast<double>(m) * G.hs);
        cplx Z = 1;
        for (const Factor& f : T.zeta) Z *= powi(zeta_c(1.0 + f.a.c + static_cast<double>(f.a.e) * u), f.pow);
        KahanSum qs;
        for (const QEntry& q : G.qs) {
            cplx t = q.coef * std::exp(-(T.q_const + static_cast<double>(T.q_u) * u) * std::log(q.q));
            for (int s : q.small) t *= rho[i * G.n_small + s];
            qs.add(t);
        }
        J[i] = std::exp(u * G.logX) * Z * prod[i] * qs.value();
    }
}

TermResult run_term(const GridSetup& G, const GridTerm& T) {
    TermResult R;
    const std::int64_t N = G.N;
    // Inner on the fine grid (index m + 2N) and on the doubled step (even m only).
    std::vector<cplx> inner = convolve(T.f, T.g);
    for (cplx& x : inner) x *= G.hs / kTwoPi;
    std::vector<cplx> f2, g2;
    for (std::int64_t j = 0; j <= 2 * N; j += 2) {
        f2.push_back(T.f[j]);
        g2.push_back(T.g[j]);
    }
    std::vector<cplx> inner2 = convolve(f2, g2);
    for (cplx& x : inner2) x *= 2 * G.hs / kTwoPi;

    double amax = 0;
    for (cplx x : inner) amax = std::max(amax, std::abs(x));
    std::int64_t cap = std::min<std::int64_t>(static_cast<std::int64_t>(G.T_u / G.hs), 2 * N - 2 * G.stride);
    std::int64_t mt = 0;
    for (std::int64_t m = -2 * N; m <= 2 * N; ++m)
        if (std::abs(inner[m + 2 * N]) >= 1e-15 * amax) mt = std::max(mt, std::abs(m));
    mt = std::min(cap, mt + mt / 10 + 1);
    std::int64_t unit = 2 * G.stride;
    mt = ((mt + unit - 1) / unit) * unit;
    if (mt > 2 * N - unit) mt -= unit;

    std::size_t nodes = static_cast<std::size_t>(2 * mt / G.stride + 1);
    std::vector<cplx> J(nodes);
    std::vector<double> cm(nodes);
    double delta = term_delta(T, G.sigma, G.trunc->delta0);
    std::vector<PrimeData> PD = prime_data(G, T);
    const std::size_t chunk = 256;
    tbb::task_arena arena(G.threads);
    arena.execute([&] {
        tbb::parallel_for(tbb::blocked_range<std::size_t>(0, (nodes + chunk - 1) / chunk), [&](const auto& r) {
            for (std::size_t c = r.begin(); c != r.end(); ++c) {
                std::size_t i0 = c * chunk, cnt = std::min(chunk, nodes - i0);
                euler_nodes(G, T, PD, delta, -mt + static_cast<std::int64_t>(i0) * G.stride, cnt, &J[i0], &cm[i0]);
            }
        });
    });

    double S = prime_tail_sum(G.trunc->P, delta);
    double series_rel = 0;
    for (const PrimeData& d : PD) series_rel += d.tail_rel;
    double du = G.stride * G.hs / kTwoPi;
    KahanSum fine, coarse;
    double abs_sum = 0, trunc = 0, absJ = 0, edgeJ = 0;
    for (std::size_t i = 0; i < nodes; ++i) {
        std::int64_t m = -mt + static_cast<std::int64_t>(i) * G.stride;
        cplx term = J[i] * inner[m + 2 * N];
        fine.add(term);
        double at = std::abs(term);
        abs_sum += at;
        trunc += at * std::expm1(cm[i] * S);
        absJ += std::abs(J[i]);
        if (i < nodes / 20 || i >= nodes - nodes / 20) edgeJ = std::max(edgeJ, std::abs(J[i]));
        if (m % unit == 0) coarse.add(J[i] * inner2[(m + 2 * N) / 2]);
    }
    R.value = T.weight * du * fine.value();
    R.coarse = T.weight * 2.0 * du * coarse.value();
    double w = std::abs(T.weight);
    R.trunc = w * du * (trunc + abs_sum * series_rel);
    double beyond = 0;
    for (std::int64_t m = mt + G.stride; m <= 2 * N; m += G.stride)
        beyond += std::abs(inner[m + 2 * N]) + std::abs(inner[2 * N - m]);
    R.tail_u = w * du * edgeJ * beyond;
    double fmax = 0, gmax = 0;
    for (cplx x : T.f) fmax = std::max(fmax, std::abs(x));
    for (cplx x : T.g) gmax = std::max(gmax, std::abs(x));
    double missing = (block_tail(T.f, G.hs) * gmax + block_tail(T.g, G.hs) * fmax) / kTwoPi;
    R.tail_s = w * du * absJ * missing;
    return R;
}

const std::vector<cplx>& cached_mellin_grid(const Window& w, double sigma, double h, std::int64_t N) {
    static std::mutex mu;
    static std::map<std::tuple<const Window*, double, double, std::int64_t>, std::vector<cplx>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(&w, sigma, h, N);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, mellin_line_grid(w, sigma, h, N)).first;
    return it->second;
}

struct SGrid {
    std::vector<cplx> s, vt, twist;  // s_j, V~(s_j), (h/k)^{s_j}
};

SGrid make_sgrid(const MomentConfig& cfg, const GridSetup& G) {
    SGrid sg;
    sg.vt = cached_mellin_grid(*cfg.V, G.sigma, G.hs, G.N);
    double lhk = std::log(static_cast<double>(G.h) / static_cast<double>(G.k));
    for (std::int64_t j = -G.N; j <= G.N; ++j) {
        cplx s(G.sigma, j * G.hs);
        sg.s.push_back(s);
        sg.twist.push_back(std::exp(s * lhk));
    }
    return sg;
}

Certified finish(const std::vector<TermResult>& rs, double sigma, std::chrono::steady_clock::time_point t0) {
    Certified c;
    KahanSum v, vc;
    double tails = 0, tr = 0;
    for (const TermResult& r : rs) {
        v.add(r.value);
        vc.add(r.coarse);
        tails += r.tail_u + r.tail_s;
        tr += r.trunc;
    }
    c.value = v.value();
    c.quad_err = std::abs(c.value - vc.value()) + tails;
    c.trunc_err = tr;
    c.sigma = sigma;
    c.seconds = seconds_since(t0);
    return c;
}

void add_pairs(GridTerm& T) {
    for (const Affine& g : T.E1)
        for (const Affine& d : T.E2) {
            Affine s{g.c + d.c, g.e + d.e};
            T.pre.push_back({s, 1});
            T.zeta.push_back({s, 1});
        }
}

void check_pairs_finite(const GridTerm& T) {
    for (const Factor& f : T.zeta)
        if (f.a.e == 0 && std::abs(f.a.c) < kPoleGuard)
            throw PoleError("recipe: zeta factor at its pole (repeated shifts)", 0);
}

}  // namespace

Certified compute_I(int ell, std::int64_t h, std::int64_t k, const MomentConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    if (ell != 0 && ell != 1) throw PreconditionError("compute_I: ell must be 0 or 1");
    if (h < 1 || k < 1) throw PreconditionError("compute_I: h, k must be positive");
    if (ell == 1 && (cfg.A.has_repeats() || cfg.B.has_repeats()))
        throw PreconditionError("compute_I: repeated shifts give double poles; use i1_confluent");
    double sigma = effective_sigma(cfg);
    GridSetup G = make_setup(cfg, h, k, sigma);
    SGrid sg = make_sgrid(cfg, G);
    std::vector<TermResult> rs;
    if (ell == 0) {
        GridTerm T;
        for (cplx a : cfg.A) T.E1.push_back({a, 0});
        for (cplx b : cfg.B) T.E2.push_back({b, 1});
        add_pairs(T);
        T.f.resize(sg.s.size());
        for (std::size_t j = 0; j < sg.s.size(); ++j) T.f[j] = sg.vt[j] * sg.twist[j];
        T.g = sg.vt;
        rs.push_back(run_term(G, T));
    } else {
        for (std::size_t ia = 0; ia < cfg.A.size(); ++ia)
            for (std::size_t ib = 0; ib < cfg.B.size(); ++ib) {
                cplx alpha = cfg.A.values()[ia], beta = cfg.B.values()[ib];
                GridTerm T;
                for (std::size_t i = 0; i < cfg.A.size(); ++i)
                    if (i != ia) T.E1.push_back({cfg.A.values()[i], 0});
                T.E1.push_back({-beta, -1});
                for (std::size_t i = 0; i < cfg.B.size(); ++i)
                    if (i != ib) T.E2.push_back({cfg.B.values()[i], 1});
                T.E2.push_back({-alpha, 0});
                add_pairs(T);
                check_pairs_finite(T);
                T.q_const = alpha + beta;
                T.q_u = 1;
                T.f.resize(sg.s.size());
                T.g.resize(sg.s.size());
                for (std::size_t j = 0; j < sg.s.size(); ++j) {
                    T.f[j] = sg.vt[j] * sg.twist[j] * chi_factor(0.5 + alpha + sg.s[j]);
                    T.g[j] = sg.vt[j] * chi_factor(0.5 + beta + sg.s[j]);
                }
                rs.push_back(run_term(G, T));
            }
    }
    return finish(rs, sigma, t0);
}

Certified i1_confluent(std::int64_t h, std::int64_t k, const MomentConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    if (h < 1 || k < 1) throw PreconditionError("i1_confluent: h, k must be positive");
    double sigma = effective_sigma(cfg);
    double radius = cfg.grid.circle_radius > 0 ? cfg.grid.circle_radius : sigma / 4;
    double smax = 0;
    for (cplx a : cfg.A) smax = std::max(smax, std::abs(a));
    for (cplx b : cfg.B) smax = std::max(smax, std::abs(b));
    if (smax > 0.5 * radius)
        throw PreconditionError("i1_confluent: circle of radius " + std::to_string(radius) +
                                " passes too close to a shift-induced pole (max |shift| = " + std::to_string(smax) + ")");
    if (radius >= 0.5 * sigma)
        throw PreconditionError("i1_confluent: circle radius must stay below sigma / 2");
    GridSetup G = make_setup(cfg, h, k, sigma);
    SGrid sg = make_sgrid(cfg, G);
    const int n = cfg.grid.circle_points;
    std::vector<cplx> nodes(n);
    for (int a = 0; a < n; ++a) nodes[a] = std::polar(radius, kTwoPi * (a + 0.5) / n);
    // chi factors depend on one circle node each.
    std::vector<std::vector<cplx>> chi_z(n), chi_y(n);
    for (int a = 0; a < n; ++a) {
        chi_z[a].resize(sg.s.size());
        chi_y[a].resize(sg.s.size());
        for (std::size_t j = 0; j < sg.s.size(); ++j) {
            chi_z[a][j] = chi_factor(0.5 - nodes[a] + sg.s[j]);
            chi_y[a][j] = chi_z[a][j];
        }
    }
    // With real shifts the term at (conj y, conj z) is the conjugate of the term at (y, z); node a
    // mirrors to n - 1 - a, so only half of the pairs are integrated.
    bool real_shifts = true;
    for (cplx a : cfg.A) real_shifts = real_shifts && a.imag() == 0;
    for (cplx b : cfg.B) real_shifts = real_shifts && b.imag() == 0;
    std::vector<TermResult> rs(static_cast<std::size_t>(n) * n);
    for (int ay = 0; ay < n; ++ay)
        for (int az = 0; az < n; ++az) {
            int idx = ay * n + az, mirror = n * n - 1 - idx;
            if (real_shifts && mirror < idx) continue;
            cplx y = nodes[ay], z = nodes[az];
            GridTerm T;
            for (cplx a : cfg.A) T.E1.push_back({a, 0});
            T.E1.push_back({y, -1});
            T.F1.push_back({-z, 0});
            for (cplx b : cfg.B) T.E2.push_back({b, 1});
            T.E2.push_back({z, 0});
            T.F2.push_back({-y, 1});
            T.pre.push_back({{0.0, 0}, -2});
            T.pre.push_back({{y + z, -1}, 1});
            T.pre.push_back({{-y - z, 1}, 1});
            T.zeta.push_back({{y + z, -1}, 1});
            T.zeta.push_back({{-y - z, 1}, 1});
            for (cplx a : cfg.A)
                for (cplx b : cfg.B) {
                    T.pre.push_back({{a + b, 1}, 1});
                    T.zeta.push_back({{a + b, 1}, 1});
                }
            for (cplx a : cfg.A) {
                T.pre.push_back({{a + z, 0}, 1});
                T.zeta.push_back({{a + z, 0}, 1});
                T.pre.push_back({{a - y, 1}, -1});
                T.zeta.push_back({{a - y, 1}, -1});
            }
            for (cplx b : cfg.B) {
                T.pre.push_back({{b + y, 0}, 1});
                T.zeta.push_back({{b + y, 0}, 1});
                T.pre.push_back({{b - z, 1}, -1});
                T.zeta.push_back({{b - z, 1}, -1});
            }
            T.q_const = -(y + z);
            T.q_u = 1;
            T.f.resize(sg.s.size());
            T.g.resize(sg.s.size());
            for (std::size_t j = 0; j < sg.s.size(); ++j) {
                T.f[j] = sg.vt[j] * sg.twist[j] * chi_z[az][j];
                T.g[j] = sg.vt[j] * chi_y[ay][j];
            }
            T.weight = y * z / static_cast<double>(n * n);
            rs[idx] = run_term(G, T);
            if (real_shifts) {
                rs[mirror] = rs[idx];
                rs[mirror].value = std::conj(rs[idx].value);
                rs[mirror].coarse = std::conj(rs[idx].coarse);
            }
        }
    Certified c = finish(rs, sigma, t0);
    // Circle discretization: compare with the embedded rule on even nodes, which is the
    // n/2-point trapezoid rule on the same circles.
    if (n % 2 == 0 && n >= 4) {
        KahanSum half;
        for (int ay = 0; ay < n; ay += 2)
            for (int az = 0; az < n; az += 2) half.add(4.0 * rs[ay * n + az].value);
        c.quad_err += std::abs(c.value - half.value());
    }
    c.seconds = seconds_since(t0);
    return c;
}

// ---------------------------------------------------------------------------------------------
// K and G products.

namespace {

struct ProductAcc {
    cplx value = 1;
    double cmax = 0;
    double series_tail = 0;
};

void check_strip_K(cplx s1, cplx s2, cplx w, cplx alpha, cplx beta, double eps) {
    cplx x = w - 1.0 + alpha + s1 + beta + s2;
    if (x.real() < 0.5 + eps) throw PreconditionError("k_product: condition (i) Re(w-1+alpha+s1+beta+s2) >= 1/2 + eps fails");
    double r = (s1 + s2).real();
    if (r < -0.5 + 5 * eps || r > 2 * eps)
        throw PreconditionError("k_product: condition (ii) -1/2 + 5 eps <= Re(s1+s2) <= 2 eps fails");
    if (std::abs(s1.real()) > eps && std::abs(s2.real()) > eps)
        throw PreconditionError("k_product: condition (iii) |Re s1| <= eps or |Re s2| <= eps fails");
}

}  // namespace

Certified k_product(cplx s1, cplx s2, cplx w, const ShiftSet& A, const ShiftSet& B, cplx alpha, cplx beta,
                    std::int64_t h, std::int64_t k, const EulerTruncation& trunc) {
    auto t0 = std::chrono::steady_clock::now();
    trunc.validate();
    if (A.count(alpha) == 0 || B.count(beta) == 0) throw PreconditionError("k_product: alpha must lie in A and beta in B");
    check_strip_K(s1, s2, w, alpha, beta, trunc.eps);
    cplx x = w - 1.0 + alpha + s1 + beta + s2;
    ShiftSet E1 = A.shifted(s1).without(alpha + s1).with(-beta - s2);
    ShiftSet E2 = B.shifted(s2).without(beta + s2).with(-alpha - s1);
    double emin = std::numeric_limits<double>::infinity();
    for (cplx g : E1)
        for (cplx d : E2) emin = std::min(emin, 1 + (g + d).real());
    double kappa = std::min({x.real() + 1, 2 * x.real(), 2 * emin, x.real() + emin});
    double delta = std::min(trunc.delta0, kappa - 1);
    if (!(delta > 0)) throw PreconditionError("k_product: Euler product not absolutely convergent");
    std::vector<std::int64_t> ps = primes_up_to(trunc.P);
    for (auto [p, e] : factorize(h * k))
        if (p > trunc.P) ps.push_back(p);
    ProductAcc acc;
    for (std::int64_t pi : ps) {
        double p = static_cast<double>(pi);
        int a = ord_p(h, pi), b = ord_p(k, pi);
        cplx pref = 1.0 - ppow(p, x);
        for (cplx g : E1)
            for (cplx d : E2) pref *= 1.0 - ppow(p, 1.0 + g + d);
        int m0 = std::max(b - a, 0), n0 = std::max(a - b, 0);
        int L = kCutoffGrowth * trunc.M + 200;
        double scale = std::abs(pref);
        auto tl = tail_profile({static_cast<int>(E1.size()), 0, max_abs_power(E1, p), 0},
                               {static_cast<int>(E2.size()), 0, max_abs_power(E2, p), 0}, m0, n0, 1 / p, L);
        const int M = choose_cutoff(tl, trunc.M, kCutoffGrowth * trunc.M, trunc.series_budget / scale);
        if (M < 0)
            throw AccuracyError("k_product: series truncation budget exceeded at p = " + std::to_string(pi),
                                tl.back() * scale);
        double tail = tl[M] * scale;
        std::vector<cplx> c1 = tau_pp_series(E1, p, M + m0), c2 = tau_pp_series(E2, p, M + n0);
        cplx body;
        if (a + b > 0) {
            KahanSum s;
            for (int l = 0; l <= M; ++l) s.add(c1[l + m0] * c2[l + n0] * std::pow(p, -l - 0.5 * (m0 + n0)));
            body = s.value();
        } else {
            KahanSum s;
            s.add(1.0);
            s.add((p - 2) * ppow(p, x + 1.0));
            s.add((1 - 1 / p) * (1 - 1 / p) * ppow(p, 2.0 * x) / (1.0 - ppow(p, x)));
            for (int m = 1; m <= M; ++m) s.add(c1[m] * c2[m] * std::pow(p, -m));
            body = s.value();
        }
        cplx Lp = pref * body;
        acc.value *= Lp;
        acc.series_tail += tail / std::max(std::abs(Lp), 1e-300);
        if (a + b == 0 && pi > trunc.P / 2 && pi <= trunc.P)
            acc.cmax = std::max(acc.cmax, std::abs(Lp - 1.0) * std::pow(p, 1 + delta));
    }
    Certified c;
    c.value = acc.value;
    c.trunc_err = std::abs(acc.value) * (std::expm1(acc.cmax * prime_tail_sum(trunc.P, delta)) + acc.series_tail);
    c.seconds = seconds_since(t0);
    return c;
}

Certified g_product(cplx w, cplx alpha, cplx beta, const ShiftSet& A, const ShiftSet& B, std::int64_t h,
                    std::int64_t k, const EulerTruncation& trunc) {
    auto t0 = std::chrono::steady_clock::now();
    trunc.validate();
    if (A.count(alpha) == 0 || B.count(beta) == 0) throw PreconditionError("g_product: alpha must lie in A and beta in B");
    double eps = trunc.eps;
    if (w.real() < 1 + eps || w.real() > 2.5 - eps)
        throw PreconditionError("g_product: strip condition 1 + eps <= Re w <= 5/2 - eps fails");
    // Local factors depend on the shifts only through a - alpha and b - beta.
    double dA = 0, dB = 0;
    for (cplx a : A) dA = std::max(dA, std::abs(a - alpha));
    for (cplx b : B) dB = std::max(dB, std::abs(b - beta));
    double delta = std::min(trunc.delta0, std::min(w.real() - 1, 2.5 - w.real()) - 2 * (dA + dB));
    if (!(delta > 0)) throw PreconditionError("g_product: Euler product not absolutely convergent");
    ShiftSet Ar = A.without(alpha), Br = B.without(beta);
    std::vector<std::int64_t> ps = primes_up_to(trunc.P);
    for (auto [p, e] : factorize(h * k))
        if (p > trunc.P) ps.push_back(p);
    const int M = trunc.M;
    ProductAcc acc;
    for (std::int64_t pi : ps) {
        double p = static_cast<double>(pi);
        int a = ord_p(h, pi), b = ord_p(k, pi);
        cplx pref = 1;
        for (cplx ah : Ar)
            for (cplx bh : Br) pref *= 1.0 - ppow(p, 3.0 + ah + bh - alpha - beta - w);
        for (cplx ah : A) pref *= 1.0 - ppow(p, 1.0 + ah - alpha);
        for (cplx bh : B) pref *= 1.0 - ppow(p, 1.0 + bh - beta);
        std::vector<cplx> tA = tau_pp_series(A, p, M), tB = tau_pp_series(B, p, M);
        cplx pw = std::exp(w * std::log(p));  // p^w
        cplx c_eq = 1.0 + pw / (p * p * (p - 1)) - 1.0 / (p - 1);
        cplx c_ne = 1.0 - pw / (p * p);
        // p^{-m(1-a)-n(1-b)-(1-w)min(m+a', n+b')} splits as qa[m] pb[n] p^{-a'(1-w)} when m + a' <= n + b',
        // else pa[m] qb[n] p^{-b'(1-w)}; each pair stays in range.
        std::vector<cplx> pa, pb, qa, qb;
        auto extend = [&](int L) {
            for (int j = static_cast<int>(pa.size()); j <= L; ++j) {
                double jd = static_cast<double>(j);
                pa.push_back(ppow(p, jd * (1.0 - alpha)));
                pb.push_back(ppow(p, jd * (1.0 - beta)));
                qa.push_back(ppow(p, jd * (2.0 - alpha - w)));
                qb.push_back(ppow(p, jd * (2.0 - beta - w)));
            }
        };
        cplx wa = ppow(p, static_cast<double>(a) * (1.0 - w)), wb = ppow(p, static_cast<double>(b) * (1.0 - w));
        auto term_pow = [&](int m, int n) { return m + a <= n + b ? qa[m] * pb[n] * wa : pa[m] * qb[n] * wb; };
        double ceq = std::abs(c_eq), cne = std::abs(c_ne);
        std::vector<double> bA, bB;
        // Majorant of the dropped box max(m, n) > Mc, summed to 2 Mc; the outer ring must be negligible.
        auto box_tail = [&](int Mc) {
            const int L = 2 * Mc;
            extend(L);
            bA = majorant(static_cast<int>(A.size()), max_abs_power(A, p), 0, 0, L);
            bB = majorant(static_cast<int>(B.size()), max_abs_power(B, p), 0, 0, L);
            double tail = 0, edge = 0;
            for (int m = 0; m <= L; ++m)
                for (int n = 0; n <= L; ++n) {
                    if (m <= Mc && n <= Mc) continue;
                    double t = bA[m] * bB[n] * (m + a == n + b ? ceq : cne) * std::abs(term_pow(m, n));
                    tail += t;
                    if (m == L || n == L) edge += t;
                }
            if (!(edge <= 1e-3 * tail) && tail > 0) return std::numeric_limits<double>::infinity();
            return tail * std::abs(pref);
        };
        // Shortest cutoff whose tail is below double resolution, else the configured M.
        int Mc = std::min(4, M);
        double tail = box_tail(Mc);
        while (!(tail <= 1e-17) && Mc < M) {
            Mc = std::min(2 * Mc, M);
            tail = box_tail(Mc);
        }
        if (!(tail <= trunc.series_budget))
            throw AccuracyError("g_product: series truncation budget exceeded at p = " + std::to_string(pi), tail);
        KahanSum s;
        for (int m = 0; m <= Mc; ++m)
            for (int n = 0; n <= Mc; ++n) {
                if (a + b == 0 && m == 0 && n == 0) continue;
                s.add(tA[m] * tB[n] * (m + a == n + b ? c_eq : c_ne) * term_pow(m, n));
            }
        if (a + b == 0) s.add((1.0 - 1.0 / pw) * (1.0 + (pw / p - 1.0) / (p * (p - 1))));
        cplx Lp = pref * s.value();
        acc.value *= Lp;
        acc.series_tail += tail / std::max(std::abs(Lp), 1e-300);
        if (a + b == 0 && pi > trunc.P / 2 && pi <= trunc.P)
            acc.cmax = std::max(acc.cmax, std::abs(Lp - 1.0) * std::pow(p, 1 + delta));
    }
    Certified c;
    c.value = acc.value;
    c.trunc_err = std::abs(acc.value) * (std::expm1(acc.cmax * prime_tail_sum(trunc.P, delta)) + acc.series_tail);
    c.seconds = seconds_since(t0);
    return c;
}

}  // namespace dirmoment
