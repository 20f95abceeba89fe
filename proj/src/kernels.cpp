#include "dirmoment/kernels.hpp"

#include <cmath>
#include <numbers>

#include "dirmoment/errors.hpp"
#include "dirmoment/quadrature.hpp"

namespace dirmoment {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0, 1);

// Lanczos g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

cplx lanczos_lgamma(cplx s) {
    cplx z = s - 1.0;
    cplx x = kLanczos[0];
    for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + static_cast<double>(i));
    cplx t = z + kLanczosG + 0.5;
    return 0.5 * std::log(2 * kPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

// Nearest nonpositive integer within the guard, or 1 if none.
int nonpositive_pole(cplx s) {
    if (std::abs(s.imag()) >= kPoleGuard || s.real() > 0.5) return 1;
    double n = std::round(s.real());
    if (n <= 0 && std::abs(s - n) < kPoleGuard) return static_cast<int>(n);
    return 1;
}

}  // namespace

cplx log_sin_pi(cplx s) {
    cplx w = kPi * s;
    double b = w.imag();
    if (std::abs(b) < 20) return std::log(std::sin(w));
    if (b > 0) return std::log(cplx(0, 0.5)) - kI * w + std::log(1.0 - std::exp(2.0 * kI * w));
    return std::log(cplx(0, -0.5)) + kI * w + std::log(1.0 - std::exp(-2.0 * kI * w));
}

cplx lgamma_c(cplx s) {
    int n = nonpositive_pole(s);
    if (n <= 0) throw PoleError("gamma: pole at nonpositive integer", -n);
    if (s.real() < 0.5) return std::log(kPi) - log_sin_pi(s) - lanczos_lgamma(1.0 - s);
    return lanczos_lgamma(s);
}

cplx gamma_c(cplx s) { return std::exp(lgamma_c(s)); }

cplx rgamma_c(cplx s) {
    if (s.real() < 0.5 && std::abs(s.imag()) < 20) return std::sin(kPi * s) * std::exp(lanczos_lgamma(1.0 - s)) / kPi;
    return std::exp(-lgamma_c(s));
}

namespace {

constexpr int kEMTerms = 26;

// B_{2k} / (2k)! for k = 1..kEMTerms, from B_{2k}/(2k)! = (-1)^{k+1} 2 zeta(2k) / (2 pi)^{2k}.
const std::array<double, kEMTerms + 1>& bernoulli_ratios() {
    static const std::array<double, kEMTerms + 1> table = [] {
        std::array<double, kEMTerms + 1> t{};
        for (int k = 1; k <= kEMTerms; ++k) {
            double z;
            if (k == 1)
                z = kPi * kPi / 6;
            else if (k == 2)
                z = std::pow(kPi, 4) / 90;
            else {
                z = 0;
                for (int n = 2000; n >= 1; --n) z += std::pow(static_cast<double>(n), -2.0 * k);
            }
            double sign = (k % 2 == 1) ? 1.0 : -1.0;
            t[k] = sign * 2 * z / std::pow(2 * kPi, 2 * k);
        }
        return t;
    }();
    return table;
}

}  // namespace

cplx zeta_c(cplx s) {
    if (std::abs(s - 1.0) < kPoleGuard) throw PoleError("zeta: pole at s = 1", 0);
    const auto& B = bernoulli_ratios();
    int N = static_cast<int>(std::ceil((std::abs(s) + 2 * kEMTerms) / kPi)) + 1;
    KahanSum head;
    for (int n = N - 1; n >= 1; --n) head.add(ppow(n, s));
    double lnN = std::log(static_cast<double>(N));
    cplx Ns = std::exp(-s * lnN);  // N^{-s}
    cplx out = head.value() + 0.5 * Ns + Ns * static_cast<double>(N) / (s - 1.0);
    cplx poch = s;            // s (s+1) ... (s + 2k - 2)
    cplx Npow = Ns / static_cast<double>(N);  // N^{-s-2k+1}
    for (int k = 1; k <= kEMTerms; ++k) {
        cplx term = B[k] * poch * Npow;
        out += term;
        if (std::abs(term) < 1e-18 * std::abs(out)) break;
        poch *= (s + static_cast<double>(2 * k - 1)) * (s + static_cast<double>(2 * k));
        Npow /= static_cast<double>(N) * N;
    }
    return out;
}

cplx chi_factor(cplx s) {
    const double lnpi = std::log(kPi);
    if (s.real() < 1) {
        // 1/Gamma(s/2) = sin(pi s/2) Gamma(1 - s/2) / pi keeps every Gamma argument in Re > 0.
        cplx ls = log_sin_pi(0.5 * s);
        return std::exp((s - 1.5) * lnpi + ls + lgamma_c(0.5 * (1.0 - s)) + lgamma_c(1.0 - 0.5 * s));
    }
    if (std::abs(s.imag()) < kPoleGuard) {
        double n = std::round((s.real() - 1) / 2);
        if (std::abs(s - (2 * n + 1)) < kPoleGuard) throw PoleError("chi_factor: pole at odd positive integer", static_cast<int>(n));
    }
    // Gamma((1-s)/2) = pi / (sin(pi (1-s)/2) Gamma((1+s)/2)).
    return std::exp((s + 0.5) * lnpi - log_sin_pi(0.5 * (1.0 - s)) - lgamma_c(0.5 * (1.0 + s)) - lgamma_c(0.5 * s));
}

cplx h_kernel(cplx z, cplx w) {
    const cplx num[3] = {0.5 * (1.0 - w), 0.5 * z, 0.5 * (w - z)};
    const cplx den[3] = {0.5 * w, 0.5 * (1.0 - z), 0.5 * (1.0 - w + z)};
    cplx acc = 0.5 * std::log(kPi);
    for (int i = 0; i < 3; ++i) {
        if (nonpositive_pole(num[i]) <= 0)
            throw PoleError("h_kernel: pole in numerator Gamma factor " + std::to_string(i + 1), i + 1);
        acc += lgamma_c(num[i]);
    }
    cplx mult = 1.0;
    for (int i = 0; i < 3; ++i) {
        // Near a pole of Gamma in the denominator, use the entire 1/Gamma directly.
        if (den[i].real() < 0.5 && std::abs(den[i].imag()) < 1 &&
            std::abs(den[i] - std::round(den[i].real())) < 0.25)
            mult *= rgamma_c(den[i]);
        else
            acc -= lgamma_c(den[i]);
    }
    return std::exp(acc) * mult;
}

namespace {

double v_fn(double x) { return std::exp(-x * x / (1 - x * x)); }
double w_fn(double x) { return std::exp(4 - 1 / ((x - 1) * (2 - x))); }

void fill_decay(Window& w) {
    for (int n = 0; n <= 4; ++n) w.decay[n] = decay_constant(w, w.decay_sigma, n);
    for (double c : w.decay)
        if (!std::isfinite(c)) throw AccuracyError("window " + w.name + ": decay constant not finite", c);
}

// Remainder integrand in v = -log x.
double remainder(const Window& w, double v) {
    double x = std::exp(-v);
    double r = window_eval(w, x);
    if (w.at_zero != 0) r -= w.at_zero * std::exp(-x * x);
    return r;
}

struct VRange {
    double lo, hi;
};

VRange v_range(const Window& w, double re_s) {
    if (w.at_zero == 0) return {-std::log(w.hi), w.lo > 0 ? -std::log(w.lo) : 60.0};
    double rate = w.sub_order + re_s;
    double hi = std::min(200.0, 42.0 / rate);
    return {-2.0, hi};
}

}  // namespace

const Window& window_V() {
    static const Window w = [] {
        Window v;
        v.name = "V";
        v.lo = 0;
        v.hi = 1;
        v.fn = v_fn;
        v.at_zero = 1;
        v.sub_order = 4;
        v.decay_sigma = 0.05;
        fill_decay(v);
        return v;
    }();
    return w;
}

const Window& window_W() {
    static const Window w = [] {
        Window v;
        v.name = "W";
        v.lo = 1;
        v.hi = 2;
        v.fn = w_fn;
        v.decay_sigma = 0;
        fill_decay(v);
        return v;
    }();
    return w;
}

double window_eval(const Window& w, double x) {
    if (!std::isfinite(x)) throw DomainError("window_eval: non-finite argument");
    if (x < w.lo || x >= w.hi) return 0;
    if (x == w.lo && w.at_zero == 0) return 0;
    return w.fn(x);
}

cplx mellin_transform(const Window& w, cplx s) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) throw DomainError("mellin_transform: non-finite s");
    cplx main = 0;
    if (w.at_zero != 0) {
        if (s.real() <= -w.sub_order)
            throw DomainError("mellin_transform: continuation of " + w.name + " only valid for Re s > -" +
                              std::to_string(w.sub_order));
        main = w.at_zero * 0.5 * gamma_c(0.5 * s);
    }
    VRange r = v_range(w, s.real());
    auto f = [&](double v) { return remainder(w, v) * std::exp(-s * v); };
    int panels = std::max(8, static_cast<int>((r.hi - r.lo) * (1 + std::abs(s.imag())) / 4));
    return main + integrate_interval(f, r.lo, r.hi, 1e-13, 40, panels).value;
}

MellinEvaluator::MellinEvaluator(const Window& w) : w_(&w), dv_(2 * kPi / 4000) {
    VRange r = v_range(w, -0.5 * w.sub_order);
    v0_ = r.lo;
    std::size_t n = static_cast<std::size_t>(std::ceil((r.hi - r.lo) / dv_)) + 1;
    r_.resize(n);
    for (std::size_t j = 0; j < n; ++j) r_[j] = remainder(w, v0_ + j * dv_);
}

cplx MellinEvaluator::operator()(cplx s) const {
    if (std::abs(s.imag()) > 1500 || (w_->at_zero != 0 && s.real() <= -0.5 * w_->sub_order))
        return mellin_transform(*w_, s);
    cplx main = w_->at_zero != 0 ? w_->at_zero * 0.5 * gamma_c(0.5 * s) : cplx(0);
    VRange r = v_range(*w_, s.real());
    std::size_t jmax = std::min(r_.size(), static_cast<std::size_t>((r.hi - v0_) / dv_) + 1);
    cplx step = std::exp(-s * dv_);
    KahanSum acc;
    cplx e;
    for (std::size_t j = 0; j < jmax; ++j) {
        if (j % 256 == 0) e = std::exp(-s * (v0_ + j * dv_));
        acc.add(r_[j] * e);
        e *= step;
    }
    return main + acc.value() * dv_;
}

std::vector<cplx> mellin_line_grid(const Window& w, double sigma, double h, std::int64_t N) {
    if (!(h > 0) || N < 0) throw PreconditionError("mellin_line_grid: need h > 0 and N >= 0");
    std::size_t need = std::max<std::size_t>(2 * N + 1, static_cast<std::size_t>(N + 1500.0 / h));
    std::size_t L = 1;
    while (L < need) L <<= 1;
    double dv = 2 * kPi / (L * h);
    VRange r = v_range(w, sigma);
    if (r.hi - r.lo >= L * dv) throw PreconditionError("mellin_line_grid: grid step too coarse for the support");
    std::vector<cplx> x(L, 0.0);
    for (std::size_t j = 0; j < L; ++j) {
        double v = r.lo + j * dv;
        if (v > r.hi) break;
        x[j] = remainder(w, v) * std::exp(-sigma * v);
    }
    std::vector<cplx> X = dft(x);
    std::vector<cplx> out(2 * N + 1);
    for (std::int64_t k = -N; k <= N; ++k) {
        double t = k * h;
        std::size_t idx = static_cast<std::size_t>((k % static_cast<std::int64_t>(L) + L) % L);
        cplx val = dv * std::exp(cplx(0, -t * r.lo)) * X[idx];
        if (w.at_zero != 0) val += w.at_zero * 0.5 * gamma_c(0.5 * cplx(sigma, t));
        out[k + N] = val;
    }
    return out;
}

double decay_constant(const Window& w, double sigma, int n) {
    MellinEvaluator m(w);
    double best = 0;
    for (int i = 0; i < 200; ++i) {
        double t = std::pow(1500.0, i / 199.0);
        cplx s(sigma, t);
        best = std::max(best, std::abs(m(s)) * std::pow(std::abs(s), n));
    }
    return 2 * best;
}

}  // namespace dirmoment
