#include "dirmoment/quadrature.hpp"

#include <fftw3.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "dirmoment/errors.hpp"

namespace dirmoment {

namespace {

using GL = boost::math::quadrature::gauss<double, 20>;

cplx gl_panel(const std::function<cplx(double)>& f, double a, double b, std::int64_t& evals) {
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    double c = 0.5 * (a + b), r = 0.5 * (b - a);
    cplx s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0) {
            s += w[i] * f(c);
            ++evals;
        } else {
            s += w[i] * (f(c - r * x[i]) + f(c + r * x[i]));
            evals += 2;
        }
    }
    return s * r;
}

struct Refiner {
    const std::function<cplx(double)>& f;
    int max_depth;
    std::int64_t evals = 0;
    KahanSum sum;
    double err = 0;

    void run(double a, double b, cplx whole, double tol, int depth) {
        double m = 0.5 * (a + b);
        cplx left = gl_panel(f, a, m, evals), right = gl_panel(f, m, b, evals);
        cplx both = left + right;
        double e = std::abs(both - whole);
        double floor = 1e-15 * (std::abs(left) + std::abs(right));
        if (e <= tol || e <= floor) {
            sum.add(both);
            err += e;
            return;
        }
        if (depth >= max_depth)
            throw AccuracyError("adaptive quadrature: panel depth exhausted at [" + std::to_string(a) + ", " +
                                    std::to_string(b) + "]",
                                err + e);
        run(a, m, left, 0.5 * tol, depth + 1);
        run(m, b, right, 0.5 * tol, depth + 1);
    }
};

}  // namespace

QuadResult integrate_interval(const std::function<cplx(double)>& f, double a, double b, double tol, int max_depth,
                              int initial_panels) {
    if (!(tol > 0)) throw PreconditionError("integrate_interval: tolerance must be positive");
    if (initial_panels < 1) initial_panels = 1;
    Refiner r{f, max_depth, 0, {}, 0};
    double h = (b - a) / initial_panels;
    for (int i = 0; i < initial_panels; ++i) {
        double lo = a + i * h, hi = (i + 1 == initial_panels) ? b : a + (i + 1) * h;
        cplx whole = gl_panel(f, lo, hi, r.evals);
        r.run(lo, hi, whole, tol / initial_panels, 0);
    }
    return {r.sum.value(), r.err, r.evals};
}

void LinePlan::validate() const {
    if (!(T > 0)) throw PreconditionError("LinePlan: T must be positive");
    if (!(tol > 0)) throw PreconditionError("LinePlan: tolerance must be positive");
    if (max_depth < 1) throw PreconditionError("LinePlan: max_depth must be at least 1");
    if (!std::isfinite(sigma)) throw PreconditionError("LinePlan: sigma must be finite");
}

double DecayCertificate::tail(double T) const {
    if (n < 2) throw PreconditionError("DecayCertificate: decay exponent must be >= 2");
    return 2.0 * C / ((n - 1) * std::pow(T, n - 1) * 2.0 * std::numbers::pi);
}

QuadResult line_integral(const Integrand& f, const LinePlan& plan, const DecayCertificate& decay) {
    plan.validate();
    double tail = decay.tail(plan.T);
    auto g = [&](double t) { return f(cplx(plan.sigma, t)); };
    // ds = i dt, so (1/2 pi i) ds = dt / 2 pi.
    QuadResult r = integrate_interval(g, -plan.T, plan.T, 2 * std::numbers::pi * plan.tol, plan.max_depth,
                                      plan.initial_panels);
    r.value /= 2 * std::numbers::pi;
    r.error = r.error / (2 * std::numbers::pi) + tail;
    return r;
}

namespace {

QuadResult nested_rec(const MultiIntegrand& f, const std::vector<LinePlan>& plans,
                      const std::vector<DecayCertificate>& decays, std::vector<cplx>& args, std::size_t level) {
    double inner_max = 0;
    std::int64_t inner_evals = 0;
    Integrand g = [&](cplx s) -> cplx {
        args[level] = s;
        if (level + 1 == plans.size()) {
            ++inner_evals;
            return f(args);
        }
        QuadResult in = nested_rec(f, plans, decays, args, level + 1);
        inner_max = std::max(inner_max, in.error);
        inner_evals += in.evaluations;
        return in.value;
    };
    QuadResult out;
    try {
        out = line_integral(g, plans[level], decays[level]);
    } catch (const AccuracyError& e) {
        throw AccuracyError(std::string(e.what()) + " (nesting level " + std::to_string(level + 1) + ")",
                            e.achieved());
    }
    // Inner errors integrate over a segment of length 2T against dt / 2 pi.
    out.error += inner_max * plans[level].T / std::numbers::pi;
    out.evaluations = inner_evals;
    return out;
}

}  // namespace

QuadResult nested_line_integral(const MultiIntegrand& f, const std::vector<LinePlan>& plans,
                                const std::vector<DecayCertificate>& decays) {
    if (plans.empty() || plans.size() > 3)
        throw PreconditionError("nested_line_integral: dimension must be 1, 2 or 3");
    if (decays.size() != plans.size())
        throw PreconditionError("nested_line_integral: one decay certificate per plan required");
    std::vector<cplx> args(plans.size());
    return nested_rec(f, plans, decays, args, 0);
}

namespace {
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t L = 1;
    while (L < n) L <<= 1;
    return L;
}

void fft_inplace(std::vector<cplx>& x, int sign) {
    auto* p = reinterpret_cast<fftw_complex*>(x.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(x.size()), p, p, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
}
}  // namespace

std::vector<cplx> convolve(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.empty() || b.empty()) return {};
    std::size_t n = a.size() + b.size() - 1, L = next_pow2(n);
    std::vector<cplx> fa(L, 0.0), fb(L, 0.0);
    std::copy(a.begin(), a.end(), fa.begin());
    std::copy(b.begin(), b.end(), fb.begin());
    fft_inplace(fa, FFTW_FORWARD);
    fft_inplace(fb, FFTW_FORWARD);
    for (std::size_t i = 0; i < L; ++i) fa[i] *= fb[i] / static_cast<double>(L);
    fft_inplace(fa, FFTW_BACKWARD);
    fa.resize(n);
    return fa;
}

std::vector<cplx> dft(const std::vector<cplx>& x) {
    std::vector<cplx> y(x);
    if (!y.empty()) fft_inplace(y, FFTW_FORWARD);
    return y;
}

}  // namespace dirmoment
