#include "pdcal/quadrature.h"

#include <cmath>
#include <vector>

namespace pdcal {

namespace {

struct Panel {
    double a, m, b;
    double fa, fm, fb;
    double whole;
};

double simpson(double a, double b, double fa, double fm, double fb) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

void refine(const std::function<double(double)> &f, const Panel &p, double tol, int depth, QuadratureResult &out) {
    const double lm = 0.5 * (p.a + p.m);
    const double rm = 0.5 * (p.m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    out.evaluations += 2;
    const double left = simpson(p.a, p.m, p.fa, flm, p.fm);
    const double right = simpson(p.m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        out.value += left + right + delta / 15.0;
        out.error_estimate += std::abs(delta) / 15.0;
        return;
    }
    refine(f, Panel{p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1, out);
    refine(f, Panel{p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1, out);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)> &f, double a, double b, double abs_tol,
                                  int max_depth) {
    QuadratureResult out;
    if (b == a) {
        return out;
    }
    // Start from a few panels so that integrands vanishing at the 3 initial nodes
    // are not accepted prematurely.
    constexpr int kInitialPanels = 8;
    const double h = (b - a) / kInitialPanels;
    for (int k = 0; k < kInitialPanels; k++) {
        const double pa = a + k * h;
        const double pb = (k + 1 == kInitialPanels) ? b : a + (k + 1) * h;
        const double pm = 0.5 * (pa + pb);
        const double fa = f(pa);
        const double fm = f(pm);
        const double fb = f(pb);
        out.evaluations += 3;
        refine(f, Panel{pa, pm, pb, fa, fm, fb, simpson(pa, pb, fa, fm, fb)}, abs_tol / kInitialPanels, max_depth,
               out);
    }
    return out;
}

QuadratureResult adaptive_simpson_piecewise(const std::function<double(double)> &f, double a, double b,
                                            std::span<const double> breakpoints, double abs_tol) {
    std::vector<double> edges{a};
    for (double x : breakpoints) {
        if (x > edges.back() && x < b) {
            edges.push_back(x);
        }
    }
    edges.push_back(b);
    QuadratureResult total;
    const double share = abs_tol / static_cast<double>(edges.size() - 1);
    for (std::size_t k = 0; k + 1 < edges.size(); k++) {
        auto part = adaptive_simpson(f, edges[k], edges[k + 1], share);
        total.value += part.value;
        total.error_estimate += part.error_estimate;
        total.evaluations += part.evaluations;
    }
    return total;
}

}  // namespace pdcal
