#include "metvol/optimize.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace metvol::opt {

double nelder_mead(const Objective& f, Vector& x, const NelderMeadOptions& opts) {
    const int n = static_cast<int>(x.size());
    if (n == 0) return f(x);

    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<Vector> pts(n + 1, x);
    std::vector<double> val(n + 1);
    for (int i = 0; i < n; ++i) {
        double h = opts.init_step * std::max(1.0, std::abs(x[i]));
        pts[i + 1][i] += h;
    }
    for (int i = 0; i <= n; ++i) val[i] = f(pts[i]);

    std::vector<int> order(n + 1);
    for (int it = 0; it < opts.max_iter; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return val[a] < val[b]; });
        const int best = order[0], worst = order[n], second = order[n - 1];

        double spread = 0.0;
        for (int i = 0; i <= n; ++i)
            spread = std::max(spread, (pts[i] - pts[best]).norm());
        if (spread < opts.x_tol && std::abs(val[worst] - val[best]) < opts.f_tol)
            break;

        Vector centroid = Vector::Zero(n);
        for (int i = 0; i <= n; ++i)
            if (i != worst) centroid += pts[i];
        centroid /= n;

        Vector refl = centroid + alpha * (centroid - pts[worst]);
        double frefl = f(refl);
        if (frefl < val[best]) {
            Vector exp_pt = centroid + gamma * (centroid - pts[worst]);
            double fexp = f(exp_pt);
            if (fexp < frefl) {
                pts[worst] = exp_pt;
                val[worst] = fexp;
            } else {
                pts[worst] = refl;
                val[worst] = frefl;
            }
        } else if (frefl < val[second]) {
            pts[worst] = refl;
            val[worst] = frefl;
        } else {
            Vector contr = centroid + rho * (pts[worst] - centroid);
            double fcontr = f(contr);
            if (fcontr < val[worst]) {
                pts[worst] = contr;
                val[worst] = fcontr;
            } else {
                for (int i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    pts[i] = pts[best] + sigma * (pts[i] - pts[best]);
                    val[i] = f(pts[i]);
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (val[i] < val[best]) best = i;
    x = pts[best];
    return val[best];
}

double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      double tol, int max_iter) {
    const double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace metvol::opt
