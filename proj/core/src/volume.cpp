#include "metvol/volume.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "metvol/detail/mvee.hpp"

namespace metvol {

// ---------------------------------------------------------------------------
// omega_q and pinned constants
// ---------------------------------------------------------------------------

namespace {

constexpr double kPi = 3.14159265358979323846;

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Gamma at integer and half-integer arguments only.
double gamma_half_integer(int twice_x) {
    if (twice_x % 2 == 0) return factorial(twice_x / 2 - 1);
    // Gamma(m + 1/2) = (2m)! sqrt(pi) / (4^m m!)
    const int m = (twice_x - 1) / 2;
    return factorial(2 * m) * std::sqrt(kPi) / (std::pow(4.0, m) * factorial(m));
}

}  // namespace

double omega_q(int q) {
    if (q < 0) throw PreconditionError("omega_q needs q >= 0");
    if (q == 0) return 1.0;
    return std::pow(kPi, q / 2.0) / gamma_half_integer(q + 2);
}

double hadamard_constant(int q, double mvee_eps) {
    return std::pow(double(q), q / 2.0) * std::pow(1.0 + mvee_eps, q);
}

double svd_ratio_constant(int q, double mvee_eps) {
    return std::pow(double(q), double(q)) * std::pow(1.0 + mvee_eps, 2.0 * q);
}

double block_det_constant(int q, int k, double mvee_eps) {
    return std::pow(double(q), double(q)) * std::pow(double(k), double(k)) *
           std::pow(1.0 + mvee_eps, 2.0 * (q + k));
}

double gelfand_ratio_constant(int q, double mvee_eps) {
    if (q < 2) return 4.0 * block_det_constant(1, 1, mvee_eps);
    const double a = 4.0 * block_det_constant(q, 1, mvee_eps);
    const double b = 2.0 * block_det_constant(q, q - 1, mvee_eps) *
                     std::pow(double(q - 1), (q - 1) / 2.0);
    return std::max(a, b);
}

const char* to_string(VolumeMethod m) {
    switch (m) {
        case VolumeMethod::exact_closed_form: return "exact_closed_form";
        case VolumeMethod::hull_triangulation: return "hull_triangulation";
        case VolumeMethod::monte_carlo: return "monte_carlo";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// MVEE (Frank-Wolfe with away steps on the dual design problem)
// ---------------------------------------------------------------------------

namespace detail {

std::vector<Vector> boundary_directions(int q, int quasi_count) {
    std::vector<Vector> dirs;
    if (q <= 8) {
        const std::uint64_t total = 1ULL << (q - 1);
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            Vector u(q);
            u[0] = 1.0;
            for (int i = 1; i < q; ++i) u[i] = (mask >> (i - 1)) & 1 ? 1.0 : -1.0;
            dirs.push_back(u / u.norm());
        }
    }
    for (int i = 0; i < q; ++i) dirs.push_back(Vector::Unit(q, i));
    for (int i = 0; i < quasi_count; ++i) dirs.push_back(halton_direction(i, q));
    return dirs;
}

MveeResult mvee_symmetric(const std::vector<Vector>& pts, double eps_target, int max_iter) {
    const int q = static_cast<int>(pts[0].size());
    const int n = static_cast<int>(pts.size());

    Vector u = Vector::Constant(n, 1.0 / n);
    Matrix M = Matrix::Zero(q, q);
    for (int i = 0; i < n; ++i) M += u[i] * pts[i] * pts[i].transpose();
    Matrix Minv = M.inverse();

    Vector g(n);
    auto recompute_g = [&]() {
        for (int i = 0; i < n; ++i) g[i] = pts[i].dot(Minv * pts[i]);
    };
    recompute_g();

    int it = 0;
    double eps = kInf;
    for (; it < max_iter; ++it) {
        int iplus = 0, iminus = -1;
        double gmax = -kInf, gmin = kInf;
        for (int i = 0; i < n; ++i) {
            if (g[i] > gmax) {
                gmax = g[i];
                iplus = i;
            }
            if (u[i] > 1e-12 && g[i] < gmin) {
                gmin = g[i];
                iminus = i;
            }
        }
        eps = gmax / q - 1.0;
        const double eps_lo = iminus >= 0 ? 1.0 - gmin / q : 0.0;
        if (eps <= eps_target && eps_lo <= eps_target) break;

        int j;
        double lam;
        if (eps >= eps_lo) {  // add step towards the most violated point
            j = iplus;
            lam = (g[j] - q) / (q * (g[j] - 1.0));
        } else {  // away step from the least useful support point
            j = iminus;
            lam = (g[j] - q) / (q * (g[j] - 1.0));
            lam = std::max(lam, -u[j] / (1.0 - u[j]));
        }
        if (std::abs(lam) < 1e-17) break;

        u *= (1.0 - lam);
        u[j] += lam;

        // Sherman-Morrison update of Minv and the leverage values.
        const Vector z = Minv * pts[j];
        const double gj = g[j];
        const double denom = 1.0 - lam + lam * gj;
        Minv = (Minv - (lam / denom) * (z * z.transpose())) / (1.0 - lam);
        if ((it + 1) % 128 == 0) {
            M.setZero();
            for (int i = 0; i < n; ++i) M += u[i] * pts[i] * pts[i].transpose();
            Minv = M.inverse();
            recompute_g();
        } else {
            for (int i = 0; i < n; ++i) {
                const double w = pts[i].dot(z);
                g[i] = (g[i] - lam * w * w / denom) / (1.0 - lam);
            }
        }
    }

    // Final exact leverage pass; the reported epsilon certifies containment.
    Matrix Mfin = Matrix::Zero(q, q);
    for (int i = 0; i < n; ++i) Mfin += u[i] * pts[i] * pts[i].transpose();
    Matrix MinvF = Mfin.inverse();
    double gmax = 0.0;
    for (int i = 0; i < n; ++i) gmax = std::max(gmax, pts[i].dot(MinvF * pts[i]));
    const double slack = gmax / q - 1.0;

    MveeResult out;
    out.H = MinvF / gmax;  // every sample satisfies c^T H c <= 1
    out.epsilon = std::max(slack, 0.0);
    out.iterations = it;
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Radial triangulations
// ---------------------------------------------------------------------------

namespace {

using RadialFn = std::function<double(const Vector&)>;

double polygon_volume(const RadialFn& radius, int segments, double* rel_err) {
    auto area_with = [&](int M) {
        double area = 0.0;
        const double dt = 2.0 * kPi / M;
        double r_prev = 0.0, r_first = 0.0;
        for (int j = 0; j < M; ++j) {
            Vector u(2);
            u << std::cos(j * dt), std::sin(j * dt);
            const double r = radius(u);
            if (j == 0)
                r_first = r;
            else
                area += 0.5 * r_prev * r * std::sin(dt);
            r_prev = r;
        }
        area += 0.5 * r_prev * r_first * std::sin(dt);
        return area;
    };
    const double full = area_with(segments);
    const double half = area_with(segments / 2);
    if (rel_err) *rel_err = std::abs(full - half) / std::max(full, 1e-300) + 1e-12;
    return full;
}

struct IcoSphere {
    std::vector<Vector> verts;            // unit directions
    std::vector<std::array<int, 3>> faces;
};

IcoSphere build_icosphere(int level) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vector> v;
    auto add = [&](double a, double b, double c) {
        Vector x(3);
        x << a, b, c;
        v.push_back(x / x.norm());
    };
    add(-1, t, 0); add(1, t, 0); add(-1, -t, 0); add(1, -t, 0);
    add(0, -1, t); add(0, 1, t); add(0, -1, -t); add(0, 1, -t);
    add(t, 0, -1); add(t, 0, 1); add(-t, 0, -1); add(-t, 0, 1);
    std::vector<std::array<int, 3>> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            Vector m = (v[a] + v[b]) / 2.0;
            v.push_back(m / m.norm());
            int idx = static_cast<int>(v.size()) - 1;
            mid[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> nf;
        nf.reserve(f.size() * 4);
        for (auto& tri : f) {
            int a = midpoint(tri[0], tri[1]);
            int b = midpoint(tri[1], tri[2]);
            int c = midpoint(tri[2], tri[0]);
            nf.push_back({tri[0], a, c});
            nf.push_back({tri[1], b, a});
            nf.push_back({tri[2], c, b});
            nf.push_back({a, b, c});
        }
        f = std::move(nf);
    }
    return IcoSphere{std::move(v), std::move(f)};
}

const IcoSphere& icosphere(int level) {
    static const std::map<int, IcoSphere> cache = [] {
        std::map<int, IcoSphere> m;
        for (int l : {1, 2, 3, 4, 5}) m.emplace(l, build_icosphere(l));
        return m;
    }();
    return cache.at(level);
}

double icosphere_volume(const RadialFn& radius, int level, double* rel_err) {
    auto vol_with = [&](int l) {
        const IcoSphere& s = icosphere(l);
        std::vector<double> r(s.verts.size());
        for (std::size_t i = 0; i < s.verts.size(); ++i) r[i] = radius(s.verts[i]);
        double vol = 0.0;
        Matrix T(3, 3);
        for (auto& f : s.faces) {
            T.col(0) = r[f[0]] * s.verts[f[0]];
            T.col(1) = r[f[1]] * s.verts[f[1]];
            T.col(2) = r[f[2]] * s.verts[f[2]];
            vol += std::abs(T.determinant()) / 6.0;
        }
        return vol;
    };
    const double full = vol_with(level);
    if (rel_err) {
        const double coarse = vol_with(std::max(1, level - 1));
        *rel_err = std::abs(full - coarse) / std::max(full, 1e-300) + 1e-12;
    }
    return full;
}

// Rejection sampling inside the inflated enclosing ellipsoid.
VolumeEstimate mc_volume(const Matrix& H, const std::function<bool(const Vector&)>& inside,
                         const VolumeOptions& opts, RngStream rng) {
    const int q = static_cast<int>(H.rows());
    // Inflation keeps the body inside the sampling region between boundary
    // samples; the estimator stays unbiased, only acceptance drops.
    const double inflate = 1.0 + 5e-3;
    Matrix Hs = H / (inflate * inflate);
    Eigen::LLT<Matrix> llt(Hs);
    Matrix Lt_inv = llt.matrixL().toDenseMatrix().transpose().inverse();
    const double ell_vol = omega_q(q) / std::sqrt(Hs.determinant());

    long accepts = 0, total = 0;
    while (accepts < opts.mc_target_accepts && total < opts.mc_max_samples) {
        Vector y = rng.direction(q) * std::pow(rng.uniform(), 1.0 / q);
        Vector c = Lt_inv * y;
        ++total;
        if (inside(c)) ++accepts;
    }
    VolumeEstimate out;
    out.method = VolumeMethod::monte_carlo;
    if (accepts == 0) {
        out.value = 0.0;
        out.rel_error = 1.0;
        return out;
    }
    const double p = double(accepts) / double(total);
    out.value = ell_vol * p;
    out.rel_error = std::sqrt((1.0 - p) / (double(total) * p));
    return out;
}

// Coordinate subspace detection for the l1/linf closed forms.
bool is_coordinate_subspace(const Subspace& E) {
    const Matrix& B = E.basis();
    int live = 0;
    for (int i = 0; i < B.rows(); ++i)
        if (B.row(i).norm() > 1e-10) ++live;
    return live == E.dim();
}

Matrix section_mvee(const AmbientSpace& space, const Subspace& E, const VolumeOptions& opts,
                    double* achieved_eps) {
    const int q = E.dim();
    auto dirs = detail::boundary_directions(q, 512 * q);
    std::vector<Vector> pts;
    pts.reserve(dirs.size());
    for (auto& u : dirs) {
        const double n = space.norm_of(E.basis() * u);
        pts.push_back(u / n);
    }
    auto res = detail::mvee_symmetric(pts, std::min(opts.mvee_eps * 1e-2, 1e-5),
                                      opts.mvee_max_iter);
    if (achieved_eps) *achieved_eps = res.epsilon;
    return res.H;
}

VolumeEstimate unit_ball_volume_impl(const AmbientSpace& space, const Subspace& E,
                                     const VolumeOptions& opts, std::uint64_t seed,
                                     const Tolerances& tol, const Matrix* mvee_H) {
    const int q = E.dim();
    if (q < 1) throw PreconditionError("volume of the zero subspace");
    if (q > tol.q_max) throw PreconditionError("dimension beyond volume budget");
    const Matrix& B = E.basis();

    VolumeEstimate out;
    const bool forced = opts.force_method.has_value();
    auto allowed = [&](VolumeMethod m) { return !forced || *opts.force_method == m; };

    if (allowed(VolumeMethod::exact_closed_form)) {
        if (q == 1) {
            out.value = 2.0 / space.norm_of(B.col(0));
            out.method = VolumeMethod::exact_closed_form;
            return out;
        }
        if (space.euclidean()) {
            out.value = omega_q(q);
            out.method = VolumeMethod::exact_closed_form;
            return out;
        }
        const NormKind kind = space.norm.kind();
        if (kind == NormKind::linf && is_coordinate_subspace(E)) {
            out.value = std::pow(2.0, q);
            out.method = VolumeMethod::exact_closed_form;
            return out;
        }
        if (kind == NormKind::lp && space.norm.p() == 1.0 && is_coordinate_subspace(E)) {
            out.value = std::pow(2.0, q) / factorial(q);
            out.method = VolumeMethod::exact_closed_form;
            return out;
        }
    }

    auto radius = [&](const Vector& u) { return 1.0 / space.norm_of(B * u); };

    if (q == 2 && allowed(VolumeMethod::hull_triangulation)) {
        const int M = std::max(2048, 2 * opts.hull_samples_per_dim);
        out.value = polygon_volume(radius, M, &out.rel_error);
        out.method = VolumeMethod::hull_triangulation;
        return out;
    }
    if (q == 3 && allowed(VolumeMethod::hull_triangulation)) {
        out.value = icosphere_volume(radius, 5, &out.rel_error);
        out.method = VolumeMethod::hull_triangulation;
        return out;
    }

    // Monte Carlo inside the enclosing ellipsoid.
    Matrix H;
    if (mvee_H) {
        H = *mvee_H;
    } else {
        H = section_mvee(space, E, opts, nullptr);
    }
    auto inside = [&](const Vector& c) { return space.norm_of(B * c) <= 1.0; };
    return mc_volume(H, inside, opts, RngStream(seed, 0x10b));
}

}  // namespace

VolumeEstimate unit_ball_volume(const AmbientSpace& space, const Subspace& E,
                                const VolumeOptions& opts, std::uint64_t seed,
                                const Tolerances& tol) {
    return unit_ball_volume_impl(space, E, opts, seed, tol, nullptr);
}

// ---------------------------------------------------------------------------
// John forms
// ---------------------------------------------------------------------------

JohnForm john_form(const AmbientSpace& space, const Subspace& E, const VolumeOptions& opts,
                   std::uint64_t seed, const Tolerances& tol) {
    const int q = E.dim();
    if (q < 1) throw PreconditionError("empty subspace");
    if (q > tol.q_max) throw PreconditionError("dimension beyond volume budget");

    JohnForm form;
    form.subspace = E;

    if (q == 1) {
        const double n = space.norm_of(E.basis().col(0));
        form.gram = Matrix::Constant(1, 1, n * n);
        form.mvee_epsilon = 0.0;
        form.ball_volume = unit_ball_volume(space, E, opts, seed, tol);
        return form;
    }
    if (space.euclidean()) {
        form.gram = Matrix::Identity(q, q);
        form.mvee_epsilon = 0.0;
        form.ball_volume = unit_ball_volume(space, E, opts, seed, tol);
        return form;
    }

    double eps = 0.0;
    Matrix H = section_mvee(space, E, opts, &eps);
    if (eps > opts.mvee_eps)
        throw std::runtime_error("ellipsoid approximation did not reach requested accuracy");
    form.mvee_epsilon = eps;
    form.ball_volume = unit_ball_volume_impl(space, E, opts, seed, tol, &H);

    // Rescale so the Lebesgue volume of the gram unit ball matches the
    // induced volume: det(G) = (omega_q / V_B)^2.
    const double target = std::pow(omega_q(q) / form.ball_volume.value, 2.0);
    const double s = std::pow(target / H.determinant(), 1.0 / q);
    form.gram = s * H;
    return form;
}

double john_norm(const JohnForm& form, const Vector& coords) {
    return std::sqrt(coords.dot(form.gram * coords));
}

// ---------------------------------------------------------------------------
// Parallelepipeds and ball sections
// ---------------------------------------------------------------------------

VolumeEstimate parallelepiped_volume(const AmbientSpace& space, const Subspace& E,
                                     const std::vector<Vector>& vectors,
                                     const VolumeOptions& opts, std::uint64_t seed,
                                     const Tolerances& tol) {
    const int q = E.dim();
    if (static_cast<int>(vectors.size()) != q)
        throw PreconditionError("parallelepiped needs dim E vectors");
    const double tau = tol.tau_sub(space.euclidean());
    Matrix C(q, q);
    for (int j = 0; j < q; ++j) {
        if (E.membership_residual(vectors[j]) > tau)
            throw PreconditionError("vector outside the subspace");
        C.col(j) = E.coords_of(vectors[j]);
    }
    const double det = std::abs(C.determinant());
    VolumeEstimate ball = unit_ball_volume(space, E, opts, seed, tol);
    VolumeEstimate out;
    out.method = ball.method;
    if (det == 0.0) return out;  // dependent vectors span a null set
    out.value = det * omega_q(q) / ball.value;
    out.rel_error = ball.rel_error;
    return out;
}

VolumeEstimate ball_section_volume(const AmbientSpace& space, const Subspace& E,
                                   const Vector& x, double r, const VolumeOptions& opts,
                                   std::uint64_t seed, const Tolerances& tol) {
    const int q = E.dim();
    if (q > tol.q_max) throw PreconditionError("dimension beyond volume budget");
    if (!(r > 0.0)) throw PreconditionError("ball radius must be positive");
    const Matrix& B = E.basis();

    auto [dist, c0] = dist_to_subspace_argmin(space, x, E);
    VolumeEstimate out;
    if (dist >= r) return out;  // empty section

    const bool mc = opts.force_method == VolumeMethod::monte_carlo || q > 3;
    if (!mc) {
        // Radial triangulation around an interior point of the section.
        auto t_max = [&](const Vector& u) {
            const Vector base = B * c0 - x;
            const Vector dir = B * u;
            auto g = [&](double t) { return space.norm_of(base + t * dir) - r; };
            double hi = 2.0 * r / space.norm_of(dir) + 1e-9;
            int guard = 0;
            while (g(hi) < 0 && guard++ < 60) hi *= 2.0;
            double lo = 0.0;
            for (int i = 0; i < 70; ++i) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) < 0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        };
        if (q == 1) {
            Vector plus = Vector::Constant(1, 1.0), minus = Vector::Constant(1, -1.0);
            out.value = t_max(plus) + t_max(minus);
            out.method = VolumeMethod::hull_triangulation;
            out.rel_error = 1e-10;
            return out;
        }
        if (q == 2) {
            out.value = polygon_volume(t_max, 2048, &out.rel_error);
            out.method = VolumeMethod::hull_triangulation;
            return out;
        }
        out.value = icosphere_volume(t_max, 4, &out.rel_error);
        out.method = VolumeMethod::hull_triangulation;
        return out;
    }

    // Monte Carlo: the section lies inside (|x| + r) B_E.
    const double R = space.norm_of(x) + r;
    double eps = 0.0;
    Matrix H = section_mvee(space, E, opts, &eps);
    Matrix Hs = H / (R * R);
    auto inside = [&](const Vector& c) { return space.norm_of(B * c - x) <= r; };
    return mc_volume(Hs, inside, opts, RngStream(seed, 0x5ec));
}

// ---------------------------------------------------------------------------
// Determinants
// ---------------------------------------------------------------------------

DetEstimate determinant(const AmbientSpace& space, const OperatorMatrix& A, const Subspace& E,
                        const VolumeOptions& opts, std::uint64_t seed, const Tolerances& tol) {
    const int q = E.dim();
    if (q > tol.q_max) throw PreconditionError("dimension beyond volume budget");
    DetEstimate out;

    Matrix X = A * E.basis();
    Eigen::JacobiSVD<Matrix> svd(X);
    const double smax = svd.singularValues()[0];
    if (!(smax > 0.0) || svd.singularValues()[q - 1] <= tol.tau_rank_rel * smax)
        return out;  // not injective on E

    Subspace AE(X, tol);
    Matrix C = AE.basis().transpose() * X;
    const double det = std::abs(C.determinant());

    if (space.euclidean() && !opts.force_method) {
        out.value = det;
        out.rel_error = 1e-12;
        return out;
    }
    RngStream rng(seed, 0xde7);
    VolumeEstimate vsrc = unit_ball_volume(space, E, opts, rng.next_u64(), tol);
    VolumeEstimate vimg = unit_ball_volume(space, AE, opts, rng.next_u64(), tol);
    out.value = det * vsrc.value / vimg.value;
    out.rel_error = vsrc.rel_error + vimg.rel_error;
    out.method_source = vsrc.method;
    out.method_image = vimg.method;
    return out;
}

double log_det_surrogate(const AmbientSpace& space, const OperatorMatrix& A,
                         const Subspace& E) {
    const int q = E.dim();
    Matrix X = A * E.basis();
    Eigen::JacobiSVD<Matrix> svd(X);
    const double smax = svd.singularValues()[0];
    if (!(smax > 0.0) || svd.singularValues()[q - 1] <= 1e-9 * smax) return -kInf;
    Subspace AE(X);
    Matrix C = AE.basis().transpose() * X;
    double ld = 0.0;
    {
        Eigen::PartialPivLU<Matrix> lu(C);
        for (int i = 0; i < q; ++i) ld += std::log(std::abs(lu.matrixLU()(i, i)));
    }
    if (space.euclidean()) return ld;

    auto coarse_log_vol = [&](const Subspace& S) {
        const Matrix& B = S.basis();
        auto radius = [&](const Vector& u) { return 1.0 / space.norm_of(B * u); };
        if (q == 1) return std::log(2.0 / space.norm_of(B.col(0)));
        if (q == 2) return std::log(polygon_volume(radius, 96, nullptr));
        if (q == 3) return std::log(icosphere_volume(radius, 2, nullptr));
        auto dirs = detail::boundary_directions(q, 48 * q);
        std::vector<Vector> pts;
        pts.reserve(dirs.size());
        for (auto& u : dirs) pts.push_back(u / space.norm_of(B * u));
        auto res = detail::mvee_symmetric(pts, 1e-4, 4000);
        return std::log(omega_q(q)) - 0.5 * std::log(res.H.determinant());
    };
    return ld + coarse_log_vol(E) - coarse_log_vol(AE);
}

// ---------------------------------------------------------------------------
// Almost orthonormal bases
// ---------------------------------------------------------------------------

ApproxSvdBasis approx_svd_basis(const AmbientSpace& space, const OperatorMatrix& A,
                                const Subspace& V, const VolumeOptions& opts,
                                std::uint64_t seed, const Tolerances& tol) {
    const int q = V.dim();
    if (q > tol.q_max) throw PreconditionError("dimension beyond volume budget");
    ApproxSvdBasis out;

    RngStream rng(seed, 0xa54);
    JohnForm jv = john_form(space, V, opts, rng.next_u64(), tol);
    Eigen::LLT<Matrix> lltV(jv.gram);
    Matrix LVt = lltV.matrixL().toDenseMatrix().transpose();
    Matrix LVt_inv = LVt.inverse();

    Matrix X = A * V.basis();
    Eigen::JacobiSVD<Matrix> rank_svd(X);
    const double smax = rank_svd.singularValues()[0];
    out.invertible = smax > 0.0 && rank_svd.singularValues()[q - 1] > tol.tau_rank_rel * smax;

    Matrix What;  // right factors in John coordinates of V
    std::optional<JohnForm> jw;
    if (out.invertible) {
        Subspace AV(X, tol);
        jw = john_form(space, AV, opts, rng.next_u64(), tol);
        Eigen::LLT<Matrix> lltW(jw->gram);
        Matrix LWt = lltW.matrixL().toDenseMatrix().transpose();
        Matrix C = AV.basis().transpose() * X;
        Matrix Chat = LWt * C * LVt_inv;
        Eigen::JacobiSVD<Matrix> svd(Chat, Eigen::ComputeFullV);
        What = svd.matrixV();
    } else {
        // Singular restriction: measure the image side with the coordinate
        // metric on a thin image frame; the basis is still (.,.)_V-orthogonal.
        Eigen::JacobiSVD<Matrix> thin(X, Eigen::ComputeThinU);
        Matrix C = thin.matrixU().transpose() * X;
        Matrix Chat = C * LVt_inv;
        Eigen::JacobiSVD<Matrix> svd(Chat, Eigen::ComputeFullV);
        What = svd.matrixV();
    }

    out.vectors.reserve(q);
    out.expansions.reserve(q);
    double prod = 1.0;
    for (int i = 0; i < q; ++i) {
        Vector c = LVt_inv * What.col(i);
        Vector v = V.basis() * c;
        v /= space.norm_of(v);
        out.vectors.push_back(v);
        const double ex = space.norm_of(A * v);
        out.expansions.push_back(ex);
        prod *= ex;
    }
    out.product = prod;
    out.det = determinant(space, A, V, opts, rng.next_u64(), tol);

    if (out.invertible) {
        Matrix img_coords(q, q);
        for (int i = 0; i < q; ++i) {
            Vector w = A * out.vectors[i];
            w /= space.norm_of(w);
            out.image_vectors.push_back(w);
            img_coords.col(i) = jw->subspace.coords_of(w);
        }
        Matrix G = img_coords.transpose() * jw->gram * img_coords;
        double worst = 0.0;
        for (int i = 0; i < q; ++i)
            for (int j = i + 1; j < q; ++j)
                worst = std::max(worst, std::abs(G(i, j)) / std::sqrt(G(i, i) * G(j, j)));
        out.image_gram_residual = worst;
    }
    return out;
}

MinExpansionBound min_expansion_bound(const AmbientSpace& space, const OperatorMatrix& A,
                                      const Subspace& E, const VolumeOptions& opts,
                                      const OptBudget& budget, std::uint64_t seed,
                                      const Tolerances& tol) {
    const int q = E.dim();
    MinExpansionBound out;
    auto f = [&](const Vector& v) { return space.norm_of(A * v); };
    SphereOptResult mn = sphere_minimize(space, E.basis(), f, budget, RngStream(seed, 61));
    OperatorNormResult on = restricted_operator_norm(space, A, E, budget, seed + 1);
    out.minimizer = mn.point;
    out.lhs = mn.value * std::pow(on.value, q - 1);
    DetEstimate det = determinant(space, A, E, opts, seed + 2, tol);
    out.rhs = det.value / hadamard_constant(q, opts.mvee_eps);
    return out;
}

// ---------------------------------------------------------------------------
// Block determinant bounds
// ---------------------------------------------------------------------------

namespace {

// |pi| for a projection given in the coordinates of a carrier subspace.
double projection_norm_in(const AmbientSpace& space, const Subspace& V, const Matrix& P_coords,
                          const OptBudget& budget, std::uint64_t seed) {
    if (space.euclidean())
        return Eigen::JacobiSVD<Matrix>(P_coords).singularValues()[0];
    auto f = [&](const Vector& v) {
        return space.norm_of(V.basis() * (P_coords * (V.basis().transpose() * v)));
    };
    return sphere_maximize(space, V.basis(), f, budget, RngStream(seed, 67)).value;
}

Matrix coordinate_projection(const Matrix& CE, const Matrix& CF) {
    const int q = static_cast<int>(CE.rows());
    const int k = static_cast<int>(CE.cols());
    Matrix M(q, q);
    M << CE, CF;
    Matrix Minv = M.inverse();
    return CE * Minv.topRows(k);
}

}  // namespace

BlockDetBounds block_det_bounds(const AmbientSpace& space, const OperatorMatrix& A,
                                const Subspace& E, const Subspace& F, const VolumeOptions& opts,
                                const OptBudget& budget, std::uint64_t seed,
                                const Tolerances& tol) {
    const int k = E.dim(), j = F.dim(), q = k + j;
    if (q > tol.q_max) throw PreconditionError("dimension beyond volume budget");
    Matrix S(space.dim, q);
    S << E.basis(), F.basis();
    Eigen::JacobiSVD<Matrix> ssvd(S);
    if (!(ssvd.singularValues()[q - 1] > tol.tau_rank_rel * ssvd.singularValues()[0]))
        throw PreconditionError("not a splitting");
    Subspace V(S, tol);

    Matrix X = A * V.basis();
    Eigen::JacobiSVD<Matrix> xsvd(X);
    if (!(xsvd.singularValues()[q - 1] > tol.tau_rank_rel * xsvd.singularValues()[0]))
        throw PreconditionError("operator is singular on the block sum");
    Subspace AV(X, tol);

    RngStream rng(seed, 0xb10c);
    DetEstimate dv = determinant(space, A, V, opts, rng.next_u64(), tol);
    DetEstimate de = determinant(space, A, E, opts, rng.next_u64(), tol);
    DetEstimate df = determinant(space, A, F, opts, rng.next_u64(), tol);

    BlockDetBounds out;
    out.ratio = dv.value / (de.value * df.value);

    Matrix CE = V.basis().transpose() * E.basis();
    Matrix CF = V.basis().transpose() * F.basis();
    out.proj_source = projection_norm_in(space, V, coordinate_projection(CE, CF), budget,
                                         rng.next_u64());

    Matrix CEi = AV.basis().transpose() * (A * E.basis());
    Matrix CFi = AV.basis().transpose() * (A * F.basis());
    out.proj_image = projection_norm_in(space, AV, coordinate_projection(CEi, CFi), budget,
                                        rng.next_u64());

    const double Cq = block_det_constant(q, k, opts.mvee_eps);
    out.lower = 1.0 / (Cq * std::pow(out.proj_image, k));
    out.upper = Cq * std::pow(out.proj_source, k);
    return out;
}

}  // namespace metvol
