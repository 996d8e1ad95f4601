#include "metvol/ambient.hpp"

#include <algorithm>
#include <cmath>

#include "metvol/optimize.hpp"

namespace metvol {

// ---------------------------------------------------------------------------
// NormSpec
// ---------------------------------------------------------------------------

NormSpec NormSpec::lp(double p) {
    if (!(p >= 1.0)) throw PreconditionError("lp norm requires p >= 1");
    NormSpec n;
    n.kind_ = NormKind::lp;
    n.p_ = p;
    return n;
}

NormSpec NormSpec::linf() {
    NormSpec n;
    n.kind_ = NormKind::linf;
    return n;
}

NormSpec NormSpec::weighted_lp(double p, Vector weights) {
    if (!(p >= 1.0)) throw PreconditionError("weighted_lp norm requires p >= 1");
    if ((weights.array() <= 0.0).any())
        throw PreconditionError("weighted_lp weights must be positive");
    NormSpec n;
    n.kind_ = NormKind::weighted_lp;
    n.p_ = p;
    n.weights_ = std::move(weights);
    return n;
}

NormSpec NormSpec::custom(std::function<double(const Vector&)> oracle, std::string label) {
    NormSpec n;
    n.kind_ = NormKind::custom;
    n.oracle_ = std::move(oracle);
    n.label_ = std::move(label);
    return n;
}

double NormSpec::operator()(const Vector& v) const {
    switch (kind_) {
        case NormKind::euclidean:
            return v.norm();
        case NormKind::lp: {
            if (p_ == 1.0) return v.lpNorm<1>();
            if (p_ == 2.0) return v.norm();
            return std::pow(v.array().abs().pow(p_).sum(), 1.0 / p_);
        }
        case NormKind::linf:
            return v.lpNorm<Eigen::Infinity>();
        case NormKind::weighted_lp: {
            if (p_ == 1.0) return (weights_.array() * v.array().abs()).sum();
            return std::pow((weights_.array() * v.array().abs().pow(p_)).sum(), 1.0 / p_);
        }
        case NormKind::custom:
            return oracle_(v);
    }
    return 0.0;
}

bool NormSpec::has_closed_dual() const {
    switch (kind_) {
        case NormKind::euclidean:
        case NormKind::lp:
        case NormKind::linf:
            return true;
        case NormKind::weighted_lp:
            return p_ > 1.0;
        case NormKind::custom:
            return false;
    }
    return false;
}

NormSpec NormSpec::dual() const {
    switch (kind_) {
        case NormKind::euclidean:
            return euclidean();
        case NormKind::lp:
            if (p_ == 1.0) return linf();
            return lp(p_ / (p_ - 1.0));
        case NormKind::linf:
            return lp(1.0);
        case NormKind::weighted_lp: {
            if (p_ == 1.0) throw PreconditionError("weighted l1 has no closed dual here");
            const double pd = p_ / (p_ - 1.0);
            Vector wd = weights_.array().pow(-pd / p_);
            return weighted_lp(pd, std::move(wd));
        }
        case NormKind::custom:
            throw PreconditionError("custom norm dual requires AmbientSpace::dual()");
    }
    return euclidean();
}

AmbientSpace AmbientSpace::dual() const {
    if (norm.has_closed_dual()) return AmbientSpace(dim, norm.dual());
    // Numeric dual of a custom norm: |phi|_* = sup_{|v| <= 1} phi . v.
    AmbientSpace primal = *this;
    auto oracle = [primal](const Vector& phi) {
        Matrix id = Matrix::Identity(primal.dim, primal.dim);
        auto f = [&](const Vector& v) { return phi.dot(v); };
        SphereOptResult pos = sphere_maximize(primal, id, f, inner_budget(),
                                              RngStream(0x5eed, 17));
        return std::abs(pos.value);
    };
    return AmbientSpace(dim, NormSpec::custom(oracle, "numeric-dual"));
}

std::vector<Vector> AmbientSpace::ball_vertices(int max_count) const {
    std::vector<Vector> out;
    if (norm.kind() == NormKind::lp && norm.p() == 1.0) {
        for (int i = 0; i < dim; ++i) {
            Vector v = Vector::Zero(dim);
            v[i] = 1.0;
            out.push_back(v);
            out.push_back(-v);
        }
        return out;
    }
    if (norm.kind() == NormKind::linf) {
        if (dim > 20) return out;
        const std::uint64_t total = 1ULL << dim;
        if (static_cast<int>(total) > max_count) return out;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            Vector v(dim);
            for (int i = 0; i < dim; ++i) v[i] = (mask >> i) & 1 ? 1.0 : -1.0;
            out.push_back(v);
        }
        return out;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subspace
// ---------------------------------------------------------------------------

Subspace::Subspace(Matrix basis, const Tolerances& tol) {
    const int d = static_cast<int>(basis.rows());
    const int q = static_cast<int>(basis.cols());
    if (d < 1 || q > d) throw PreconditionError("subspace basis dimensions invalid");
    if (q == 0) {  // the zero subspace; allowed as a degenerate complement
        basis_ = basis;
        condition_estimate_ = 0.0;
        return;
    }
    Eigen::JacobiSVD<Matrix> svd(basis, Eigen::ComputeThinU);
    const double smax = svd.singularValues()[0];
    const double smin = svd.singularValues()[q - 1];
    if (!(smin > tol.tau_rank_rel * smax))
        throw PreconditionError("subspace basis is rank deficient");
    condition_estimate_ = smax / smin;
    basis_ = svd.matrixU().leftCols(q);
}

Subspace Subspace::coordinate(int ambient_dim, std::vector<int> axes) {
    Matrix b = Matrix::Zero(ambient_dim, static_cast<int>(axes.size()));
    for (int j = 0; j < static_cast<int>(axes.size()); ++j) b(axes[j], j) = 1.0;
    return Subspace(std::move(b));
}

double Subspace::membership_residual(const Vector& v) const {
    const double nv = v.norm();
    if (nv == 0.0) return 0.0;
    if (dim() == 0) return 1.0;
    Vector r = v - basis_ * (basis_.transpose() * v);
    return r.norm() / nv;
}

Matrix Subspace::annihilator_basis() const {
    const int d = ambient_dim(), q = dim();
    if (q == 0) return Matrix::Identity(d, d);
    if (q == d) return Matrix(d, 0);
    Eigen::HouseholderQR<Matrix> qr(basis_);
    Matrix full = qr.householderQ() * Matrix::Identity(d, d);
    return full.rightCols(d - q);
}

Subspace annihilator(const Subspace& U) {
    return Subspace(U.annihilator_basis());
}

// ---------------------------------------------------------------------------
// Splittings
// ---------------------------------------------------------------------------

Splitting make_splitting(const AmbientSpace& space, const Subspace& E, const Subspace& F,
                         const Tolerances& tol) {
    const int d = space.dim;
    if (E.dim() + F.dim() != d) throw PreconditionError("not a splitting");
    if (F.dim() == 0) {
        return Splitting{E, F, Matrix::Identity(d, d), 1.0, true};
    }
    Matrix M(d, d);
    M << E.basis(), F.basis();
    Eigen::JacobiSVD<Matrix> svd(M);
    if (!(svd.singularValues()[d - 1] > tol.tau_rank_rel * svd.singularValues()[0]))
        throw PreconditionError("not a splitting");
    Matrix Minv = M.inverse();
    Matrix P = E.basis() * Minv.topRows(E.dim());
    double pn;
    if (space.euclidean()) {
        pn = Eigen::JacobiSVD<Matrix>(P).singularValues()[0];
    } else {
        auto f = [&](const Vector& v) { return space.norm_of(P * v); };
        pn = sphere_maximize(space, Matrix::Identity(d, d), f, inner_budget(),
                             RngStream(0xab1e, 3))
                 .value;
    }
    return Splitting{E, F, std::move(P), pn, true};
}

double splitting_residual(const Splitting& s) {
    const Matrix& P = s.projection;
    double r = (P * P - P).norm();
    r = std::max(r, (P * s.E.basis() - s.E.basis()).norm());
    if (s.F.dim() > 0) r = std::max(r, (P * s.F.basis()).norm());
    return r;
}

// ---------------------------------------------------------------------------
// Sphere optimization
// ---------------------------------------------------------------------------

OptBudget inner_budget() { return OptBudget{8, 150, 1e-10, true, 4}; }
OptBudget sweep_budget() { return OptBudget{4, 90, 1e-10, true, 3}; }

namespace {

// Shared search core: extremize h(c) = f(B c / |B c|) over c.
SphereOptResult sphere_search(const AmbientSpace& space, const Matrix& frame,
                              const std::function<double(const Vector&)>& f, bool maximize,
                              const OptBudget& budget, RngStream rng,
                              const std::vector<Vector>& hints) {
    const int k = static_cast<int>(frame.cols());
    if (k == 0) throw PreconditionError("empty subspace");

    auto point_of = [&](const Vector& c) -> Vector {
        Vector v = frame * c;
        const double n = space.norm_of(v);
        return v / n;
    };
    auto h = [&](const Vector& c) -> double {
        Vector v = frame * c;
        const double n = space.norm_of(v);
        if (!(n > 1e-300)) return maximize ? -kInf : kInf;
        const double val = f(v / n);
        return maximize ? -val : val;  // Nelder-Mead minimizes
    };

    std::vector<Vector> starts;
    for (int i = 0; i < k; ++i) {
        Vector c = Vector::Zero(k);
        c[i] = 1.0;
        starts.push_back(c);
    }
    if (budget.use_vertices && k >= 2 && k <= 8) {
        const std::uint64_t total = 1ULL << (k - 1);
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            Vector c(k);
            c[0] = 1.0;
            for (int i = 1; i < k; ++i) c[i] = (mask >> (i - 1)) & 1 ? 1.0 : -1.0;
            starts.push_back(c / std::sqrt(double(k)));
        }
    }
    for (const Vector& h : hints) {
        Vector c = frame.transpose() * h;
        if (c.norm() > 1e-12) starts.push_back(c / c.norm());
    }
    for (int i = 0; i < budget.starts; ++i) starts.push_back(rng.direction(k));

    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(starts.size());
    for (int i = 0; i < static_cast<int>(starts.size()); ++i)
        ranked.emplace_back(h(starts[i]), i);
    std::sort(ranked.begin(), ranked.end());

    opt::NelderMeadOptions nm;
    nm.max_iter = budget.iters;
    nm.x_tol = budget.tol;
    nm.init_step = 0.35;

    double best = ranked.front().first;
    Vector best_c = starts[ranked.front().second];
    const int refine = std::min<int>(budget.refine_top, static_cast<int>(ranked.size()));
    for (int r = 0; r < refine; ++r) {
        Vector c = starts[ranked[r].second];
        double v = opt::nelder_mead(h, c, nm);
        if (v < best) {
            best = v;
            best_c = c;
        }
    }
    SphereOptResult out;
    out.value = maximize ? -best : best;
    out.point = point_of(best_c);
    return out;
}

}  // namespace

SphereOptResult sphere_maximize(const AmbientSpace& space, const Matrix& frame,
                                const std::function<double(const Vector&)>& f,
                                const OptBudget& budget, RngStream rng,
                                const std::vector<Vector>& hints) {
    return sphere_search(space, frame, f, true, budget, rng, hints);
}

SphereOptResult sphere_minimize(const AmbientSpace& space, const Matrix& frame,
                                const std::function<double(const Vector&)>& f,
                                const OptBudget& budget, RngStream rng,
                                const std::vector<Vector>& hints) {
    return sphere_search(space, frame, f, false, budget, rng, hints);
}

// ---------------------------------------------------------------------------
// Section polytope vertices
// ---------------------------------------------------------------------------

namespace {

void visit_subsets(int d, int k, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        visit(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == d - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

std::vector<Vector> section_ball_vertices(const AmbientSpace& space, const Subspace& U) {
    std::vector<Vector> out;
    const int d = space.dim, q = U.dim();
    if (q == 0 || d > 10) return out;
    const Matrix& B = U.basis();

    if (space.norm.kind() == NormKind::linf) {
        // A vertex of U ∩ [-1,1]^d pins q coordinates to +-1.
        Matrix sys(q, q);
        Vector rhs(q);
        visit_subsets(d, q, [&](const std::vector<int>& S) {
            for (std::uint64_t signs = 0; signs < (1ULL << (q - 1)); ++signs) {
                for (int i = 0; i < q; ++i) {
                    sys.row(i) = B.row(S[i]);
                    rhs[i] = (i == 0) ? 1.0 : (((signs >> (i - 1)) & 1) ? 1.0 : -1.0);
                }
                Eigen::FullPivLU<Matrix> lu(sys);
                if (!lu.isInvertible()) continue;
                Vector v = B * lu.solve(rhs);
                const double n = v.lpNorm<Eigen::Infinity>();
                if (n <= 1.0 + 1e-9) out.push_back(v / n);
            }
        });
        return out;
    }
    if (space.norm.kind() == NormKind::lp && space.norm.p() == 1.0) {
        // A vertex of U ∩ B_l1 sits on a (d-q)-face of the cross-polytope:
        // supported on d-q+1 signed coordinates with unit coefficient sum.
        const int m = d - q + 1;
        if (m < 1 || m > d) return out;
        Matrix N = U.annihilator_basis();  // d x (d-q)
        Matrix sys(m, m);
        Vector rhs = Vector::Zero(m);
        rhs[m - 1] = 1.0;
        visit_subsets(d, m, [&](const std::vector<int>& T) {
            for (std::uint64_t signs = 0; signs < (1ULL << (m - 1)); ++signs) {
                for (int j = 0; j < m; ++j) {
                    const double s = (j == 0) ? 1.0 : (((signs >> (j - 1)) & 1) ? 1.0 : -1.0);
                    for (int r = 0; r < m - 1; ++r) sys(r, j) = s * N(T[j], r);
                    sys(m - 1, j) = 1.0;  // coefficients sum to one
                }
                Eigen::FullPivLU<Matrix> lu(sys);
                if (!lu.isInvertible()) continue;
                Vector t = lu.solve(rhs);
                if ((t.array() < -1e-10).any()) continue;
                Vector v = Vector::Zero(d);
                for (int j = 0; j < m; ++j) {
                    const double s = (j == 0) ? 1.0 : (((signs >> (j - 1)) & 1) ? 1.0 : -1.0);
                    v[T[j]] = s * t[j];
                }
                if (U.membership_residual(v) < 1e-8) {
                    const double n = v.lpNorm<1>();
                    out.push_back(v / n);
                }
            }
        });
        return out;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Distance to a subspace
// ---------------------------------------------------------------------------

namespace {

void k_subsets(int d, int k, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        visit(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == d - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// Exact l1 regression min_c |v - F c|_1 by enumerating basic solutions.
std::pair<double, Vector> l1_regression(const Vector& v, const Matrix& F) {
    const int d = static_cast<int>(F.rows());
    const int k = static_cast<int>(F.cols());
    double best = (v - F * (F.transpose() * v)).lpNorm<1>();
    Vector best_c = F.transpose() * v;
    k_subsets(d, k, [&](const std::vector<int>& Z) {
        Matrix FZ(k, k);
        Vector vZ(k);
        for (int i = 0; i < k; ++i) {
            FZ.row(i) = F.row(Z[i]);
            vZ[i] = v[Z[i]];
        }
        Eigen::FullPivLU<Matrix> lu(FZ);
        if (!lu.isInvertible()) return;
        Vector c = lu.solve(vZ);
        double val = (v - F * c).lpNorm<1>();
        if (val < best) {
            best = val;
            best_c = c;
        }
    });
    return {best, best_c};
}

// Exact Chebyshev regression min_c max_i |v_i - (F c)_i| by enumerating
// equioscillation vertices.
std::pair<double, Vector> linf_regression(const Vector& v, const Matrix& F) {
    const int d = static_cast<int>(F.rows());
    const int k = static_cast<int>(F.cols());
    double best = (v - F * (F.transpose() * v)).lpNorm<Eigen::Infinity>();
    Vector best_c = F.transpose() * v;
    if (k + 1 > d) {  // F spans the whole space in the generic case
        Vector c = F.colPivHouseholderQr().solve(v);
        double val = (v - F * c).lpNorm<Eigen::Infinity>();
        if (val < best) return {val, c};
        return {best, best_c};
    }
    const int m = k + 1;
    Matrix sys(m, m);
    Vector rhs(m);
    k_subsets(d, m, [&](const std::vector<int>& S) {
        for (std::uint64_t signs = 0; signs < (1ULL << (m - 1)); ++signs) {
            for (int i = 0; i < m; ++i) {
                sys.row(i).head(k) = F.row(S[i]);
                double s = (i == 0) ? 1.0 : ((signs >> (i - 1)) & 1 ? 1.0 : -1.0);
                sys(i, k) = s;
                rhs[i] = v[S[i]];
            }
            Eigen::FullPivLU<Matrix> lu(sys);
            if (!lu.isInvertible()) continue;
            Vector sol = lu.solve(rhs);
            Vector c = sol.head(k);
            double val = (v - F * c).lpNorm<Eigen::Infinity>();
            if (val < best) {
                best = val;
                best_c = c;
            }
        }
    });
    return {best, best_c};
}

}  // namespace

std::pair<double, Vector> dist_to_subspace_argmin(const AmbientSpace& space, const Vector& v,
                                                  const Subspace& F) {
    const Matrix& B = F.basis();
    const int k = F.dim();
    if (k == 0) return {space.norm_of(v), Vector(0)};

    Vector c_ls = B.transpose() * v;  // coordinate-orthogonal projection
    if (space.euclidean()) return {(v - B * c_ls).norm(), c_ls};

    const NormKind kind = space.norm.kind();
    if (kind == NormKind::lp && space.norm.p() == 1.0) return l1_regression(v, B);
    if (kind == NormKind::linf) return linf_regression(v, B);

    auto g = [&](const Vector& c) { return space.norm_of(v - B * c); };
    opt::NelderMeadOptions nm;
    nm.max_iter = 350;
    nm.x_tol = 1e-12;
    nm.init_step = 0.3 * std::max(1.0, c_ls.norm());
    Vector c = c_ls;
    double val = opt::nelder_mead(g, c, nm);
    // Second pass with a tighter simplex polishes nonsmooth kinks.
    nm.init_step = 1e-4 * std::max(1.0, c.norm());
    double val2 = opt::nelder_mead(g, c, nm);
    return {std::min(val, val2), c};
}

double dist_to_subspace(const AmbientSpace& space, const Vector& v, const Subspace& F) {
    return dist_to_subspace_argmin(space, v, F).first;
}

// ---------------------------------------------------------------------------
// Angles, gaps, Hausdorff distance
// ---------------------------------------------------------------------------

namespace {

// Euclidean residual factor (I - Q_V Q_V^T) Q_U for closed-form angles.
Matrix residual_factor(const Subspace& U, const Subspace& V) {
    return U.basis() - V.basis() * (V.basis().transpose() * U.basis());
}

// min over unit v in V of |u - v| (distance to the unit *sphere* of V).
double dist_to_unit_sphere(const AmbientSpace& space, const Vector& u, const Subspace& V,
                           RngStream rng) {
    if (space.euclidean()) {
        Vector p = V.basis().transpose() * u;
        const double np = p.norm();
        if (np < 1e-14) return std::sqrt(2.0);  // all unit v equidistant
        Vector vstar = V.basis() * (p / np);
        return (u - vstar).norm();
    }
    const Matrix& B = V.basis();
    auto g = [&](const Vector& c) {
        Vector w = B * c;
        const double n = space.norm_of(w);
        if (!(n > 1e-300)) return kInf;
        return space.norm_of(u - w / n);
    };
    auto [d0, c0] = dist_to_subspace_argmin(space, u, V);
    Vector c = c0.norm() > 1e-12 ? Vector(c0 / c0.norm()) : Vector(Vector::Ones(V.dim()));
    opt::NelderMeadOptions nm;
    nm.max_iter = 110;
    nm.x_tol = 1e-11;
    nm.init_step = 0.2;
    double best = opt::nelder_mead(g, c, nm);
    Vector ce = V.basis().transpose() * u;  // euclidean projection direction
    if (ce.norm() > 1e-12 && (ce / ce.norm() - c).norm() > 1e-9) {
        ce /= ce.norm();
        best = std::min(best, opt::nelder_mead(g, ce, nm));
    }
    if (V.dim() > 1) {
        Vector cr = rng.direction(V.dim());
        best = std::min(best, opt::nelder_mead(g, cr, nm));
    }
    return std::min(best, d0 <= best ? best : best);
}

}  // namespace

AngleResult min_angle(const AmbientSpace& space, const Subspace& E, const Subspace& F,
                      const OptBudget& budget, std::uint64_t seed, const Tolerances& tol) {
    if (E.dim() == 0) throw PreconditionError("empty subspace");
    double s;
    if (F.dim() == 0) {
        s = 1.0;  // no directions to lean towards
    } else if (space.euclidean()) {
        Eigen::JacobiSVD<Matrix> svd(residual_factor(E, F));
        s = svd.singularValues()[E.dim() - 1];
    } else {
        auto f = [&](const Vector& e) { return dist_to_subspace(space, e, F); };
        Eigen::JacobiSVD<Matrix> esvd(residual_factor(E, F), Eigen::ComputeFullV);
        std::vector<Vector> hints = {
            Vector(E.basis() * esvd.matrixV().col(E.dim() - 1))};
        s = sphere_minimize(space, E.basis(), f, budget, RngStream(seed, 11), hints).value;
    }
    s = std::clamp(s, 0.0, 1.0);
    AngleResult out;
    out.sin_theta = s;
    out.proj_norm = s > tol.tau_angle ? 1.0 / s : kInf;
    return out;
}

double gap(const AmbientSpace& space, const Subspace& U, const Subspace& V,
           const OptBudget& budget, std::uint64_t seed) {
    if (U.dim() == 0) throw PreconditionError("empty subspace");
    if (V.dim() == 0) {
        auto f = [&](const Vector& u) { return space.norm_of(u); };
        return sphere_maximize(space, U.basis(), f, budget, RngStream(seed, 13)).value;
    }
    if (space.euclidean()) {
        Eigen::JacobiSVD<Matrix> svd(residual_factor(U, V));
        return std::min(1.0, svd.singularValues()[0]);
    }
    auto f = [&](const Vector& u) { return dist_to_subspace(space, u, V); };
    // The gap objective is convex, so over polyhedral balls the sup sits at
    // a vertex of the section polytope: enumerate and evaluate exactly.
    std::vector<Vector> verts = section_ball_vertices(space, U);
    Eigen::JacobiSVD<Matrix> esvd(residual_factor(U, V), Eigen::ComputeFullV);
    Vector hint = U.basis() * esvd.matrixV().col(0);
    if (!verts.empty()) {
        double best = f(hint / space.norm_of(hint));
        for (const Vector& v : verts) best = std::max(best, f(v));
        return best;
    }
    std::vector<Vector> hints = {hint};
    return sphere_maximize(space, U.basis(), f, budget, RngStream(seed, 13), hints).value;
}

double hausdorff(const AmbientSpace& space, const Subspace& U, const Subspace& V,
                 const OptBudget& budget, std::uint64_t seed) {
    if (U.dim() == 0 || V.dim() == 0) throw PreconditionError("empty subspace");
    if (space.euclidean()) {
        // d(u, S_V) = sqrt(2 - 2 sqrt(1 - delta^2)) is monotone in the
        // subspace distance delta, so the sups coincide with the gaps.
        const double g1 = gap(space, U, V), g2 = gap(space, V, U);
        auto chord = [](double g) { return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(std::max(0.0, 1.0 - g * g)))); };
        return std::max(chord(g1), chord(g2));
    }
    RngStream rng(seed, 29);
    auto side = [&](const Subspace& A, const Subspace& B, std::uint64_t tag) {
        auto f = [&](const Vector& a) {
            return dist_to_unit_sphere(space, a, B, rng.fork(tag));
        };
        Eigen::JacobiSVD<Matrix> esvd(residual_factor(A, B), Eigen::ComputeFullV);
        std::vector<Vector> hints = {Vector(A.basis() * esvd.matrixV().col(0))};
        // The subspace-gap maximizers bound d_H from below pointwise; feed
        // the best section vertices into the sphere search.
        std::vector<Vector> verts = section_ball_vertices(space, A);
        if (!verts.empty()) {
            std::vector<std::pair<double, int>> scored;
            for (int i = 0; i < static_cast<int>(verts.size()); ++i)
                scored.emplace_back(dist_to_subspace(space, verts[i], B), i);
            std::sort(scored.rbegin(), scored.rend());
            for (int i = 0; i < std::min<int>(4, scored.size()); ++i)
                hints.push_back(verts[scored[i].second]);
        }
        return sphere_maximize(space, A.basis(), f, budget, RngStream(seed, tag), hints)
            .value;
    };
    return std::max(side(U, V, 31), side(V, U, 37));
}

// ---------------------------------------------------------------------------
// Operator norms
// ---------------------------------------------------------------------------

OperatorNormResult operator_norm(const AmbientSpace& space, const OperatorMatrix& A,
                                 const OptBudget& budget, std::uint64_t seed) {
    const int d = space.dim;
    OperatorNormResult out;
    if (space.euclidean()) {
        Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinV);
        out.value = svd.singularValues()[0];
        out.argmax = svd.matrixV().col(0);
        out.exact = true;
        return out;
    }
    const NormKind kind = space.norm.kind();
    if (kind == NormKind::lp && space.norm.p() == 1.0) {
        int jbest = 0;
        double best = -1.0;
        for (int j = 0; j < d; ++j) {
            double v = A.col(j).lpNorm<1>();
            if (v > best) {
                best = v;
                jbest = j;
            }
        }
        out.value = best;
        out.argmax = Vector::Unit(d, jbest);
        out.exact = true;
        return out;
    }
    if (kind == NormKind::linf) {
        int ibest = 0;
        double best = -1.0;
        for (int i = 0; i < d; ++i) {
            double v = A.row(i).lpNorm<1>();
            if (v > best) {
                best = v;
                ibest = i;
            }
        }
        out.value = best;
        out.argmax = A.row(ibest).transpose().array().sign().matrix();
        for (int i = 0; i < d; ++i)
            if (out.argmax[i] == 0.0) out.argmax[i] = 1.0;
        out.exact = true;
        return out;
    }
    auto f = [&](const Vector& v) { return space.norm_of(A * v); };
    SphereOptResult r =
        sphere_maximize(space, Matrix::Identity(d, d), f, budget, RngStream(seed, 41));
    out.value = r.value;
    out.argmax = r.point;
    out.exact = false;
    return out;
}

OperatorNormResult restricted_operator_norm(const AmbientSpace& space, const OperatorMatrix& A,
                                            const Subspace& R, const OptBudget& budget,
                                            std::uint64_t seed) {
    OperatorNormResult out;
    if (R.dim() == 0) {
        out.value = 0.0;
        out.exact = true;
        return out;
    }
    if (space.euclidean()) {
        Eigen::JacobiSVD<Matrix> svd(Matrix(A * R.basis()), Eigen::ComputeThinV);
        out.value = svd.singularValues()[0];
        out.argmax = R.basis() * svd.matrixV().col(0);
        out.exact = true;
        return out;
    }
    auto f = [&](const Vector& v) { return space.norm_of(A * v); };
    std::vector<Vector> verts = section_ball_vertices(space, R);
    if (!verts.empty()) {  // convex objective: the sup sits at a vertex
        out.value = 0.0;
        for (const Vector& v : verts) {
            const double val = f(v);
            if (val > out.value) {
                out.value = val;
                out.argmax = v;
            }
        }
        out.exact = true;
        return out;
    }
    SphereOptResult r = sphere_maximize(space, R.basis(), f, budget, RngStream(seed, 43));
    out.value = r.value;
    out.argmax = r.point;
    out.exact = false;
    return out;
}

// ---------------------------------------------------------------------------
// Auerbach-type complements
// ---------------------------------------------------------------------------

namespace {

// Norming functional of a unit vector e: phi(e) = 1, |phi|_* = 1.  Closed
// form at smooth points (gradient of the norm) and for l1/linf.
Vector norming_functional(const AmbientSpace& space, const Vector& e) {
    const int d = space.dim;
    const NormKind kind = space.norm.kind();
    if (kind == NormKind::euclidean) return e / e.squaredNorm() * e.norm();
    if (kind == NormKind::lp && space.norm.p() == 1.0) {
        Vector phi(d);
        for (int i = 0; i < d; ++i) phi[i] = e[i] > 0 ? 1.0 : (e[i] < 0 ? -1.0 : 0.0);
        return phi / phi.dot(e);
    }
    if (kind == NormKind::linf) {
        int istar = 0;
        e.array().abs().maxCoeff(&istar);
        Vector phi = Vector::Zero(d);
        phi[istar] = e[istar] > 0 ? 1.0 : -1.0;
        return phi / phi.dot(e);
    }
    if (kind == NormKind::lp || kind == NormKind::weighted_lp) {
        const double p = space.norm.p();
        const double n = space.norm_of(e);
        Vector phi(d);
        for (int i = 0; i < d; ++i) {
            double w = kind == NormKind::weighted_lp ? space.norm.weights()[i] : 1.0;
            double ai = std::abs(e[i]);
            phi[i] = w * (e[i] >= 0 ? 1.0 : -1.0) * std::pow(ai, p - 1.0) /
                     std::pow(n, p - 1.0);
        }
        return phi / phi.dot(e);
    }
    // Custom norm: finite-difference gradient, then rescale.
    const double h = 1e-6;
    Vector phi(d);
    for (int i = 0; i < d; ++i) {
        Vector ep = e, em = e;
        ep[i] += h;
        em[i] -= h;
        phi[i] = (space.norm_of(ep) - space.norm_of(em)) / (2 * h);
    }
    double s = phi.dot(e);
    if (std::abs(s) < 1e-12) return e;  // degenerate; caller measures quality
    return phi / s;
}

// Measured projection norm of P (lower bound).
double projection_norm(const AmbientSpace& space, const Matrix& P, const OptBudget& budget,
                       std::uint64_t seed) {
    if (space.euclidean()) return Eigen::JacobiSVD<Matrix>(P).singularValues()[0];
    auto f = [&](const Vector& v) { return space.norm_of(P * v); };
    return sphere_maximize(space, Matrix::Identity(space.dim, space.dim), f, budget,
                           RngStream(seed, 47))
        .value;
}

// Maximal-coordinate-volume basis of E with ambient-unit vectors.
Matrix auerbach_vectors(const AmbientSpace& space, const Subspace& E, RngStream rng) {
    const int q = E.dim();
    const Matrix& B = E.basis();
    auto unit_cols = [&](const Matrix& Y) {
        Matrix W(q, q);
        for (int j = 0; j < q; ++j) {
            Vector amb = B * Y.col(j);
            const double n = space.norm_of(amb);
            W.col(j) = Y.col(j) / (n > 1e-300 ? n : 1.0);
        }
        return W;
    };
    auto objective = [&](const Vector& y) {
        Matrix Y = Eigen::Map<const Matrix>(y.data(), q, q);
        Matrix W = unit_cols(Y);
        double det = W.determinant();
        return -std::log(std::abs(det) + 1e-300);
    };
    opt::NelderMeadOptions nm;
    nm.max_iter = 240 * q;
    nm.x_tol = 1e-10;
    nm.init_step = 0.4;

    double best = kInf;
    Matrix best_Y = Matrix::Identity(q, q);
    for (int s = 0; s < 3; ++s) {
        Matrix Y0 = Matrix::Identity(q, q);
        if (s > 0)
            for (int r = 0; r < q; ++r)
                for (int c = 0; c < q; ++c) Y0(r, c) = rng.gaussian();
        Vector y = Eigen::Map<Vector>(Y0.data(), q * q);
        double v = opt::nelder_mead(objective, y, nm);
        if (v < best) {
            best = v;
            best_Y = Eigen::Map<Matrix>(y.data(), q, q);
        }
    }
    Matrix Wc = unit_cols(best_Y);
    return B * Wc;  // ambient-unit vectors spanning E
}

// Minimal-dual-norm extension of the coordinate functionals of W.
Matrix norming_extension(const AmbientSpace& space, const Matrix& W) {
    const int d = space.dim;
    const int q = static_cast<int>(W.cols());
    Matrix WtW = W.transpose() * W;
    Matrix Phi0 = WtW.ldlt().solve(W.transpose());  // least-euclidean extension
    if (space.euclidean() || !space.norm.has_closed_dual()) return Phi0;

    const NormSpec dual = space.norm.dual();
    Matrix N = Subspace(W).annihilator_basis();  // d x (d-q)
    if (N.cols() == 0) return Phi0;
    Matrix Phi(q, d);
    for (int i = 0; i < q; ++i) {
        Vector phi0 = Phi0.row(i).transpose();
        auto g = [&](const Vector& y) { return dual(Vector(phi0 + N * y)); };
        Vector y = Vector::Zero(N.cols());
        opt::NelderMeadOptions nm;
        nm.max_iter = 260;
        nm.x_tol = 1e-11;
        nm.init_step = 0.3 * std::max(1.0, phi0.norm());
        opt::nelder_mead(g, y, nm);
        Phi.row(i) = (phi0 + N * y).transpose();
    }
    // Re-enforce Phi W = I against optimizer drift.
    Matrix C = Phi * W;
    return C.fullPivLu().solve(Phi);
}

}  // namespace

Splitting auerbach_complement(const AmbientSpace& space, const Subspace& E,
                              const OptBudget& budget, std::uint64_t seed,
                              const Tolerances& tol) {
    const int d = space.dim, q = E.dim();
    if (q == 0) throw PreconditionError("empty subspace");
    if (q == d) {
        Subspace zero(Matrix(d, 0));
        return Splitting{E, zero, Matrix::Identity(d, d), 1.0, true};
    }
    RngStream rng(seed, 53);

    struct Candidate {
        Matrix P;
        double norm;
    };
    std::vector<Candidate> cands;

    auto add_candidate = [&](const Matrix& Phi, const Matrix& W) {
        Matrix C = Phi * W;
        Eigen::FullPivLU<Matrix> lu(C);
        if (!lu.isInvertible()) return;
        Matrix Phi_fixed = lu.solve(Phi);
        Matrix P = W * Phi_fixed;
        cands.push_back({P, projection_norm(space, P, budget, rng.next_u64())});
    };

    if (q == 1) {
        Vector e = E.basis().col(0) / space.norm_of(E.basis().col(0));
        Matrix W = e;
        Matrix Phi = norming_functional(space, e).transpose();
        add_candidate(Phi, W);
    } else {
        Matrix W = auerbach_vectors(space, E, rng.fork(1));
        add_candidate(norming_extension(space, W), W);
    }
    // Coordinate-orthogonal fallback (exact for the euclidean norm).
    add_candidate(E.basis().transpose(), E.basis());

    int best = 0;
    for (int i = 1; i < static_cast<int>(cands.size()); ++i)
        if (cands[i].norm < cands[best].norm) best = i;

    const double target = std::sqrt(double(q)) + tol.eps_opt;
    if (cands[best].norm > target && !space.euclidean()) {
        // Local refinement of the measured projection norm over the choice
        // of kernel, parametrized as Phi = Phi_best + Y N^T.
        Matrix Pb = cands[best].P;
        Matrix W = E.basis();
        Matrix Phi_b = (W.transpose() * W).ldlt().solve(W.transpose() * Pb);
        Matrix N = E.annihilator_basis();
        const int kf = static_cast<int>(N.cols());
        OptBudget small = inner_budget();
        small.starts = 4;
        auto g = [&](const Vector& yv) {
            Matrix Y = Eigen::Map<const Matrix>(yv.data(), q, kf);
            Matrix Phi = Phi_b + Y * N.transpose();
            Matrix C = Phi * W;
            Eigen::FullPivLU<Matrix> lu(C);
            if (!lu.isInvertible()) return kInf;
            Matrix P = W * Matrix(lu.solve(Phi));
            return projection_norm(space, P, small, 977);
        };
        Vector y = Vector::Zero(q * kf);
        opt::NelderMeadOptions nm;
        nm.max_iter = 200;
        nm.x_tol = 1e-8;
        nm.init_step = 0.2;
        opt::nelder_mead(g, y, nm);
        Matrix Y = Eigen::Map<Matrix>(y.data(), q, kf);
        add_candidate(Phi_b + Y * N.transpose(), W);
        for (int i = 0; i < static_cast<int>(cands.size()); ++i)
            if (cands[i].norm < cands[best].norm) best = i;
    }

    const Matrix& P = cands[best].P;
    // Kernel of P carries the complement.
    Eigen::JacobiSVD<Matrix> svd(P, Eigen::ComputeFullV);
    Matrix Fbasis = svd.matrixV().rightCols(d - q);
    Splitting out{E, Subspace(Fbasis), P, cands[best].norm,
                  cands[best].norm <= target};
    return out;
}

// ---------------------------------------------------------------------------
// Preimage complements and perturbed splittings
// ---------------------------------------------------------------------------

Splitting preimage_complement(const AmbientSpace& space, const OperatorMatrix& A,
                              const Subspace& E1, const Subspace& F2, const Tolerances& tol) {
    const int d = space.dim, q = E1.dim();
    Matrix X = A * E1.basis();
    Eigen::JacobiSVD<Matrix> svdX(X, Eigen::ComputeThinU);
    if (!(svdX.singularValues()[q - 1] > tol.tau_rank_rel * svdX.singularValues()[0]))
        throw PreconditionError("degenerate restriction");
    Subspace E2(X, tol);
    if (E2.dim() + F2.dim() != d) throw PreconditionError("not a splitting");
    Splitting s2 = make_splitting(space, E2, F2, tol);  // throws if not a splitting

    // F1 = ker(Phi2 A) with Phi2 the annihilator functionals of F2.
    Matrix Phi2 = F2.annihilator_basis().transpose();  // q x d
    Matrix M = Phi2 * A;
    Eigen::JacobiSVD<Matrix> svdM(M, Eigen::ComputeFullV);
    Subspace F1(svdM.matrixV().rightCols(d - q), tol);

    // pi_{E1 || F1} = (A|_{E1})^{-1} pi_{E2 || F2} A.
    Matrix pinvX = (X.transpose() * X).ldlt().solve(X.transpose());
    Matrix P = E1.basis() * pinvX * s2.projection * A;
    double pn = projection_norm(space, P, inner_budget(), 0x9127);
    Splitting out{E1, F1, std::move(P), pn, true};
    if (splitting_residual(out) > tol.tau_proj * std::max(1.0, pn))
        throw PreconditionError("not a splitting");
    return out;
}

PerturbedSplittingResult perturbed_splitting(const AmbientSpace& space, const Subspace& E,
                                             const Subspace& Eprime, const Subspace& F,
                                             const OptBudget& budget, std::uint64_t seed,
                                             const Tolerances& tol) {
    PerturbedSplittingResult out;
    out.sin_theta = min_angle(space, E, F, budget, seed, tol).sin_theta;
    out.dist = hausdorff(space, E, Eprime, budget, seed + 1);
    if (!(out.dist < out.sin_theta))
        throw PreconditionError("perturbation exceeds the splitting angle");

    const int d = space.dim;
    Matrix M(d, Eprime.dim() + F.dim());
    M << Eprime.basis(), F.basis();
    Eigen::JacobiSVD<Matrix> svd(M);
    out.is_splitting =
        M.cols() == d &&
        svd.singularValues()[d - 1] > tol.tau_rank_rel * svd.singularValues()[0];
    out.graph_norm_bound = 2.0 * out.dist / (out.sin_theta - out.dist);
    if (out.is_splitting) {
        Splitting sF = make_splitting(space, F, Eprime, tol);  // pi_{F || E'}
        if (space.euclidean()) {
            out.measured =
                Eigen::JacobiSVD<Matrix>(Matrix(sF.projection * E.basis())).singularValues()[0];
        } else {
            auto f = [&](const Vector& e) { return space.norm_of(sF.projection * e); };
            out.measured =
                sphere_maximize(space, E.basis(), f, budget, RngStream(seed, 59)).value;
        }
    }
    return out;
}

Subspace random_subspace(int ambient_dim, int q, RngStream& rng) {
    Matrix B(ambient_dim, q);
    for (int j = 0; j < q; ++j) B.col(j) = rng.gaussian_vector(ambient_dim);
    return Subspace(std::move(B));
}

}  // namespace metvol
