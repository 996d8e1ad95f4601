#include "metvol/met.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "metvol/optimize.hpp"

namespace metvol {

// ---------------------------------------------------------------------------
// Frame propagation
// ---------------------------------------------------------------------------

namespace {

struct StepQR {
    Matrix Q;        // orthonormal frame after the step
    Vector logdiag;  // log |R_ii| per column
    int dead_col;    // first column with a vanished pivot, -1 if none
};

StepQR step_qr(const Matrix& T, const Matrix& B) {
    const int q = static_cast<int>(B.cols());
    Matrix X = T * B;
    Eigen::HouseholderQR<Matrix> qr(X);
    StepQR out;
    out.Q = qr.householderQ() * Matrix::Identity(X.rows(), q);
    Matrix R = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
    out.logdiag.resize(q);
    double rmax = 0.0;
    for (int i = 0; i < q; ++i) rmax = std::max(rmax, std::abs(R(i, i)));
    out.dead_col = -1;
    for (int i = 0; i < q; ++i) {
        const double r = std::abs(R(i, i));
        if (r <= 1e-13 * rmax || rmax == 0.0) {
            if (out.dead_col < 0) out.dead_col = i;
            out.logdiag[i] = -kInf;
        } else {
            out.logdiag[i] = std::log(r);
        }
    }
    return out;
}

struct FramePropagation {
    Matrix frame;
    double log_det = 0.0;
    bool dead = false;
};

FramePropagation propagate_frame(const Trajectory& traj, Matrix frame, int from, int to) {
    FramePropagation out;
    for (int k = from; k < to; ++k) {
        StepQR s = step_qr(traj.op(k), frame);
        if (s.dead_col >= 0) {
            out.dead = true;
            out.log_det = -kInf;
            out.frame = s.Q;
            return out;
        }
        out.log_det += s.logdiag.sum();
        frame = s.Q;
    }
    out.frame = frame;
    return out;
}

Matrix random_frame(int d, int q, RngStream& rng) {
    Matrix Z(d, q);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < q; ++c) Z(r, c) = rng.gaussian();
    Eigen::HouseholderQR<Matrix> qr(Z);
    return qr.householderQ() * Matrix::Identity(d, q);
}

Matrix tangent_perturb(const Matrix& M, double step, RngStream& rng) {
    Matrix Z(M.rows(), M.cols());
    for (int r = 0; r < Z.rows(); ++r)
        for (int c = 0; c < Z.cols(); ++c) Z(r, c) = rng.gaussian();
    Matrix H = Z - M * (M.transpose() * Z);
    Eigen::HouseholderQR<Matrix> qr(Matrix(M + step * H));
    return qr.householderQ() * Matrix::Identity(M.rows(), M.cols());
}

double log_ball_volume_at(const AmbientSpace& sp, const Matrix& frame, std::uint64_t seed,
                          const Tolerances& tol) {
    const int q = static_cast<int>(frame.cols());
    if (q > tol.q_max) return 0.0;  // correction not evaluated at this size
    if (sp.euclidean()) return std::log(omega_q(q));
    VolumeEstimate v = unit_ball_volume(sp, Subspace(frame), {}, seed, tol);
    return std::log(v.value);
}

double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                           double* stderr_out) {
    const int n = static_cast<int>(xs.size());
    if (n < 2) {
        if (stderr_out) *stderr_out = kInf;
        return 0.0;
    }
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / std::max(sxx, 1e-300);
    if (stderr_out) {
        double ss = 0;
        for (int i = 0; i < n; ++i) {
            const double r = ys[i] - my - slope * (xs[i] - mx);
            ss += r * r;
        }
        *stderr_out = n > 2 ? std::sqrt(ss / ((n - 2) * std::max(sxx, 1e-300))) : kInf;
    }
    return slope;
}

}  // namespace

// ---------------------------------------------------------------------------
// Growth ledger
// ---------------------------------------------------------------------------

double GrowthLedger::noise_estimate() const {
    double worst = 0.0;
    for (const auto& ch : channels) {
        if (ch.dead || static_cast<int>(ch.increments.size()) < 20) continue;
        const int half = static_cast<int>(ch.increments.size()) / 2;
        double m = 0.0;
        for (std::size_t i = half; i < ch.increments.size(); ++i) m += ch.increments[i];
        const int cnt = static_cast<int>(ch.increments.size()) - half;
        m /= cnt;
        double var = 0.0;
        for (std::size_t i = half; i < ch.increments.size(); ++i)
            var += (ch.increments[i] - m) * (ch.increments[i] - m);
        var /= std::max(cnt - 1, 1);
        worst = std::max(worst, std::sqrt(var / cnt));
    }
    return worst;
}

GrowthLedger growth_rates(const Trajectory& traj, int q_max, int N, const GrowthOptions& opts,
                          std::uint64_t seed, const Tolerances& tol) {
    const int d = traj.dim();
    q_max = std::min(q_max, d);
    if (q_max < 1) throw PreconditionError("growth_rates needs q_max >= 1");
    RngStream rng(seed, 0x9e0);

    struct StartState {
        Matrix initial, frame;
        std::vector<std::vector<double>> increments;  // per q
        std::vector<double> cum;
        std::vector<int> dead_at;
    };

    std::vector<StartState> runs;
    for (int s = 0; s < std::max(1, opts.n_starts); ++s) {
        StartState st;
        if (s == 0) {
            st.initial = Matrix::Identity(d, d).leftCols(q_max);
        } else {
            st.initial = random_frame(d, q_max, rng);
        }
        st.frame = st.initial;
        st.increments.assign(q_max, {});
        st.cum.assign(q_max, 0.0);
        st.dead_at.assign(q_max, -1);
        runs.push_back(std::move(st));
    }

    for (auto& st : runs) {
        RngStream local = rng.fork(static_cast<std::uint64_t>(&st - runs.data()));
        std::vector<double> weighted_inc;  // drives the re-ascent noise gate
        weighted_inc.reserve(N);
        for (int k = 0; k < N; ++k) {
            if (opts.reopt_every > 0 && k > 0 && k % opts.reopt_every == 0 &&
                k + opts.reopt_window <= N && weighted_inc.size() >= 10) {
                // Local re-ascent on the remaining-window growth, weighting
                // the leading columns by how many channels they feed.  A
                // proposal is taken only when it beats the current frame
                // beyond the window's noise level: greedy acceptance would
                // inflate the rates on degenerate spectra.
                auto window_score = [&](const Matrix& F0) {
                    Matrix F = F0;
                    double sc = 0.0;
                    for (int w = 0; w < opts.reopt_window; ++w) {
                        StepQR s = step_qr(traj.op(k + w), F);
                        for (int i = 0; i < q_max; ++i) {
                            if (st.dead_at[i] >= 0) continue;
                            const double li = s.logdiag[i];
                            sc += (li == -kInf ? -1e6 : li) * (q_max - i);
                        }
                        F = s.Q;
                    }
                    return sc;
                };
                const std::size_t lookback = std::min<std::size_t>(50, weighted_inc.size());
                double mean = 0.0, var = 0.0;
                for (std::size_t i = weighted_inc.size() - lookback;
                     i < weighted_inc.size(); ++i)
                    mean += weighted_inc[i];
                mean /= lookback;
                for (std::size_t i = weighted_inc.size() - lookback;
                     i < weighted_inc.size(); ++i)
                    var += (weighted_inc[i] - mean) * (weighted_inc[i] - mean);
                var /= std::max<std::size_t>(lookback - 1, 1);
                const double gate =
                    3.0 * std::sqrt(var * 2.0 * opts.reopt_window) + 1e-9;

                double cur = window_score(st.frame);
                for (int p = 0; p < opts.reopt_proposals; ++p) {
                    Matrix cand = tangent_perturb(st.frame, 0.2, local);
                    const double sc = window_score(cand);
                    if (sc > cur + gate) {
                        cur = sc;
                        st.frame = cand;
                    }
                }
            }
            StepQR s = step_qr(traj.op(k), st.frame);
            double prefix = 0.0, weighted = 0.0;
            for (int q = 1; q <= q_max; ++q) {
                const double li = s.logdiag[q - 1];
                if (li != -kInf && st.dead_at[q - 1] < 0)
                    weighted += li * (q_max - q + 1);
                prefix = (li == -kInf) ? -kInf : prefix + li;
                if (st.dead_at[q - 1] >= 0) continue;
                if (prefix == -kInf) {
                    st.dead_at[q - 1] = k;
                    continue;
                }
                st.cum[q - 1] += prefix;
                st.increments[q - 1].push_back(prefix);
            }
            weighted_inc.push_back(weighted);
            st.frame = s.Q;
        }
    }

    GrowthLedger ledger;
    ledger.n = N;
    ledger.channels.resize(q_max);
    for (int q = 1; q <= q_max; ++q) {
        int best = -1;
        double best_rate = -kInf;
        for (int s = 0; s < static_cast<int>(runs.size()); ++s) {
            if (runs[s].dead_at[q - 1] >= 0) continue;
            const double r = runs[s].cum[q - 1] / N;
            if (r > best_rate) {
                best_rate = r;
                best = s;
            }
        }
        GrowthChannel& ch = ledger.channels[q - 1];
        if (best < 0) {  // every start hit a vanished increment
            int first_dead = N;
            int src = 0;
            for (int s = 0; s < static_cast<int>(runs.size()); ++s)
                if (runs[s].dead_at[q - 1] >= 0 && runs[s].dead_at[q - 1] < first_dead) {
                    first_dead = runs[s].dead_at[q - 1];
                    src = s;
                }
            ch.dead = true;
            ch.dead_at = first_dead;
            ch.rate = -kInf;
            ch.increments = runs[src].increments[q - 1];
            ch.initial_frame = runs[src].initial.leftCols(q);
            ch.final_frame = runs[src].frame.leftCols(q);
            continue;
        }
        const StartState& st = runs[best];
        ch.increments = st.increments[q - 1];
        ch.cum = st.cum[q - 1];
        ch.initial_frame = st.initial.leftCols(q);
        ch.final_frame = st.frame.leftCols(q);
        if (opts.endpoint_volumes) {
            const double v0 =
                log_ball_volume_at(traj.space_of(0), ch.initial_frame, seed ^ 0xe0, tol);
            const double vn =
                log_ball_volume_at(traj.space_of(N), ch.final_frame, seed ^ 0xe1, tol);
            ch.endpoint_correction = v0 - vn;
        }
        ch.rate = (ch.cum + ch.endpoint_correction) / N;
    }
    return ledger;
}

// ---------------------------------------------------------------------------
// Exponent spectrum
// ---------------------------------------------------------------------------

ExponentReport exponent_spectrum(const std::vector<double>& l, double noise_estimate,
                                 const Tolerances& tol) {
    ExponentReport rep;
    rep.l = l;
    rep.noise = noise_estimate;
    rep.tau_cluster = std::max(5.0 * noise_estimate, tol.tau_cluster_floor);

    const int Q = static_cast<int>(l.size());
    rep.K.resize(Q);
    for (int q = 0; q < Q; ++q) {
        if (l[q] == -kInf)
            rep.K[q] = -kInf;
        else
            rep.K[q] = q == 0 ? l[0] : l[q] - l[q - 1];
    }
    for (int q = 1; q < Q; ++q) {
        if (rep.K[q] == -kInf) continue;
        if (rep.K[q] > rep.K[q - 1] + 2.0 * std::max(noise_estimate, 1e-12))
            throw std::runtime_error("inconsistent growth ledger: increments not monotone");
    }

    int q = 0;
    while (q < Q) {
        if (rep.K[q] == -kInf) {
            rep.lambda.push_back(-kInf);
            rep.mult.push_back(Q - q);
            break;
        }
        double mean = rep.K[q];
        int count = 1;
        int j = q + 1;
        while (j < Q && rep.K[j] != -kInf && mean - rep.K[j] <= rep.tau_cluster) {
            mean = (mean * count + rep.K[j]) / (count + 1);
            ++count;
            ++j;
        }
        rep.lambda.push_back(mean);
        rep.mult.push_back(count);
        q = j;
    }
    rep.M.resize(rep.lambda.size());
    int acc = 0;
    for (std::size_t i = 0; i < rep.lambda.size(); ++i) {
        rep.M[i] = acc;
        acc += rep.mult[i];
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Fast subspaces
// ---------------------------------------------------------------------------

namespace {

double score_initial_frame(const Trajectory& traj, const Matrix& frame, int n,
                           const Tolerances& tol, Matrix* final_frame) {
    FramePropagation p = propagate_frame(traj, frame, 0, n);
    if (final_frame) *final_frame = p.frame;
    if (p.dead) return -kInf;
    double corr = 0.0;
    if (!traj.space.euclidean() || traj.space_at) {
        corr = log_ball_volume_at(traj.space_of(0), frame, 0xf0, tol) -
               log_ball_volume_at(traj.space_of(n), p.frame, 0xf1, tol);
    }
    return p.log_det + corr;
}

Matrix adjoint_start(const Trajectory& traj, int m, int n, RngStream& rng) {
    Matrix Z = random_frame(traj.dim(), m, rng);
    for (int k = n - 1; k >= 0; --k) {
        Matrix X = traj.op(k).transpose() * Z;
        Eigen::HouseholderQR<Matrix> qr(X);
        Matrix Q = qr.householderQ() * Matrix::Identity(X.rows(), m);
        // A vanished column means the adjoint pass lost rank; re-seed it.
        Matrix R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
        double rmax = 0.0;
        for (int i = 0; i < m; ++i) rmax = std::max(rmax, std::abs(R(i, i)));
        for (int i = 0; i < m; ++i) {
            if (rmax == 0.0 || std::abs(R(i, i)) <= 1e-13 * rmax) {
                Z = random_frame(traj.dim(), m, rng);
                break;
            }
            Z = Q;
        }
    }
    return Z;
}

}  // namespace

FastSubspaceResult fast_subspace(const Trajectory& traj, int m, int n, std::uint64_t seed,
                                 const std::optional<Subspace>& warm_start,
                                 const Tolerances& tol) {
    const int d = traj.dim();
    if (m > d) throw PreconditionError("fast subspace dimension beyond ambient");
    RngStream rng(seed, 0xfa5);

    std::vector<Matrix> candidates;
    if (warm_start) candidates.push_back(warm_start->basis());
    for (int s = 0; s < 2; ++s) candidates.push_back(adjoint_start(traj, m, n, rng));
    candidates.push_back(Matrix::Identity(d, d).leftCols(m));
    for (int s = 0; s < 2; ++s) candidates.push_back(random_frame(d, m, rng));

    double best = -kInf;
    Matrix best_frame;
    for (const auto& c : candidates) {
        const double v = score_initial_frame(traj, c, n, tol, nullptr);
        if (v > best) {
            best = v;
            best_frame = c;
        }
    }
    if (best == -kInf) throw PreconditionError("cocycle rank below m");

    // Tangent ascent from the best candidate.
    double step = 0.3;
    for (int it = 0; it < 24 && step > 1e-7; ++it) {
        Matrix cand = tangent_perturb(best_frame, step, rng);
        const double v = score_initial_frame(traj, cand, n, tol, nullptr);
        if (v > best) {
            best = v;
            best_frame = cand;
            step *= 1.4;
        } else {
            step *= 0.65;
        }
    }

    FastSubspaceResult out;
    out.E = Subspace(best_frame);
    out.log_det = best;
    out.best_known = best;
    out.certificate = out.log_det >= out.best_known - std::log(2.0);
    return out;
}

// ---------------------------------------------------------------------------
// Slow subspaces
// ---------------------------------------------------------------------------

SlowSubspaceResult slow_subspace(const Trajectory& traj, int m, int N, double delta,
                                 std::uint64_t seed, const Tolerances& tol) {
    const int d = traj.dim();
    if (m >= d) throw PreconditionError("slow subspace needs m < dim");
    RngStream rng(seed, 0x510);

    const int n_rates = std::min(N, 2000);
    GrowthLedger ledger =
        growth_rates(traj, m + 1, n_rates, GrowthOptions{}, rng.next_u64(), tol);
    const auto l = ledger.rates();
    if (l[m - 1] == -kInf) throw PreconditionError("cocycle rank below m");
    const double lambda_hi = l[m - 1] / m;
    const double lambda_lo = l[m] == -kInf ? -kInf : l[m] - l[m - 1];
    const double gap_width = lambda_hi - lambda_lo;
    if (!(gap_width > std::max(2.0 * ledger.noise_estimate(), tol.tau_cluster_floor)))
        throw PreconditionError("no spectral gap at level m");
    if (delta <= 0.0) delta = std::min(gap_width, 50.0) / 10.0;

    const bool plain_euclid = traj.space.euclidean() && !traj.space_at;
    const double tau_sub = tol.tau_sub(plain_euclid);
    const AmbientSpace space0 = traj.space_of(0);

    SlowSubspaceResult out;
    out.lambda_hi = lambda_hi;
    out.lambda_lo = lambda_lo;
    out.stopped_by = "budget";

    std::optional<Subspace> prev_F1;
    std::optional<Subspace> warm;
    int consecutive_small = 0;
    const int n_max = std::min(N, 250);

    for (int n = 1; n <= n_max; ++n) {
        FastSubspaceResult fast = fast_subspace(traj, m, n, rng.next_u64(), warm, tol);
        warm = fast.E;

        FramePropagation fwd = propagate_frame(traj, fast.E.basis(), 0, n);
        if (fwd.dead) throw PreconditionError("cocycle rank below m");
        Subspace E2(fwd.frame);
        Splitting comp =
            auerbach_complement(traj.space_of(n), E2, sweep_budget(), rng.next_u64(), tol);

        // F1 = kernel of (annihilator of F2) composed with T^n, computed by
        // an adjoint pass; row rescaling keeps the kernel intact.
        Matrix W = comp.F.annihilator_basis();  // d x m
        for (int k = n - 1; k >= 0; --k) {
            Matrix X = traj.op(k).transpose() * W;
            Eigen::HouseholderQR<Matrix> qr(X);
            W = qr.householderQ() * Matrix::Identity(d, m);
        }
        Subspace F1(Subspace(W).annihilator_basis());

        if (prev_F1) {
            const double dh = plain_euclid
                                  ? hausdorff(space0, *prev_F1, F1)
                                  : hausdorff(space0, *prev_F1, F1, sweep_budget(),
                                              rng.next_u64());
            out.ns.push_back(n - 1);
            out.cauchy_dh.push_back(dh);
            consecutive_small = dh < tau_sub ? consecutive_small + 1 : 0;
        }
        prev_F1 = F1;
        if (consecutive_small >= 3) {
            out.stopped_by = "cauchy";
            break;
        }
    }

    out.F_hat = *prev_F1;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < out.cauchy_dh.size(); ++i) {
        if (out.cauchy_dh[i] > 1e-13) {
            xs.push_back(out.ns[i]);
            ys.push_back(std::log(out.cauchy_dh[i]));
        }
    }
    out.slope_threshold = std::max(lambda_lo, lambda_hi - 50.0) - lambda_hi + delta;
    if (xs.size() < 4) {
        // The successive subspaces coincide to working precision; the decay
        // is below the measurement floor at every step.
        out.rate_slope = -kInf;
        out.cauchy_certified = true;
        return out;
    }
    double se = kInf;
    out.rate_slope = least_squares_slope(xs, ys, &se);
    out.cauchy_certified = out.rate_slope <= out.slope_threshold + 2.0 * std::min(se, 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// Restricted trajectories and the filtration
// ---------------------------------------------------------------------------

Trajectory restrict_trajectory(const Trajectory& traj, const Subspace& F0) {
    struct Cache {
        std::vector<Matrix> frames;
        std::vector<Matrix> ops;
    };
    auto cache = std::make_shared<Cache>();
    cache->frames.push_back(F0.basis());
    const int r = F0.dim();
    Trajectory parent = traj;

    auto ensure_ops = [cache, parent](int upto) {
        while (static_cast<int>(cache->ops.size()) <= upto) {
            const int i = static_cast<int>(cache->ops.size());
            Matrix X = parent.op(i) * cache->frames[i];
            Eigen::HouseholderQR<Matrix> qr(X);
            const int rr = static_cast<int>(X.cols());
            cache->frames.push_back(qr.householderQ() * Matrix::Identity(X.rows(), rr));
            cache->ops.push_back(
                Matrix(qr.matrixQR().topRows(rr).triangularView<Eigen::Upper>()));
        }
    };

    Trajectory out;
    out.length_budget = traj.length_budget;
    out.seed = traj.seed ^ 0x0f117;
    out.op = [cache, ensure_ops](int k) {
        ensure_ops(k);
        return cache->ops[k];
    };
    out.space_at = [cache, ensure_ops, parent, r](int k) {
        if (k > 0) ensure_ops(k - 1);
        Matrix frame = cache->frames[k];
        AmbientSpace psp = parent.space_of(k);
        auto oracle = [frame, psp](const Vector& c) { return psp.norm_of(frame * c); };
        return AmbientSpace(r, NormSpec::custom(oracle, "restricted"));
    };
    out.space = out.space_at(0);
    return out;
}

FiltrationResult filtration(const Trajectory& traj, int N, std::uint64_t seed,
                            const GrowthOptions& opts, const Tolerances& tol) {
    const int d = traj.dim();
    RngStream rng(seed, 0xf117);
    FiltrationResult out;

    const int q_cap = std::min(d, tol.q_max);
    out.ledger = growth_rates(traj, q_cap, N, opts, rng.next_u64(), tol);
    out.report = exponent_spectrum(out.ledger.rates(), out.ledger.noise_estimate(), tol);

    Trajectory current = traj;
    Matrix to_ambient = Matrix::Identity(d, d);
    int offset = 0;  // accumulated codimension M_{i+1}
    const int n_slow = std::min(N, 120);

    for (std::size_t level = 0; level < out.report.lambda.size(); ++level) {
        if (out.report.lambda[level] == -kInf) break;  // stops at the last finite level
        const int mi = out.report.mult[level];
        if (offset + mi >= d) break;  // no proper slow subspace remains
        const bool more_known =
            level + 1 < out.report.lambda.size();
        if (!more_known) break;

        SlowSubspaceResult slow =
            slow_subspace(current, mi, n_slow, 0.0, rng.next_u64(), tol);
        out.filtration.cauchy_log.push_back(slow.cauchy_dh);

        Matrix ambient_basis = to_ambient * slow.F_hat.basis();
        Subspace F_ambient(ambient_basis);
        out.filtration.subspaces.push_back(F_ambient);
        out.filtration.codims.push_back(d - F_ambient.dim());
        offset += mi;

        Trajectory restricted = restrict_trajectory(current, slow.F_hat);

        // Exponent extraction consistency: the restricted rates must match
        // the shifted rates of the base ledger.
        const int r = slow.F_hat.dim();
        const int q_check = std::min({r, q_cap - offset, 3});
        double residual = 0.0;
        if (q_check >= 1) {
            GrowthLedger sub =
                growth_rates(restricted, q_check, std::min(N, 800), opts, rng.next_u64(), tol);
            const auto lsub = sub.rates();
            const auto& lbase = out.report.l;
            for (int q = 1; q <= q_check; ++q) {
                if (offset + q > static_cast<int>(lbase.size())) break;
                const double base = lbase[offset + q - 1];
                const double ref = lbase[offset - 1];
                if (base == -kInf || ref == -kInf || lsub[q - 1] == -kInf) continue;
                residual = std::max(residual, std::abs(lsub[q - 1] - (base - ref)));
            }
            const double tol_level =
                std::max(0.15, 6.0 * (out.ledger.noise_estimate() + sub.noise_estimate()));
            if (residual > tol_level)
                throw std::runtime_error(
                    "filtration level mismatch between restricted and base growth ledgers");
        }
        out.level_residuals.push_back(residual);

        to_ambient = ambient_basis;
        current = restricted;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verification clauses
// ---------------------------------------------------------------------------

ConeGrowthResult cone_growth(const Trajectory& traj, const Subspace& F_hat, double eta, int N,
                             std::uint64_t seed, const Tolerances&) {
    if (!(eta > 0.0 && eta < 1.0)) throw PreconditionError("eta must lie in (0, 1)");
    const int d = traj.dim();
    const AmbientSpace space0 = traj.space_of(0);
    RngStream rng(seed, 0xc0e);

    const int target = 192;
    std::vector<Vector> samples;
    int tries = 0;
    while (static_cast<int>(samples.size()) < target && tries < 60 * target) {
        ++tries;
        Vector u = rng.direction(d);
        u /= space0.norm_of(u);
        if (dist_to_subspace(space0, u, F_hat) >= eta) samples.push_back(u);
    }
    if (static_cast<int>(samples.size()) < std::max(8, target / 16))
        throw PreconditionError("cone is empty at this eta");

    const int K = static_cast<int>(samples.size());
    Matrix W(d, K);
    for (int j = 0; j < K; ++j) W.col(j) = samples[j];
    Vector logscale = Vector::Zero(K);

    std::vector<int> schedule;
    for (int n = 1; n <= std::min(N, 12); ++n) schedule.push_back(n);
    const int stride = std::max(1, (N - 12) / 28);
    for (int n = 12 + stride; n <= N; n += stride) schedule.push_back(n);

    ConeGrowthResult out;
    std::size_t sched_pos = 0;
    for (int k = 0; k < N && sched_pos < schedule.size(); ++k) {
        W = traj.op(k) * W;
        for (int j = 0; j < K; ++j) {
            const double s = W.col(j).norm();
            if (s > 0) {
                W.col(j) /= s;
                logscale[j] += std::log(s);
            } else {
                logscale[j] = -kInf;
            }
        }
        const int n = k + 1;
        if (n == schedule[sched_pos]) {
            const AmbientSpace spn = traj.space_of(n);
            double mn = kInf;
            for (int j = 0; j < K; ++j) {
                const double ln = logscale[j] + std::log(spn.norm_of(W.col(j)));
                mn = std::min(mn, ln / n);
            }
            out.ns.push_back(n);
            out.min_rates.push_back(mn);
            ++sched_pos;
        }
    }

    if (!out.ns.empty()) {
        // Boundary-seeking polish at the final schedule point.
        const int n = out.ns.back();
        auto rate_at = [&](const Vector& v) {
            Vector w = v;
            double ls = 0.0;
            for (int k = 0; k < n; ++k) {
                w = traj.op(k) * w;
                const double s = w.norm();
                if (!(s > 0)) return kInf;  // rate -inf: excluded from the cone min
                w /= s;
                ls += std::log(s);
            }
            const double rate = (ls + std::log(traj.space_of(n).norm_of(w))) / n;
            const double slack = eta - dist_to_subspace(space0, v, F_hat);
            return rate + std::max(0.0, slack) * 50.0;
        };
        OptBudget small{4, 80, 1e-9, true};
        SphereOptResult polish = sphere_minimize(space0, Matrix::Identity(d, d), rate_at, small,
                                                 RngStream(seed, 0xc0f));
        if (polish.value < out.min_rates.back() &&
            dist_to_subspace(space0, polish.point, F_hat) >= eta - 1e-9)
            out.min_rates.back() = polish.value;
    }
    return out;
}

double complement_volume_growth(const Trajectory& traj, const Subspace& E,
                                const Subspace& F_next, int N, std::uint64_t seed,
                                const Tolerances& tol) {
    const int d = traj.dim();
    if (E.dim() + F_next.dim() != d) throw PreconditionError("not a complement");
    Matrix S(d, d);
    S << E.basis(), F_next.basis();
    Eigen::JacobiSVD<Matrix> svd(S);
    if (!(svd.singularValues()[d - 1] > tol.tau_rank_rel * svd.singularValues()[0]))
        throw PreconditionError("not a complement");

    FramePropagation p = propagate_frame(traj, E.basis(), 0, N);
    if (p.dead) return -kInf;
    double corr = log_ball_volume_at(traj.space_of(0), E.basis(), seed ^ 0xc1, tol) -
                  log_ball_volume_at(traj.space_of(N), p.frame, seed ^ 0xc2, tol);
    return (p.log_det + corr) / N;
}

ProjectionDecayResult projection_decay(const Trajectory& traj, const Subspace& E,
                                       const Subspace& F_hat, int N, std::uint64_t seed,
                                       const Tolerances& tol) {
    // Forward frames carry the splitting; a shadow copy of the slow frame,
    // perturbed at machine epsilon, monitors when rounding contamination
    // (growing at the spectral-gap rate) reaches the representation.  Values
    // are recorded only on the reliable window.
    ProjectionDecayResult out;
    const int d = traj.dim();
    RngStream rng(seed, 0xdec);

    Matrix BE = E.basis();
    Matrix BF = F_hat.basis();
    Matrix BFshadow = BF;
    for (int r = 0; r < BFshadow.rows(); ++r)
        for (int c = 0; c < BFshadow.cols(); ++c)
            BFshadow(r, c) += 1e-14 * rng.gaussian();
    BFshadow = Eigen::HouseholderQR<Matrix>(BFshadow).householderQ() *
               Matrix::Identity(d, F_hat.dim());

    std::vector<int> schedule;
    for (int n = 1; n <= std::min(N, 40); ++n) schedule.push_back(n);
    const int stride = std::max(1, (N - 40) / 25);
    for (int n = 40 + stride; n <= N; n += stride) schedule.push_back(n);

    auto advance = [&](Matrix& B, const Matrix& T) {
        B = Eigen::HouseholderQR<Matrix>(Matrix(T * B)).householderQ() *
            Matrix::Identity(d, static_cast<int>(B.cols()));
    };

    std::size_t pos = 0;
    for (int k = 0; k < N && pos < schedule.size(); ++k) {
        const Matrix T = traj.op(k);
        advance(BE, T);
        advance(BF, T);
        advance(BFshadow, T);
        const int n = k + 1;
        if (n != schedule[pos]) continue;
        ++pos;

        // Contamination monitor: once epsilon-scale noise has grown to O(1)
        // the propagated slow frame no longer represents T^n F.
        Eigen::JacobiSVD<Matrix> drift(
            Matrix(BF - BFshadow * (BFshadow.transpose() * BF)));
        if (drift.singularValues()[0] > 0.1) break;

        const AmbientSpace spn = traj.space_of(n);
        AngleResult ar = min_angle(spn, Subspace(BE), Subspace(BF), sweep_budget(),
                                   rng.next_u64(), tol);
        if (!(ar.sin_theta > tol.tau_angle)) {
            out.degenerate = true;
            break;
        }
        out.ns.push_back(n);
        out.log_proj_norms.push_back(std::log(ar.proj_norm));
    }
    std::vector<double> xs(out.ns.begin(), out.ns.end());
    out.slope = least_squares_slope(xs, out.log_proj_norms, nullptr);
    return out;
}

SublevelResult sublevel_convergence(const Trajectory& traj, const Subspace& F2, double lambda2,
                                    double delta, int N, std::uint64_t seed,
                                    const Tolerances&) {
    const int d = traj.dim();
    const AmbientSpace space0 = traj.space_of(0);
    RngStream rng(seed, 0x5b1);

    // Ambient directions probing the sublevel body and slow-slice directions.
    std::vector<Vector> dirs;
    for (int i = 0; i < 192; ++i) {
        Vector u = halton_direction(i * 7 + 1, d);
        dirs.push_back(u / space0.norm_of(u));
    }
    for (int i = 0; i < 32; ++i) {
        Vector u = rng.direction(d);
        dirs.push_back(u / space0.norm_of(u));
    }
    const int M1 = static_cast<int>(dirs.size());
    std::vector<Vector> slow_pts;
    for (int i = 0; i < 64; ++i) {
        Vector c = halton_direction(i * 3 + 2, F2.dim());
        Vector y = F2.basis() * c;
        slow_pts.push_back(y / space0.norm_of(y));
    }
    const int M2 = static_cast<int>(slow_pts.size());

    Matrix W(d, M1 + M2);
    for (int j = 0; j < M1; ++j) W.col(j) = dirs[j];
    for (int j = 0; j < M2; ++j) W.col(M1 + j) = slow_pts[j];
    Vector logscale = Vector::Zero(M1 + M2);

    std::vector<int> schedule;
    for (int n = 0; n <= std::min(N, 80); n += 2) schedule.push_back(n);
    const int stride = std::max(2, (N - 80) / 20);
    for (int n = 80 + stride; n <= N; n += stride) schedule.push_back(n);

    SublevelResult out;
    auto record = [&](int n) {
        const AmbientSpace spn = traj.space_of(n);
        const double log_c = n * (lambda2 + delta);

        std::vector<Vector> boundary(M1);
        std::vector<double> rho(M1);
        for (int j = 0; j < M1; ++j) {
            const double logTn =
                n == 0 ? 0.0 : logscale[j] + std::log(spn.norm_of(W.col(j)));
            rho[j] = std::exp(std::min(0.0, log_c - logTn));
            boundary[j] = rho[j] * dirs[j];
        }
        double supA = 0.0;
        for (int j = 0; j < M1; ++j) {
            auto [dist, c] = dist_to_subspace_argmin(space0, boundary[j], F2);
            double dj;
            Vector f = F2.basis() * c;
            const double nf = space0.norm_of(f);
            if (nf <= 1.0 + 1e-12) {
                dj = dist;
            } else {
                dj = space0.norm_of(boundary[j] - f / nf);
                // polish within the ball slice
                auto g = [&](const Vector& cc) {
                    Vector y = F2.basis() * cc;
                    const double ny = space0.norm_of(y);
                    if (ny > 1.0) y /= ny;
                    return space0.norm_of(boundary[j] - y);
                };
                Vector cc = c / nf;
                opt::NelderMeadOptions nm;
                nm.max_iter = 60;
                nm.init_step = 0.2;
                dj = std::min(dj, opt::nelder_mead(g, cc, nm));
            }
            supA = std::max(supA, dj);
        }
        double supB = 0.0;
        for (int j = 0; j < M2; ++j) {
            const double logTn =
                n == 0 ? 0.0 : logscale[M1 + j] + std::log(spn.norm_of(W.col(M1 + j)));
            const double rho_y = std::exp(std::min(0.0, log_c - logTn));
            double dj = std::max(0.0, 1.0 - rho_y);  // retreat along the ray
            for (int i = 0; i < M1; ++i)
                dj = std::min(dj, space0.norm_of(slow_pts[j] - boundary[i]));
            supB = std::max(supB, dj);
        }
        out.ns.push_back(n);
        out.d_h.push_back(std::max(supA, supB));
    };

    std::size_t pos = 0;
    if (!schedule.empty() && schedule[0] == 0) {
        record(0);
        ++pos;
    }
    for (int k = 0; k < N && pos < schedule.size(); ++k) {
        W = traj.op(k) * W;
        for (int j = 0; j < M1 + M2; ++j) {
            const double s = W.col(j).norm();
            if (s > 0) {
                W.col(j) /= s;
                logscale[j] += std::log(s);
            } else {
                logscale[j] = -kInf;
            }
        }
        if (k + 1 == schedule[pos]) {
            record(k + 1);
            ++pos;
        }
    }
    if (!out.d_h.empty()) out.final_value = out.d_h.back();
    return out;
}

double sublevel_hausdorff(const AmbientSpace& space, const OperatorMatrix& A,
                          const OperatorMatrix& B, double c, int directions,
                          std::uint64_t seed) {
    const int d = space.dim;
    RngStream rng(seed, 0x11b);
    std::vector<Vector> dirs;
    for (int i = 0; i < directions; ++i) {
        Vector u = i % 3 == 0 ? rng.direction(d) : halton_direction(i * 5 + 3, d);
        dirs.push_back(u / space.norm_of(u));
    }
    const int M = static_cast<int>(dirs.size());
    std::vector<double> rho_a(M), rho_b(M);
    std::vector<Vector> pa(M), pb(M);
    for (int i = 0; i < M; ++i) {
        rho_a[i] = std::min(1.0, c / space.norm_of(A * dirs[i]));
        rho_b[i] = std::min(1.0, c / space.norm_of(B * dirs[i]));
        pa[i] = rho_a[i] * dirs[i];
        pb[i] = rho_b[i] * dirs[i];
    }
    double worst = 0.0;
    for (int i = 0; i < M; ++i) {
        double da = std::abs(rho_a[i] - rho_b[i]);
        double db = da;
        for (int j = 0; j < M; ++j) {
            da = std::min(da, space.norm_of(pa[i] - pb[j]));
            db = std::min(db, space.norm_of(pb[i] - pa[j]));
        }
        worst = std::max(worst, std::max(da, db));
    }
    return worst;
}

}  // namespace metvol
