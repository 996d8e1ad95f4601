#include "metvol/cocycles.hpp"

#include <algorithm>
#include <cmath>

namespace metvol {

double ScalarLaw::sample(RngStream& rng) const {
    switch (kind) {
        case Kind::constant_value:
            return a;
        case Kind::two_point:
            return rng.uniform() < 0.5 ? a : b;
        case Kind::log_uniform:
            return std::exp(rng.uniform(std::log(a), std::log(b)));
    }
    return a;
}

double ScalarLaw::expected_log_abs() const {
    switch (kind) {
        case Kind::constant_value:
            return std::log(std::abs(a));
        case Kind::two_point:
            return 0.5 * (std::log(std::abs(a)) + std::log(std::abs(b)));
        case Kind::log_uniform:
            return 0.5 * (std::log(a) + std::log(b));
    }
    return 0.0;
}

const char* to_string(CocycleSpec::Kind k) {
    switch (k) {
        case CocycleSpec::Kind::constant: return "constant";
        case CocycleSpec::Kind::iid_diagonal: return "iid_diagonal";
        case CocycleSpec::Kind::iid_general: return "iid_general";
        case CocycleSpec::Kind::triangular: return "triangular";
        case CocycleSpec::Kind::rotation_driven: return "rotation_driven";
        case CocycleSpec::Kind::rank_deficient: return "rank_deficient";
    }
    return "?";
}

std::vector<std::string> cocycle_kind_names() {
    return {"constant",        "iid_diagonal", "iid_general",
            "triangular",      "rotation_driven", "rank_deficient"};
}

CocycleSpec CocycleSpec::constant_op(Matrix A, NormSpec norm, std::uint64_t seed) {
    if (A.rows() != A.cols()) throw ConfigError("constant cocycle matrix must be square");
    CocycleSpec s;
    s.kind = Kind::constant;
    s.dim = static_cast<int>(A.rows());
    s.norm = std::move(norm);
    s.seed = seed;
    s.constant_matrix = std::move(A);
    return s;
}

CocycleSpec CocycleSpec::iid_diagonal_op(std::vector<ScalarLaw> laws, NormSpec norm,
                                         std::uint64_t seed) {
    if (laws.empty()) throw ConfigError("iid_diagonal needs at least one law");
    CocycleSpec s;
    s.kind = Kind::iid_diagonal;
    s.dim = static_cast<int>(laws.size());
    s.norm = std::move(norm);
    s.seed = seed;
    s.diagonal = std::move(laws);
    return s;
}

CocycleSpec CocycleSpec::iid_general_op(int dim, double scale, NormSpec norm,
                                        std::uint64_t seed) {
    if (dim < 1) throw ConfigError("iid_general needs dim >= 1");
    CocycleSpec s;
    s.kind = Kind::iid_general;
    s.dim = dim;
    s.norm = std::move(norm);
    s.seed = seed;
    s.iid_scale = scale;
    return s;
}

CocycleSpec CocycleSpec::triangular_op(std::vector<ScalarLaw> diag, ScalarLaw coupling,
                                       NormSpec norm, std::uint64_t seed) {
    if (diag.empty()) throw ConfigError("triangular needs at least one diagonal law");
    CocycleSpec s;
    s.kind = Kind::triangular;
    s.dim = static_cast<int>(diag.size());
    s.norm = std::move(norm);
    s.seed = seed;
    s.diagonal = std::move(diag);
    s.coupling = coupling;
    return s;
}

CocycleSpec CocycleSpec::rotation_driven_op(double alpha, Matrix base, Matrix modulation,
                                            NormSpec norm, std::uint64_t seed) {
    if (base.rows() != base.cols() || modulation.rows() != modulation.cols() ||
        base.rows() != modulation.rows())
        throw ConfigError("rotation_driven matrices must be square of equal size");
    CocycleSpec s;
    s.kind = Kind::rotation_driven;
    s.dim = static_cast<int>(base.rows());
    s.norm = std::move(norm);
    s.seed = seed;
    s.alpha = alpha;
    s.base_matrix = std::move(base);
    s.modulation_matrix = std::move(modulation);
    return s;
}

CocycleSpec CocycleSpec::rank_deficient_op(CocycleSpec base, std::vector<int> kill_steps,
                                           int kill_column) {
    if (kill_column < 0 || kill_column >= base.dim)
        throw ConfigError("kill column outside the ambient dimension");
    CocycleSpec s;
    s.kind = Kind::rank_deficient;
    s.dim = base.dim;
    s.norm = base.norm;
    s.seed = base.seed;
    s.kill_steps = std::move(kill_steps);
    s.kill_column = kill_column;
    s.base = std::make_shared<const CocycleSpec>(std::move(base));
    return s;
}

OperatorMatrix CocycleSpec::operator_at(int k) const {
    switch (kind) {
        case Kind::constant:
            return constant_matrix;
        case Kind::iid_diagonal: {
            RngStream rng = RngStream(seed, 0x1d1).fork(static_cast<std::uint64_t>(k));
            Matrix T = Matrix::Zero(dim, dim);
            for (int i = 0; i < dim; ++i) T(i, i) = diagonal[i].sample(rng);
            return T;
        }
        case Kind::iid_general: {
            RngStream rng = RngStream(seed, 0x9e7).fork(static_cast<std::uint64_t>(k));
            Matrix T(dim, dim);
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c < dim; ++c) T(r, c) = iid_scale * rng.gaussian();
            return T;
        }
        case Kind::triangular: {
            RngStream rng = RngStream(seed, 0x7e1).fork(static_cast<std::uint64_t>(k));
            Matrix T = Matrix::Zero(dim, dim);
            for (int i = 0; i < dim; ++i) T(i, i) = diagonal[i].sample(rng);
            for (int r = 0; r < dim; ++r)
                for (int c = r + 1; c < dim; ++c) T(r, c) = coupling.sample(rng);
            return T;
        }
        case Kind::rotation_driven: {
            RngStream rng = RngStream(seed, 0x307);
            const double x0 = rng.uniform();
            double x = x0 + k * alpha;
            x -= std::floor(x);
            return base_matrix + std::sin(2.0 * 3.14159265358979323846 * x) * modulation_matrix;
        }
        case Kind::rank_deficient: {
            Matrix T = base->operator_at(k);
            if (std::find(kill_steps.begin(), kill_steps.end(), k) != kill_steps.end())
                T.col(kill_column).setZero();
            return T;
        }
    }
    return Matrix::Identity(dim, dim);
}

Trajectory stream(const CocycleSpec& spec, int length_budget) {
    Trajectory t;
    t.space = AmbientSpace(spec.dim, spec.norm);
    t.length_budget = length_budget;
    t.seed = spec.seed;
    CocycleSpec copy = spec;
    t.op = [copy](int k) { return copy.operator_at(k); };
    return t;
}

namespace {

ExponentReport report_from_sorted_exponents(std::vector<double> exps) {
    std::sort(exps.begin(), exps.end(), std::greater<>());
    ExponentReport rep;
    rep.K = exps;
    double acc = 0.0;
    bool dead = false;
    for (double k : exps) {
        if (k == -kInf) dead = true;
        acc = dead ? -kInf : acc + k;
        rep.l.push_back(acc);
    }
    std::size_t i = 0;
    while (i < exps.size()) {
        if (exps[i] == -kInf) {
            rep.lambda.push_back(-kInf);
            rep.mult.push_back(static_cast<int>(exps.size() - i));
            break;
        }
        std::size_t j = i;
        double mean = 0.0;
        while (j < exps.size() && std::abs(exps[j] - exps[i]) <= 1e-9) mean += exps[j++];
        rep.lambda.push_back(mean / (j - i));
        rep.mult.push_back(static_cast<int>(j - i));
        i = j;
    }
    int off = 0;
    for (std::size_t m = 0; m < rep.lambda.size(); ++m) {
        rep.M.push_back(off);
        off += rep.mult[m];
    }
    return rep;
}

}  // namespace

std::optional<ExponentReport> analytic_exponents(const CocycleSpec& spec) {
    switch (spec.kind) {
        case CocycleSpec::Kind::constant: {
            Eigen::EigenSolver<Matrix> es(spec.constant_matrix);
            std::vector<double> exps;
            for (int i = 0; i < spec.dim; ++i) {
                const double m = std::abs(es.eigenvalues()[i]);
                exps.push_back(m > 0.0 ? std::log(m) : -kInf);
            }
            return report_from_sorted_exponents(std::move(exps));
        }
        case CocycleSpec::Kind::iid_diagonal:
        case CocycleSpec::Kind::triangular: {
            std::vector<double> exps;
            for (const auto& law : spec.diagonal) exps.push_back(law.expected_log_abs());
            return report_from_sorted_exponents(std::move(exps));
        }
        default:
            return std::nullopt;
    }
}

}  // namespace metvol
