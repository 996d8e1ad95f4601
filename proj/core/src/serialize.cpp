#include "metvol/serialize.hpp"

namespace metvol {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a nonempty array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols) throw ConfigError("ragged matrix rows");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vector vector_from_json(const Json& j) {
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

Json extended_to_json(double x) {
    if (x == kInf) return "inf";
    if (x == -kInf) return "-inf";
    return x;
}

double extended_from_json(const Json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        throw ConfigError("unrecognized extended real: " + s);
    }
    return j.get<double>();
}

Json to_json(const NormSpec& n) {
    Json j;
    switch (n.kind()) {
        case NormKind::euclidean:
            j["kind"] = "euclidean";
            break;
        case NormKind::lp:
            j["kind"] = n.p() == 1.0 ? "l1" : "lp";
            if (n.p() != 1.0) j["p"] = n.p();
            break;
        case NormKind::linf:
            j["kind"] = "linf";
            break;
        case NormKind::weighted_lp:
            j["kind"] = "weighted_lp";
            j["p"] = n.p();
            j["weights"] = vector_to_json(n.weights());
            break;
        case NormKind::custom:
            throw ConfigError("custom norms are not serializable");
    }
    return j;
}

NormSpec norm_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k != "kind" && k != "p" && k != "weights")
            throw ConfigError("unknown norm key: " + k);
    }
    if (kind == "euclidean") return NormSpec::euclidean();
    if (kind == "l1") return NormSpec::l1();
    if (kind == "linf") return NormSpec::linf();
    if (kind == "lp") return NormSpec::lp(j.at("p").get<double>());
    if (kind == "weighted_lp")
        return NormSpec::weighted_lp(j.at("p").get<double>(),
                                     vector_from_json(j.at("weights")));
    throw ConfigError("unknown norm kind: " + kind);
}

Json to_json(const AmbientSpace& s) {
    return Json{{"dim", s.dim}, {"norm", to_json(s.norm)}};
}

AmbientSpace space_from_json(const Json& j) {
    return AmbientSpace(j.at("dim").get<int>(), norm_from_json(j.at("norm")));
}

Json to_json(const Subspace& s) {
    return Json{{"basis", matrix_to_json(s.basis())},
                {"dim", s.dim()},
                {"condition_estimate", s.condition_estimate()}};
}

Subspace subspace_from_json(const Json& j) {
    return Subspace(matrix_from_json(j.at("basis")));
}

Json to_json(const VolumeEstimate& v) {
    return Json{{"value", v.value}, {"rel_error", v.rel_error}, {"method", to_string(v.method)}};
}

VolumeEstimate volume_from_json(const Json& j) {
    VolumeEstimate v;
    v.value = j.at("value").get<double>();
    v.rel_error = j.at("rel_error").get<double>();
    const std::string m = j.at("method").get<std::string>();
    if (m == "exact_closed_form")
        v.method = VolumeMethod::exact_closed_form;
    else if (m == "hull_triangulation")
        v.method = VolumeMethod::hull_triangulation;
    else if (m == "monte_carlo")
        v.method = VolumeMethod::monte_carlo;
    else
        throw ConfigError("unknown volume method: " + m);
    return v;
}

namespace {

Json extended_array(const std::vector<double>& xs) {
    Json out = Json::array();
    for (double x : xs) out.push_back(extended_to_json(x));
    return out;
}

std::vector<double> extended_vector(const Json& j) {
    std::vector<double> out;
    for (const auto& e : j) out.push_back(extended_from_json(e));
    return out;
}

}  // namespace

Json to_json(const ExponentReport& r) {
    return Json{{"l", extended_array(r.l)},        {"K", extended_array(r.K)},
                {"lambda", extended_array(r.lambda)}, {"mult", r.mult},
                {"M", r.M},                        {"noise", r.noise},
                {"tau_cluster", r.tau_cluster}};
}

ExponentReport report_from_json(const Json& j) {
    ExponentReport r;
    r.l = extended_vector(j.at("l"));
    r.K = extended_vector(j.at("K"));
    r.lambda = extended_vector(j.at("lambda"));
    r.mult = j.at("mult").get<std::vector<int>>();
    r.M = j.at("M").get<std::vector<int>>();
    r.noise = j.at("noise").get<double>();
    r.tau_cluster = j.at("tau_cluster").get<double>();
    return r;
}

Json to_json(const Filtration& f) {
    Json subs = Json::array();
    for (const auto& s : f.subspaces) subs.push_back(to_json(s));
    return Json{{"subspaces", subs}, {"codims", f.codims}, {"cauchy_log", f.cauchy_log}};
}

Json to_json(const SingularProfile& p) {
    Json vq = Json::object(), cq = Json::object(), audit = Json::object();
    for (auto& [q, v] : p.vq) vq[std::to_string(q)] = v;
    for (auto& [q, v] : p.cq) cq[std::to_string(q)] = v;
    for (auto& [q, v] : p.witness_audit) audit[std::to_string(q)] = v;
    return Json{{"vq", vq}, {"cq", cq}, {"witness_audit", audit}};
}

Json to_json(const ScalarLaw& law) {
    switch (law.kind) {
        case ScalarLaw::Kind::constant_value:
            return Json{{"kind", "constant"}, {"value", law.a}};
        case ScalarLaw::Kind::two_point:
            return Json{{"kind", "two_point"}, {"a", law.a}, {"b", law.b}};
        case ScalarLaw::Kind::log_uniform:
            return Json{{"kind", "log_uniform"}, {"lo", law.a}, {"hi", law.b}};
    }
    return {};
}

ScalarLaw law_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return ScalarLaw::constant(j.at("value").get<double>());
    if (kind == "two_point")
        return ScalarLaw::two_point(j.at("a").get<double>(), j.at("b").get<double>());
    if (kind == "log_uniform")
        return ScalarLaw::log_uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
    throw ConfigError("unknown scalar law kind: " + kind);
}

Json to_json(const CocycleSpec& spec) {
    Json j;
    j["kind"] = to_string(spec.kind);
    j["dim"] = spec.dim;
    j["seed"] = spec.seed;
    switch (spec.kind) {
        case CocycleSpec::Kind::constant:
            j["matrix"] = matrix_to_json(spec.constant_matrix);
            break;
        case CocycleSpec::Kind::iid_diagonal: {
            Json laws = Json::array();
            for (auto& l : spec.diagonal) laws.push_back(to_json(l));
            j["diagonal"] = laws;
            break;
        }
        case CocycleSpec::Kind::iid_general:
            j["scale"] = spec.iid_scale;
            break;
        case CocycleSpec::Kind::triangular: {
            Json laws = Json::array();
            for (auto& l : spec.diagonal) laws.push_back(to_json(l));
            j["diagonal"] = laws;
            j["coupling"] = to_json(spec.coupling);
            break;
        }
        case CocycleSpec::Kind::rotation_driven:
            j["alpha"] = spec.alpha;
            j["base"] = matrix_to_json(spec.base_matrix);
            j["modulation"] = matrix_to_json(spec.modulation_matrix);
            break;
        case CocycleSpec::Kind::rank_deficient:
            j["base_cocycle"] = to_json(*spec.base);
            j["kill_steps"] = spec.kill_steps;
            j["kill_column"] = spec.kill_column;
            break;
    }
    return j;
}

CocycleSpec cocycle_from_json(const Json& j) {
    static const std::vector<std::string> allowed = {
        "kind", "dim", "seed", "norm",   "matrix",     "diagonal",   "scale",
        "coupling", "alpha", "base", "modulation", "base_cocycle", "kill_steps",
        "kill_column"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown cocycle key: " + it.key());
    }
    const std::string kind = j.at("kind").get<std::string>();
    NormSpec norm =
        j.contains("norm") ? norm_from_json(j.at("norm")) : NormSpec::euclidean();
    const std::uint64_t seed = j.value("seed", 0ULL);

    if (kind == "constant")
        return CocycleSpec::constant_op(matrix_from_json(j.at("matrix")), norm, seed);
    if (kind == "iid_diagonal") {
        std::vector<ScalarLaw> laws;
        for (const auto& l : j.at("diagonal")) laws.push_back(law_from_json(l));
        return CocycleSpec::iid_diagonal_op(std::move(laws), norm, seed);
    }
    if (kind == "iid_general")
        return CocycleSpec::iid_general_op(j.at("dim").get<int>(),
                                           j.value("scale", 1.0), norm, seed);
    if (kind == "triangular") {
        std::vector<ScalarLaw> laws;
        for (const auto& l : j.at("diagonal")) laws.push_back(law_from_json(l));
        return CocycleSpec::triangular_op(std::move(laws), law_from_json(j.at("coupling")),
                                          norm, seed);
    }
    if (kind == "rotation_driven")
        return CocycleSpec::rotation_driven_op(
            j.at("alpha").get<double>(), matrix_from_json(j.at("base")),
            matrix_from_json(j.at("modulation")), norm, seed);
    if (kind == "rank_deficient") {
        CocycleSpec base = cocycle_from_json(j.at("base_cocycle"));
        return CocycleSpec::rank_deficient_op(std::move(base),
                                              j.at("kill_steps").get<std::vector<int>>(),
                                              j.value("kill_column", 0));
    }
    throw ConfigError("unknown cocycle kind: " + kind);
}

}  // namespace metvol
