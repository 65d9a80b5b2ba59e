#include "mtype_lab/serialization.hpp"

#include "mtype_lab/errors.hpp"

#include <cstdio>
#include <stdexcept>

namespace mtype {

namespace {

const ojson& field(const ojson& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw ParseError(std::string("missing field: ") + name);
    return *it;
}

std::string string_field(const ojson& j) {
    if (!j.is_string()) throw ParseError("expected a string");
    return j.get<std::string>();
}

Space space_from_text(const std::string& text, int dim) {
    auto colon = text.find(':');
    std::string norm = colon == std::string::npos ? text : text.substr(0, colon);
    if (colon != std::string::npos) {
        int d = 0;
        try {
            d = std::stoi(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw ParseError("bad space: " + text);
        }
        if (d != dim) throw ParseError("space dimension disagrees with the matrix shape");
    }
    return Space{NormKind::parse(norm), dim};
}

std::string space_to_text(const Space& s) {
    return s.norm.to_string() + ":" + std::to_string(s.dim);
}

} // namespace

ojson to_json(const QuadRational& x) {
    return ojson::array({to_string(x.rational_part()), to_string(x.sqrt2_part())});
}

QuadRational quad_rational_from_json(const ojson& j) {
    if (!j.is_array() || j.size() != 2) throw ParseError("scalar must be a [a, b] pair");
    return QuadRational(parse_rational(string_field(j[0])), parse_rational(string_field(j[1])));
}

ojson to_json(const IntervalPartition& p) {
    ojson arr = ojson::array();
    for (const auto& b : p.breakpoints()) arr.push_back(to_string(b));
    return arr;
}

IntervalPartition partition_from_json(const ojson& j) {
    if (!j.is_array()) throw ParseError("partition must be an array of rationals");
    std::vector<Rational> bps;
    for (const auto& b : j) bps.push_back(parse_rational(string_field(b)));
    try {
        return IntervalPartition(std::move(bps));
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

ojson to_json(const StepFunction& f) {
    StepFunction c = f.canonical();
    ojson j;
    j["dimension"] = c.dimension();
    j["breakpoints"] = to_json(c.partition());
    ojson values = ojson::array();
    for (std::size_t i = 0; i < c.cell_count(); ++i) {
        ojson cell = ojson::array();
        for (const auto& x : c.value_on_cell(i)) cell.push_back(to_json(x));
        values.push_back(std::move(cell));
    }
    j["values"] = std::move(values);
    return j;
}

StepFunction step_function_from_json(const ojson& j) {
    if (!j.is_object()) throw ParseError("step function must be an object");
    int dim = 0;
    try {
        dim = field(j, "dimension").get<int>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError("dimension must be an integer");
    }
    IntervalPartition p = partition_from_json(field(j, "breakpoints"));
    const ojson& values = field(j, "values");
    if (!values.is_array()) throw ParseError("values must be an array");
    std::vector<std::vector<QuadRational>> vals;
    for (const auto& cell : values) {
        if (!cell.is_array()) throw ParseError("cell value must be an array");
        std::vector<QuadRational> v;
        for (const auto& x : cell) v.push_back(quad_rational_from_json(x));
        vals.push_back(std::move(v));
    }
    try {
        return StepFunction(std::move(p), std::move(vals), dim);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

ojson to_json(const OperatorSpec& T) {
    ojson j;
    j["rows"] = T.rows();
    j["cols"] = T.cols();
    j["source"] = space_to_text(T.source());
    j["target"] = space_to_text(T.target());
    ojson m = ojson::array();
    for (int r = 0; r < T.rows(); ++r) {
        ojson row = ojson::array();
        for (int c = 0; c < T.cols(); ++c) row.push_back(to_json(T.entry(r, c)));
        m.push_back(std::move(row));
    }
    j["matrix"] = std::move(m);
    return j;
}

OperatorSpec operator_from_json(const ojson& j) {
    if (!j.is_object()) throw ParseError("operator must be an object");
    int rows = 0, cols = 0;
    try {
        rows = field(j, "rows").get<int>();
        cols = field(j, "cols").get<int>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError("rows/cols must be integers");
    }
    Space source = space_from_text(string_field(field(j, "source")), cols);
    Space target = space_from_text(string_field(field(j, "target")), rows);
    const ojson& m = field(j, "matrix");
    if (!m.is_array() || static_cast<int>(m.size()) != rows)
        throw ParseError("matrix must have `rows` rows");
    std::vector<std::vector<QuadRational>> matrix;
    for (const auto& row : m) {
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ParseError("matrix row with the wrong length");
        std::vector<QuadRational> r;
        for (const auto& x : row) r.push_back(quad_rational_from_json(x));
        matrix.push_back(std::move(r));
    }
    try {
        return OperatorSpec(std::move(matrix), std::move(source), std::move(target));
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

ojson to_json(const HaarCoefficients& c) {
    ojson j;
    j["m"] = c.tree_m();
    j["n"] = c.tree_n();
    j["dimension"] = c.dimension();
    ojson coeffs = ojson::object();
    for (const auto& idx : c.indices()) {
        ojson v = ojson::array();
        for (const auto& x : c.at(idx)) v.push_back(to_json(x));
        coeffs[std::to_string(idx.k) + "," + std::to_string(idx.j)] = std::move(v);
    }
    j["coeffs"] = std::move(coeffs);
    return j;
}

HaarCoefficients haar_coefficients_from_json(const ojson& j) {
    if (!j.is_object()) throw ParseError("coefficients must be an object");
    int m = 0, n = 0, dim = 0;
    try {
        m = field(j, "m").get<int>();
        n = field(j, "n").get<int>();
        dim = field(j, "dimension").get<int>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError("m, n, dimension must be integers");
    }
    HaarCoefficients c = [&] {
        try {
            return HaarCoefficients::zero(m, n, dim, std::max(kDefaultLevelCap, n));
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what());
        }
    }();
    const ojson& coeffs = field(j, "coeffs");
    if (!coeffs.is_object()) throw ParseError("coeffs must be an object");
    std::size_t seen = 0;
    for (const auto& idx : c.indices()) {
        std::string key = std::to_string(idx.k) + "," + std::to_string(idx.j);
        auto it = coeffs.find(key);
        if (it == coeffs.end()) throw ParseError("missing coefficient " + key);
        if (!it->is_array() || static_cast<int>(it->size()) != dim)
            throw ParseError("coefficient " + key + " has the wrong length");
        std::vector<QuadRational> v;
        for (const auto& x : *it) v.push_back(quad_rational_from_json(x));
        c.set(idx, std::move(v));
        ++seen;
    }
    if (seen != coeffs.size()) throw ParseError("coeffs holds keys outside the tree");
    return c;
}

ojson to_json(const MDS& m) {
    ojson j;
    j["dimension"] = m.dimension();
    ojson filt = ojson::array();
    for (const auto& p : m.filtration().partitions()) filt.push_back(to_json(p));
    j["filtration"] = std::move(filt);
    ojson diffs = ojson::array();
    for (const auto& d : m.differences()) diffs.push_back(to_json(d));
    j["differences"] = std::move(diffs);
    return j;
}

MDS mds_from_json(const ojson& j) {
    if (!j.is_object()) throw ParseError("MDS must be an object");
    int dim = 0;
    try {
        dim = field(j, "dimension").get<int>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError("dimension must be an integer");
    }
    const ojson& filt = field(j, "filtration");
    if (!filt.is_array()) throw ParseError("filtration must be an array");
    std::vector<IntervalPartition> parts;
    for (const auto& p : filt) parts.push_back(partition_from_json(p));
    const ojson& diffs = field(j, "differences");
    if (!diffs.is_array()) throw ParseError("differences must be an array");
    std::vector<StepFunction> ds;
    for (const auto& d : diffs) ds.push_back(step_function_from_json(d));
    try {
        return MDS(Filtration(std::move(parts)), std::move(ds), dim);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

ojson witness_bundle_to_json(const MDS& m, const StepFunction* g) {
    ojson j;
    j["mds"] = to_json(m);
    j["g"] = g ? to_json(*g) : ojson(nullptr);
    return j;
}

std::pair<MDS, std::optional<StepFunction>> witness_bundle_from_json(const ojson& j) {
    if (!j.is_object()) throw ParseError("witness bundle must be an object");
    MDS m = mds_from_json(field(j, "mds"));
    std::optional<StepFunction> g;
    auto it = j.find("g");
    if (it != j.end() && !it->is_null()) g = step_function_from_json(*it);
    return {std::move(m), std::move(g)};
}

ojson to_json(const IdealNormEstimate& est) {
    ojson j;
    j["kind"] = est.kind.name();
    if (est.kind.is_haar()) j["tree_m"] = est.kind.tree_m;
    if (est.kind.family == EstimateKind::Family::TypeP) j["p"] = to_string(est.kind.p);
    j["n"] = est.n;
    bool exact_ring = !(est.kind.family == EstimateKind::Family::TypeP &&
                        est.kind.p != Rational(2));
    j["lower_sq"] = exact_ring ? to_json(est.lower_sq) : ojson(nullptr);
    j["upper_sq"] = to_json(est.upper_sq);
    j["lower"] = est.lower;
    j["upper"] = est.upper;
    j["exact"] = exact_ring && est.lower_sq == est.upper_sq;
    j["lower_provenance"] = est.lower_provenance;
    j["upper_provenance"] = est.upper_provenance;
    if (!est.note.empty()) j["note"] = est.note;
    j["seed"] = est.seed;
    j["budget"] = est.budget;
    if (est.haar_witness) {
        j["witness_kind"] = "haar";
        j["witness"] = to_json(*est.haar_witness);
    } else if (est.mds_witness) {
        j["witness_kind"] = "mds";
        j["witness"] = to_json(*est.mds_witness);
    } else {
        j["witness_kind"] = "none";
        j["witness"] = nullptr;
    }
    return j;
}

ojson to_json(const FactorizationResult& res) {
    ojson j;
    j["n"] = res.n;
    ojson idx = ojson::array();
    for (auto i : res.indices) idx.push_back(i);
    j["indices"] = std::move(idx);
    j["delta"] = to_string(res.delta);
    j["witness_ratio_sq"] = to_json(res.witness_ratio_sq);
    j["norm_a_sq"] = to_json(res.norm_a_sq);
    j["norm_b_sq"] = to_json(res.norm_b_sq);
    j["product_bound"] = res.product_bound;
    ojson cols = ojson::array();
    for (const auto& a : res.a_columns) cols.push_back(to_json(a));
    j["a_columns"] = std::move(cols);
    ojson funcs = ojson::array();
    for (const auto& b : res.b_functionals) funcs.push_back(to_json(b));
    j["b_functionals"] = std::move(funcs);
    ojson composed = ojson::array();
    for (const auto& row : res.composed) {
        ojson r = ojson::array();
        for (const auto& x : row) r.push_back(to_json(x));
        composed.push_back(std::move(r));
    }
    j["composed"] = std::move(composed);
    return j;
}

ojson to_json(const RelationReport& report) {
    ojson j;
    j["n"] = report.n;
    j["ok"] = report.ok();
    ojson checks = ojson::array();
    for (const auto& c : report.checks) {
        ojson e;
        e["relation"] = c.relation;
        e["lhs_sq"] = to_json(c.lhs_sq);
        e["rhs_sq"] = to_json(c.rhs_sq);
        e["pass"] = c.pass;
        checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    return j;
}

ojson parse_json_text(const std::string& text) {
    try {
        return ojson::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad JSON: ") + e.what());
    }
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string estimate_csv_header() {
    return "operator,kind,tree_m,p,n,lower,upper,lower_sq,upper_sq,exact,lower_provenance,"
           "upper_provenance,seed,budget";
}

std::string estimate_csv_row(const std::string& operator_label, const IdealNormEstimate& est) {
    bool exact_ring =
        !(est.kind.family == EstimateKind::Family::TypeP && est.kind.p != Rational(2));
    std::string row = operator_label + "," + est.kind.name() + ",";
    row += est.kind.is_haar() ? std::to_string(est.kind.tree_m) : "";
    row += ",";
    row += est.kind.family == EstimateKind::Family::TypeP ? to_string(est.kind.p) : "";
    row += "," + std::to_string(est.n);
    row += "," + format_double(est.lower);
    row += "," + format_double(est.upper);
    row += ",";
    row += exact_ring ? est.lower_sq.to_string() : "";
    row += "," + est.upper_sq.to_string();
    row += ",";
    row += (exact_ring && est.lower_sq == est.upper_sq) ? "true" : "false";
    row += "," + est.lower_provenance;
    row += "," + est.upper_provenance;
    row += "," + std::to_string(est.seed);
    row += "," + std::to_string(est.budget);
    return row;
}

} // namespace mtype
