// mtype-lab: exact desk-scale computations around martingale/Haar type and
// cotype ideal norms, summation-operator witnesses, and the constructive
// factorization of the finite summation operators.

#include "mtype_lab/errors.hpp"
#include "mtype_lab/factorization.hpp"
#include "mtype_lab/ideal_norms.hpp"
#include "mtype_lab/serialization.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace mtype;

struct CommonOpts {
    std::uint64_t seed = 0;
    long budget = 1000000;
    int cap = kDefaultLevelCap;
    std::string format = "json";
    std::string output;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "search seed (64-bit)");
    cmd->add_option("--budget", o.budget, "enumeration budget");
    cmd->add_option("--cap", o.cap, "level cap for dyadic partitions");
    cmd->add_option("--format", o.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--output", o.output, "write output to this file (default stdout)");
}

SearchConfig search_config(const CommonOpts& o) {
    SearchConfig cfg;
    cfg.level_cap = o.cap;
    cfg.enum_budget = o.budget;
    cfg.seed = o.seed;
    if (const char* env = std::getenv("MTYPE_LAB_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);
    return cfg;
}

void write_output(const CommonOpts& o, const std::string& text) {
    if (o.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(o.output, std::ios::binary);
    if (!out) throw ParseError("cannot open output file: " + o.output);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::pair<int, int> parse_range(const std::string& text) {
    auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            int n = std::stoi(text);
            return {n, n};
        }
        return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw ParseError("bad range: " + text);
    }
}

std::vector<Rational> parse_rational_list(const std::string& text) {
    std::vector<Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
    if (out.empty()) throw ParseError("empty rational list");
    return out;
}

// Rational stand-ins for 1/(1 + log k); a display-only approximation,
// clamped to stay non-increasing.
std::vector<Rational> log_decay_weights(int dim) {
    std::vector<Rational> t;
    Rational prev(1);
    for (int k = 1; k <= dim; ++k) {
        double v = 1.0 / (1.0 + std::log(static_cast<double>(k)));
        Rational r = make_rational(std::lround(v * 1000000.0), 1000000);
        if (cmp(r, prev) > 0) r = prev;
        t.push_back(r);
        prev = r;
    }
    return t;
}

struct OperatorOpts {
    std::string file;
    std::string builtin;
    std::string t_list;
    std::string space = "l1";
    int dim = 0;
};

void add_operator_opts(CLI::App* cmd, OperatorOpts& o) {
    cmd->add_option("--operator", o.file, "operator JSON file");
    cmd->add_option("--builtin", o.builtin, "builtin operator: summation, identity, diagonal")
        ->check(CLI::IsMember({"summation", "identity", "diagonal"}));
    cmd->add_option("--t", o.t_list, "diagonal weights: comma list of rationals, or 'log'");
    cmd->add_option("--space", o.space, "space for the identity builtin")
        ->check(CLI::IsMember({"l1", "l2", "linf"}));
    cmd->add_option("--dim", o.dim, "dimension for builtin operators");
}

// `level` feeds the default dimension 2^level of the summation builtin.
OperatorSpec make_operator(const OperatorOpts& o, int level) {
    if (!o.file.empty()) return operator_from_json(parse_json_text(read_file(o.file)));
    if (o.builtin.empty()) throw ParseError("need --operator FILE or --builtin NAME");
    if (o.builtin == "summation") {
        // Haar estimates at level n default to Sigma_{2^n}.
        int d = o.dim > 0 ? o.dim : (level >= 1 && level <= 12 ? 1 << level : 0);
        if (d <= 0) throw ParseError("summation builtin needs --dim or a usable --n");
        return summation_operator(d);
    }
    if (o.builtin == "identity") {
        if (o.dim <= 0) throw ParseError("identity builtin needs --dim");
        return OperatorSpec::identity(Space{NormKind::parse(o.space), o.dim});
    }
    if (o.t_list.empty()) throw ParseError("diagonal builtin needs --t");
    std::vector<Rational> t =
        o.t_list == "log" ? log_decay_weights(o.dim > 0 ? o.dim : 8) : parse_rational_list(o.t_list);
    try {
        return diagonal_operator(t);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

std::string operator_label(const OperatorOpts& o) {
    if (!o.file.empty()) return o.file;
    return o.builtin;
}

int cmd_analyze(const CommonOpts& common, const std::string& input, const std::string& builtin,
                int n, const std::string& value, const std::string& tree_spec) {
    StepFunction f = StepFunction::zero(1);
    int default_n = 0;
    if (!builtin.empty()) {
        if (builtin == "summation-witness") {
            if (n < 1) throw ParseError("summation-witness needs --n");
            ojson j = to_json(summation_cotype_witness(n, common.cap));
            write_output(common, j.dump(2) + "\n");
            return 0;
        }
        if (builtin == "constant") {
            std::vector<QuadRational> v;
            for (const auto& r : parse_rational_list(value.empty() ? "1" : value))
                v.push_back(QuadRational(r));
            f = StepFunction::constant(std::move(v));
            default_n = n > 0 ? n : 2;
        } else {
            throw ParseError("unknown analyze builtin: " + builtin);
        }
    } else if (!input.empty()) {
        f = step_function_from_json(parse_json_text(read_file(input)));
        std::size_t cells = f.canonical().cell_count();
        while ((1UL << default_n) < cells && default_n < common.cap) ++default_n;
        if (n > 0) default_n = n;
    } else {
        throw ParseError("analyze needs --input FILE or --builtin NAME");
    }
    int tm = 0, tn = default_n;
    if (!tree_spec.empty()) {
        auto [a, b] = parse_range(tree_spec);
        tm = a;
        tn = b;
    }
    ojson j = to_json(analyze(f, tm, tn, common.cap));
    write_output(common, j.dump(2) + "\n");
    return 0;
}

int cmd_synthesize(const CommonOpts& common, const std::string& input) {
    if (input.empty()) throw ParseError("synthesize needs --input FILE");
    HaarCoefficients c = haar_coefficients_from_json(parse_json_text(read_file(input)));
    ojson j = to_json(synthesize(c, std::max(common.cap, c.tree_n())));
    write_output(common, j.dump(2) + "\n");
    return 0;
}

int cmd_estimate(const CommonOpts& common, const OperatorOpts& op, const std::string& kind_name,
                 int tree_m, const std::string& p_text, const std::string& range) {
    auto [lo, hi] = parse_range(range);
    if (lo < 1 || hi < lo) throw ParseError("bad --n range");
    Rational p = parse_rational(p_text);
    EstimateKind kind = EstimateKind::parse(kind_name, tree_m, p);
    SearchConfig cfg = search_config(common);

    ojson rows = ojson::array();
    std::string csv = estimate_csv_header() + "\n";
    for (int n = lo; n <= hi; ++n) {
        if (n > cfg.level_cap && !kind.is_martingale())
            throw LevelCapError("n exceeds the level cap");
        OperatorSpec T = make_operator(op, n);
        IdealNormEstimate est = estimate(T, kind, n, cfg);
        if (common.format == "csv") {
            csv += estimate_csv_row(operator_label(op), est) + "\n";
        } else {
            ojson row = to_json(est);
            if (op.builtin == "diagonal" &&
                (kind.family == EstimateKind::Family::TypeP ||
                 (kind.family == EstimateKind::Family::HaarType && kind.tree_m == 1))) {
                std::vector<Rational> t = op.t_list == "log"
                                              ? log_decay_weights(op.dim > 0 ? op.dim : 8)
                                              : parse_rational_list(op.t_list);
                if (static_cast<int>(t.size()) >= n)
                    row["closed_form"] = diagonal_type_exact(t, n, p);
            }
            rows.push_back(std::move(row));
        }
    }
    if (common.format == "csv") {
        write_output(common, csv);
    } else {
        ojson j;
        j["operator"] = operator_label(op);
        j["rows"] = std::move(rows);
        write_output(common, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_verify(const CommonOpts& common, const OperatorOpts& op, const std::string& range) {
    auto [lo, hi] = parse_range(range);
    if (lo < 1 || hi < lo) throw ParseError("bad --n range");
    SearchConfig cfg = search_config(common);
    OperatorSpec T = make_operator(op, 0);

    bool all_ok = true;
    ojson reports = ojson::array();
    for (int n = lo; n <= hi; ++n) {
        RelationReport report = verify_relations(T, n, cfg);
        for (const auto& c : report.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << "n=" << n << "  " << c.relation << "\n";
        all_ok = all_ok && report.ok();
        reports.push_back(to_json(report));
    }
    if (!common.output.empty()) {
        ojson j;
        j["operator"] = operator_label(op);
        j["seed"] = cfg.seed;
        j["reports"] = std::move(reports);
        std::ofstream out(common.output, std::ios::binary);
        out << j.dump(2) << "\n";
    }
    std::cout << (all_ok ? "all relations hold\n" : "RELATION VIOLATION (this is a bug)\n");
    return all_ok ? 0 : 1;
}

int cmd_factorize(const CommonOpts& common, const OperatorOpts& op, const std::string& witness_file,
                  const std::string& builtin_witness, int n, const std::string& schedule_text) {
    OperatorSpec T = make_operator(op, 0);

    std::optional<MDS> witness;
    std::optional<StepFunction> g;
    if (!witness_file.empty()) {
        auto [m, gg] = witness_bundle_from_json(parse_json_text(read_file(witness_file)));
        witness = std::move(m);
        g = std::move(gg);
    } else if (!builtin_witness.empty()) {
        if (builtin_witness != "diagonal") throw ParseError("unknown builtin witness");
        if (n < 1) throw ParseError("builtin witness needs --n");
        if (T.source().dim < 2 * n)
            throw ParseError("builtin diagonal witness needs source dimension >= 2n");
        std::vector<Rational> ones(T.source().dim, Rational(1));
        witness = from_haar_coeffs(diagonal_type_witness(ones, 2 * n, Rational(2), common.cap),
                                   common.cap);
    } else {
        throw ParseError("factorize needs --witness FILE or --builtin-witness diagonal");
    }

    std::vector<Rational> schedule = default_delta_schedule();
    if (!schedule_text.empty()) schedule = parse_rational_list(schedule_text);

    FactorizationResult res = build_factorization_schedule(T, *witness, g, schedule);
    double r = std::sqrt(res.witness_ratio_sq.to_double());
    double witness_bound = 6.0 * std::sqrt(static_cast<double>(res.n)) /
                         (to_double(res.delta) * r);
    std::cout << "n = " << res.n << ", delta = " << to_string(res.delta) << "\n";
    std::cout << "norm product <= " << format_double(res.product_bound)
              << "  (witness-relative bound 6 sqrt(n)/(delta r) = " << format_double(witness_bound)
              << ")\n";
    if (!common.output.empty()) {
        std::ofstream out(common.output, std::ios::binary);
        out << to_json(res).dump(2) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact martingale/Haar type and cotype ideal norm laboratory"};
    app.require_subcommand(1);

    CommonOpts common;

    auto* analyze_cmd = app.add_subcommand("analyze", "Haar-expand a step function");
    std::string an_input, an_builtin, an_value, an_tree;
    int an_n = 0;
    analyze_cmd->add_option("--input", an_input, "step function JSON file");
    analyze_cmd->add_option("--builtin", an_builtin, "summation-witness or constant");
    analyze_cmd->add_option("--n", an_n, "level for builtins / override for inputs");
    analyze_cmd->add_option("--value", an_value, "value for the constant builtin");
    analyze_cmd->add_option("--tree", an_tree, "tree range m..n");
    add_common(analyze_cmd, common);

    auto* synth_cmd = app.add_subcommand("synthesize", "evaluate a Haar polynomial");
    std::string sy_input;
    synth_cmd->add_option("--input", sy_input, "coefficients JSON file");
    add_common(synth_cmd, common);

    auto* est_cmd = app.add_subcommand("estimate", "certified ideal norm bounds");
    OperatorOpts est_op;
    std::string est_kind = "haar-type", est_p = "2", est_range = "1";
    int est_tree_m = 0;
    add_operator_opts(est_cmd, est_op);
    est_cmd->add_option("--kind", est_kind,
                        "haar-type, haar-cotype, mtype, mcotype, eq-mtype, type-p");
    est_cmd->add_option("--p", est_p, "exponent for type-p (rational in (1,2])");
    est_cmd->add_option("--tree-m", est_tree_m, "tree start level for haar kinds (0 or 1)");
    est_cmd->add_option("--n", est_range, "index or range a..b");
    add_common(est_cmd, common);

    auto* verify_cmd = app.add_subcommand("verify", "check the finite-n relations");
    OperatorOpts ver_op;
    std::string ver_range = "1";
    add_operator_opts(verify_cmd, ver_op);
    verify_cmd->add_option("--n", ver_range, "index or range a..b");
    add_common(verify_cmd, common);

    auto* fact_cmd = app.add_subcommand("factorize", "factor Sigma_n through [L2,T]");
    OperatorOpts fact_op;
    std::string fact_witness, fact_builtin_witness, fact_schedule;
    int fact_n = 0;
    add_operator_opts(fact_cmd, fact_op);
    fact_cmd->add_option("--witness", fact_witness, "witness bundle JSON file (mds + g)");
    fact_cmd->add_option("--builtin-witness", fact_builtin_witness, "diagonal");
    fact_cmd->add_option("--n", fact_n, "target size for the builtin witness");
    fact_cmd->add_option("--delta-schedule", fact_schedule, "comma list of deltas in (0,1)");
    add_common(fact_cmd, common);

    try {
        app.parse(argc, argv);
        if (analyze_cmd->parsed())
            return cmd_analyze(common, an_input, an_builtin, an_n, an_value, an_tree);
        if (synth_cmd->parsed()) return cmd_synthesize(common, sy_input);
        if (est_cmd->parsed())
            return cmd_estimate(common, est_op, est_kind, est_tree_m, est_p, est_range);
        if (verify_cmd->parsed()) return cmd_verify(common, ver_op, ver_range);
        if (fact_cmd->parsed())
            return cmd_factorize(common, fact_op, fact_witness, fact_builtin_witness, fact_n,
                                 fact_schedule);
        return 2;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const mtype::LevelCapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mtype::ConstructionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const mtype::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
