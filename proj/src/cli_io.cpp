#include "gcusp/cli_io.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "gcusp/coupled_modes.hpp"
#include "gcusp/numerics.hpp"
#include "gcusp/special_fn.hpp"
#include "gcusp/weber.hpp"
#include "json.hpp"

namespace gcusp::cli {

namespace {

using json = nlohmann::ordered_json;
namespace pt = boost::property_tree;
constexpr double kPi = std::numbers::pi;
constexpr const char* kVersion = "1.0.0";
constexpr const char* kModules =
    "special_fn=1.0;weber=1.0;cusp_resolvent=1.0;coupled_modes=1.0;scattering=1.0;cli_io=1.0";

struct CommandInfo {
    Command command;
    const char* name;
    std::vector<std::string> options;
};

const std::vector<CommandInfo>& command_table() {
    static const std::vector<CommandInfo> t = {
        {Command::eval_special, "eval-special", {"kind", "b", "z", "x"}},
        {Command::weber_roundtrip, "weber-roundtrip", {"b", "center", "lambda-max", "samples"}},
        {Command::resolvent_kernel, "resolvent-kernel", {"b", "z", "x", "t"}},
        {Command::resolvent_apply, "resolvent-apply", {"b", "z", "center", "x-max", "step"}},
        {Command::poles, "poles", {"b", "rect"}},
        {Command::limiting_absorption, "limiting-absorption", {"b", "u0", "x", "t", "eps"}},
        {Command::mode_spectrum, "mode-spectrum", {"a", "n", "p", "nu", "sector", "x-max", "step", "count"}},
        {Command::perron_check, "perron-check", {"a", "n", "p", "nu", "sector", "z", "t-max"}},
        {Command::scatter, "scatter", {"z", "z-grid", "sheets", "im", "sector"}},
        {Command::verify_thm2, "verify-thm2", {"z", "z-grid", "sheets", "im", "star"}},
        {Command::resonances, "resonances", {"rect", "sector", "residue"}},
        {Command::tail_check, "tail-check", {"z"}},
        {Command::gluing_check, "gluing-check", {"im-u", "re-u", "x-end", "step"}},
    };
    return t;
}

const CommandInfo& info(Command c) {
    for (const auto& e : command_table())
        if (e.command == c) return e;
    throw InputError("unknown command");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("cannot parse " + what + ": '" + s + "'");
    }
}

long parse_long(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("cannot parse " + what + ": '" + s + "'");
    }
}

bool parse_bool(const std::string& s, const std::string& what) {
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw ParseError("cannot parse " + what + ": '" + s + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Matrix polynomial "r;r|r;r" with entries split by ',' or blanks.
std::vector<Eigen::MatrixXd> parse_matrices(const std::string& s) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& block : split(s, '|')) {
        std::vector<std::vector<double>> rows;
        for (const auto& row : split(block, ';')) {
            std::string r = row;
            std::replace(r.begin(), r.end(), ',', ' ');
            std::istringstream is(r);
            std::vector<double> vals;
            std::string tok;
            while (is >> tok) vals.push_back(parse_double(tok, "matrix entry"));
            rows.push_back(vals);
        }
        const auto dim = rows.size();
        Eigen::MatrixXd m(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) {
            if (rows[i].size() != dim) throw ParseError("matrix '" + block + "' is not square");
            for (std::size_t j = 0; j < dim; ++j) m(i, j) = rows[i][j];
        }
        out.push_back(m);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

pt::ptree parse_ini(const std::string& text) {
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(std::string("model file: ") + e.message() + " at line " + std::to_string(e.line()));
    }
    return tree;
}

// ---------------------------------------------------------------- options

class Options {
public:
    explicit Options(const RunConfig& c) : c_(c) {}
    bool has(const std::string& k) const { return c_.options.count(k) > 0; }
    const std::string& str(const std::string& k) const {
        auto it = c_.options.find(k);
        if (it == c_.options.end()) throw InputError("missing option --" + k);
        return it->second;
    }
    std::string str(const std::string& k, const std::string& d) const { return has(k) ? str(k) : d; }
    double num(const std::string& k) const { return parse_double(str(k), "--" + k); }
    double num(const std::string& k, double d) const { return has(k) ? num(k) : d; }
    int integer(const std::string& k, int d) const { return has(k) ? int(parse_long(str(k), "--" + k)) : d; }
    cplx z(const std::string& k) const { return parse_complex(str(k)); }
    bool flag(const std::string& k, bool d) const { return has(k) ? parse_bool(str(k), "--" + k) : d; }
    double tol() const { return num("tol", 1e-13) * c_.tol_scale; }

private:
    const RunConfig& c_;
};

ScatteringSector parse_sector(const std::string& s) {
    if (s == "alpha") return ScatteringSector::alpha;
    if (s == "beta") return ScatteringSector::beta;
    throw ParseError("sector must be alpha or beta: '" + s + "'");
}

const char* sector_name(ScatteringSector s) { return s == ScatteringSector::alpha ? "alpha" : "beta"; }

ModelManifold config_model(const RunConfig& c) {
    if (c.model_text.empty()) throw InputError("this command needs --model");
    return parse_model(c.model_text);
}

CuspGeometry config_geometry(const RunConfig& c, const Options& o) {
    CuspGeometry g;
    if (!c.model_text.empty()) g = parse_model(c.model_text).geometry;
    else g = CuspGeometry{1.0, 3, 1, {}, 0, 0};
    g.a = o.num("a", g.a);
    g.n = o.integer("n", g.n);
    g.p = o.integer("p", g.p);
    return g;
}

std::vector<cplx> config_points(const Options& o) {
    if (o.has("z")) {
        if (o.has("z-grid")) throw InputError("give either --z or --z-grid");
        return {o.z("z")};
    }
    if (!o.has("z-grid")) throw InputError("missing option --z or --z-grid");
    return parse_z_grid(o.str("z-grid"), o.str("sheets", "0"), o.num("im", 0.0)).points();
}

// Evaluation order is a seeded permutation; results land in fixed slots.
void sweep(std::size_t n, std::uint64_t seed, const std::function<void(std::size_t)>& body) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (seed != 0) std::shuffle(order.begin(), order.end(), std::mt19937_64(seed));
    parallel_for(n, [&](std::size_t k) { body(order[k]); });
}

struct Artifact {
    std::vector<std::pair<std::string, std::string>> provenance;
    std::ostream* out = nullptr;
};

std::vector<std::pair<std::string, std::string>> provenance(const RunConfig& c, const Options& o) {
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.hash()));
    return {{"tool", std::string("gcusp ") + kVersion},
            {"command", command_name(c.command)},
            {"config_hash", hash},
            {"modules", kModules},
            {"tol", fmt(o.tol())},
            {"tol_scale", fmt(c.tol_scale)}};
}

void write_report(std::ostream& os, const json& body, const std::vector<std::pair<std::string, std::string>>& prov) {
    json j;
    json p = json::object();
    for (const auto& [k, v] : prov) p[k] = v;
    j["provenance"] = p;
    for (const auto& [k, v] : body.items()) j[k] = v;
    os << j.dump(2) << '\n';
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

// ---------------------------------------------------------------- commands

struct Context {
    const RunConfig& config;
    Options o;
    std::vector<std::pair<std::string, std::string>> prov;
    std::ostream& out;
    std::ostream& err;
};

int cmd_eval_special(Context& cx) {
    const auto& o = cx.o;
    const std::string kind = o.str("kind");
    const double b = o.num("b"), x = o.num("x", 1.0);
    const cplx z = o.z("z");
    Evaluated e;
    if (kind == "h1" || kind == "h2") e = hankel_eval(kind == "h1" ? 1 : 2, b, z, x);
    else if (kind == "dh1" || kind == "dh2") e.value = hankel_derivative(kind == "dh1" ? 1 : 2, b, z, x);
    else if (kind == "j") e.value = bessel_j_cover(b, z, x);
    else if (kind == "y") e.value = bessel_y_cover(b, z, x);
    else if (kind == "g") e.value = cylinder_g_cover(b, z, x);
    else throw ParseError("kind must be one of h1, h2, dh1, dh2, j, y, g");
    ResultTable t;
    t.provenance = cx.prov;
    t.columns = {"kind", "b", "re_z", "im_z", "x", "re", "im", "error_estimate", "degraded"};
    t.add_row({kind, b, z.real(), z.imag(), x, e.value.real(), e.value.imag(), e.error_estimate,
               static_cast<long long>(e.degraded)});
    t.write_csv(cx.out);
    return Exit::ok;
}

double c2_bump(double x, double c) {
    const double s = x - c;
    return std::abs(s) < 1.0 ? std::pow(1.0 - s * s, 3) : 0.0;
}

int cmd_weber_roundtrip(Context& cx) {
    const auto& o = cx.o;
    const double b = o.num("b", 1.0), c = o.num("center", 3.0), lmax = o.num("lambda-max", 200.0);
    const double thr = o.num("threshold", 1e-6);
    if (c < 2.0) throw InputError("--center must be at least 2 so the bump sits in [1, inf)");
    if (!(lmax > 0.0)) throw InputError("--lambda-max must be positive");
    const auto xg = radial_grid(c - 1.0, c + 1.0, lmax);
    const auto lg = spectral_grid(1e-6, lmax, c + 1.0);
    const auto f = sample_radial(xg, [c](double x) { return cplx(c2_bump(x, c)); });
    const auto w = weber_forward(f, b, lg);
    const auto back = weber_inverse(w, b, xg);
    const double norm2 = radial_inner(f, f).real();
    double diff2 = 0.0;
    for (std::size_t i = 0; i < f.x.size(); ++i) diff2 += f.weights[i] * f.x[i] * std::norm(back.values[i] - f.values[i]);
    const double roundtrip = std::sqrt(diff2 / norm2);
    const double isometry = std::abs(spectral_inner(w, w, b).real() - norm2) / norm2;
    const bool passed = roundtrip <= thr && isometry <= thr;
    json j;
    j["b"] = b;
    j["center"] = c;
    j["lambda_max"] = lmax;
    j["roundtrip_defect"] = roundtrip;
    j["isometry_defect"] = isometry;
    j["threshold"] = thr;
    j["passed"] = passed;
    write_report(cx.out, j, cx.prov);
    if (o.has("samples")) {
        std::ofstream s(o.str("samples"));
        if (!s) throw InputError("cannot write '" + o.str("samples") + "'");
        write_function_csv(s, back.x, back.values, cx.prov);
    }
    return passed ? Exit::ok : Exit::check_failed;
}

int cmd_resolvent_kernel(Context& cx) {
    const auto& o = cx.o;
    const double b = o.num("b"), x = o.num("x"), t = o.num("t");
    const cplx z = o.z("z");
    const cplx r = resolvent_kernel(b, z, x, t);
    ResultTable tab;
    tab.provenance = cx.prov;
    tab.columns = {"b", "re_z", "im_z", "x", "t", "re_r", "im_r"};
    tab.add_row({b, z.real(), z.imag(), x, t, r.real(), r.imag()});
    tab.write_csv(cx.out);
    return Exit::ok;
}

int cmd_resolvent_apply(Context& cx) {
    const auto& o = cx.o;
    const double b = o.num("b"), c = o.num("center", 3.0), x_max = o.num("x-max", 7.0), h = o.num("step", 0.01);
    const cplx z = o.z("z");
    if (!(h > 0.0) || !(x_max > c + 1.0) || c < 2.0) throw InputError("need h > 0, center >= 2 and x-max > center + 1");
    RadialFunction f;
    const auto n = static_cast<std::size_t>(std::lround((x_max - 1.0) / h)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 1.0 + h * double(i);
        const double s = x - c;
        f.x.push_back(x);
        f.values.push_back(std::abs(s) < 1.0 ? std::pow(1.0 - s * s, 4) : 0.0);
    }
    const auto y = apply_cusp_resolvent(f, b, z);
    write_function_csv(cx.out, y.x, y.values, cx.prov);
    return Exit::ok;
}

void write_zero_table(Context& cx, const std::vector<PoleReport>& poles, int winding, bool complete,
                      const std::vector<double>& extra, const std::string& extra_name) {
    ResultTable t;
    t.provenance = cx.prov;
    t.provenance.emplace_back("winding", std::to_string(winding));
    t.provenance.emplace_back("complete", complete ? "true" : "false");
    t.columns = {"re_z", "im_z", "re_lambda", "im_lambda", "residual", "multiplicity"};
    if (!extra_name.empty()) t.columns.push_back(extra_name);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        const auto& p = poles[i];
        const cplx l = std::exp(0.5 * p.z);
        std::vector<Cell> row{p.z.real(), p.z.imag(), l.real(), l.imag(), p.residual, (long long)p.multiplicity};
        if (!extra_name.empty()) row.emplace_back(extra[i]);
        t.add_row(row);
    }
    t.write_csv(cx.out);
}

bool lower_sheet_ok(const std::vector<PoleReport>& poles) {
    for (const auto& p : poles)
        if (p.z.imag() < 0.0 && p.z.imag() > -2.0 * kPi && !(std::exp(0.5 * p.z).imag() < 0.0)) return false;
    return true;
}

int cmd_poles(Context& cx) {
    const double b = cx.o.num("b");
    const Rect r = parse_rect(cx.o.str("rect"));
    PoleSearch ps;
    bool complete = true;
    try {
        ps = find_resolvent_poles(b, r);
    } catch (const IncompletePoleSearchError& e) {
        ps = e.partial;
        complete = false;
        cx.err << "gcusp: " << e.what() << '\n';
    }
    write_zero_table(cx, ps.poles, ps.winding, complete, {}, "");
    return complete && lower_sheet_ok(ps.poles) ? Exit::ok : Exit::check_failed;
}

int cmd_limiting_absorption(Context& cx) {
    const auto& o = cx.o;
    const double b = o.num("b"), u0 = o.num("u0"), x = o.num("x"), t = o.num("t");
    const auto eps = parse_doubles(o.str("eps", "1e-2,1e-3,1e-4"));
    const double thr = o.num("threshold", 1e-6);
    const auto rep = limiting_absorption_check(b, u0, x, t, eps);
    json j;
    j["b"] = b;
    j["u0"] = u0;
    j["x"] = x;
    j["t"] = t;
    json steps = json::array();
    for (const auto& s : rep.steps) steps.push_back({{"eps", s.eps}, {"jump", complex_json(s.jump)}});
    j["steps"] = steps;
    j["limit"] = complex_json(rep.limit);
    j["density"] = rep.density;
    j["deviation"] = rep.deviation;
    j["reflection_defect"] = rep.reflection_defect;
    j["threshold"] = thr;
    j["passed"] = rep.deviation <= thr;
    write_report(cx.out, j, cx.prov);
    return rep.deviation <= thr ? Exit::ok : Exit::check_failed;
}

ModeSystem config_mode_system(Context& cx) {
    const auto& o = cx.o;
    ModeSystem ms;
    ms.geometry = config_geometry(cx.config, o);
    ms.nu = o.num("nu", ms.geometry.mu.empty() ? 1.0 : std::sqrt(ms.geometry.mu.front()));
    if (ms.geometry.mu.empty()) ms.geometry.mu = {ms.nu * ms.nu};
    const std::string s = o.str("sector", "v");
    if (s == "v" || s == "V") ms.sector = ModeSector::V;
    else if (s == "w" || s == "W") ms.sector = ModeSector::W;
    else throw ParseError("mode sector must be v or w");
    ms.x_max = o.num("x-max", 10.0);
    ms.h = o.num("step", 0.01);
    return ms;
}

int cmd_mode_spectrum(Context& cx) {
    const ModeSystem ms = config_mode_system(cx);
    const int count = cx.o.integer("count", 4);
    const auto ev = discrete_spectrum(ms, count);
    ResultTable t;
    t.provenance = cx.prov;
    t.columns = {"nu", "index", "eigenvalue", "error_estimate", "reliable"};
    for (std::size_t i = 0; i < ev.size(); ++i)
        t.add_row({ms.nu, (long long)i, ev[i].value, ev[i].error_estimate, (long long)ev[i].reliable});
    t.write_csv(cx.out);
    return Exit::ok;
}

int cmd_perron_check(Context& cx) {
    const ModeSystem ms = config_mode_system(cx);
    const cplx z = cx.o.has("z") ? cx.o.z("z") : cplx(0.0);
    const double thr = cx.o.num("threshold", 0.02);
    const auto r = perron_decay_check(ms, z, cx.o.num("t-max", 0.0));
    const bool passed = r.decay_deviation <= thr && r.growth_deviation <= thr;
    json j;
    j["a"] = ms.geometry.a;
    j["nu"] = ms.nu;
    j["z"] = format_complex(z);
    j["t_window"] = json::array({r.t_min, r.t_max});
    j["decay_rate"] = r.decay_rate;
    j["growth_rate"] = r.growth_rate;
    j["decay_deviation"] = r.decay_deviation;
    j["growth_deviation"] = r.growth_deviation;
    j["eigen_ratio_defect"] = r.eigen_ratio_defect;
    j["tail_constant"] = r.tail_constant;
    j["tail_bounded"] = r.tail_bounded;
    j["warning"] = r.warning;
    j["threshold"] = thr;
    j["passed"] = passed;
    write_report(cx.out, j, cx.prov);
    return passed ? Exit::ok : Exit::check_failed;
}

ScatteringOptions scattering_options(const Options& o) {
    ScatteringOptions so;
    so.tol = o.tol();
    return so;
}

int cmd_scatter(Context& cx) {
    const auto mm = config_model(cx.config);
    const auto sector = parse_sector(cx.o.str("sector", "alpha"));
    const auto pts = config_points(cx.o);
    const auto so = scattering_options(cx.o);
    const auto seed = std::uint64_t(cx.o.integer("seed", 0));
    std::vector<ScatteringMatrix> sm(pts.size());
    std::vector<double> defect(pts.size());
    std::vector<std::string> error(pts.size());
    sweep(pts.size(), seed, [&](std::size_t k) {
        try {
            sm[k] = scattering_matrix(mm, pts[k], sector, so);
            defect[k] = check_unitarity(mm, pts[k], sector, so).unitarity;
        } catch (const Error& e) {
            error[k] = e.what();
        }
    });
    ResultTable t;
    t.provenance = cx.prov;
    t.columns = {"re_z", "im_z", "sector", "i", "j", "re_C", "im_C", "unitarity_defect"};
    int failures = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (!error[k].empty()) {
            cx.err << "gcusp: z = " << format_complex(pts[k]) << ": " << error[k] << '\n';
            ++failures;
            continue;
        }
        for (int i = 0; i < sm[k].C.rows(); ++i)
            for (int j = 0; j < sm[k].C.cols(); ++j)
                t.add_row({pts[k].real(), pts[k].imag(), std::string(sector_name(sector)), (long long)i, (long long)j,
                           sm[k].C(i, j).real(), sm[k].C(i, j).imag(), defect[k]});
    }
    t.write_csv(cx.out);
    return failures ? Exit::regime_error : Exit::ok;
}

int cmd_verify_thm2(Context& cx) {
    const auto mm = config_model(cx.config);
    const auto pts = config_points(cx.o);
    const auto so = scattering_options(cx.o);
    const double thr = cx.o.num("threshold", 1e-6);
    const int m = mm.geometry.m_p;
    const bool hodge = 2 * mm.geometry.p <= mm.geometry.n - 1 && !mm.include_first_mode;
    Eigen::MatrixXd star = Eigen::MatrixXd::Identity(m, m);
    if (cx.o.has("star")) {
        const auto s = parse_matrices(cx.o.str("star"));
        if (s.size() != 1 || s[0].rows() != m) throw InputError("--star must be one m_p x m_p matrix");
        star = s[0];
    }
    const ModelManifold dual = hodge ? hodge_dual(mm, star) : ModelManifold{};
    struct Row {
        UnitarityReport u;
        FunctionalEquationReport f;
        double h = -1;
        std::string error;
    };
    std::vector<Row> rows(pts.size());
    sweep(pts.size(), std::uint64_t(cx.o.integer("seed", 0)), [&](std::size_t k) {
        try {
            rows[k].u = check_unitarity(mm, pts[k], ScatteringSector::alpha, so);
            rows[k].f = check_functional_equation(mm, pts[k], ScatteringSector::alpha, so);
            if (hodge) rows[k].h = check_hodge_commutation(mm, dual, star, pts[k], so);
        } catch (const Error& e) {
            rows[k].error = e.what();
        }
    });
    ResultTable t;
    t.provenance = cx.prov;
    t.provenance.emplace_back("threshold", fmt(thr));
    t.columns = {"re_z",        "im_z", "unitarity", "conjugation", "symmetry", "functional_equation",
                 "cylinder",    "hodge", "status"};
    bool failed = false, regime = false;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const Row& r = rows[k];
        std::string status = "ok";
        if (!r.error.empty()) {
            status = "error: " + r.error;
            regime = true;
        } else {
            const bool bad = r.u.unitarity > thr || r.u.conjugation > thr || r.f.defect > thr ||
                             r.f.cylinder_defect > thr || r.h > thr;
            if (bad) status = "fail", failed = true;
        }
        t.add_row({pts[k].real(), pts[k].imag(), r.u.unitarity, r.u.conjugation, r.u.symmetry, r.f.defect,
                   r.f.cylinder_defect, r.h, status});
    }
    t.write_csv(cx.out);
    return failed ? Exit::check_failed : regime ? Exit::regime_error : Exit::ok;
}

int cmd_resonances(Context& cx) {
    const auto mm = config_model(cx.config);
    const auto sector = parse_sector(cx.o.str("sector", "alpha"));
    const Rect r = parse_rect(cx.o.str("rect"));
    const auto so = scattering_options(cx.o);
    const bool residue = cx.o.flag("residue", true);
    const double thr = cx.o.num("threshold", 1e-8);
    PoleSearch ps;
    bool complete = true;
    try {
        ps = find_resonances(mm, r, sector, {}, so);
    } catch (const IncompletePoleSearchError& e) {
        ps = e.partial;
        complete = false;
        cx.err << "gcusp: " << e.what() << '\n';
    }
    std::vector<double> ratio(ps.poles.size(), -1.0);
    bool ranks = true;
    if (residue)
        for (std::size_t i = 0; i < ps.poles.size(); ++i) {
            const auto rr = resonance_residue(mm, ps.poles[i].z, 1e-2, 64, sector, so);
            ratio[i] = rr.rank_ratio;
            ranks = ranks && rr.rank_ratio <= thr && rr.simple;
        }
    write_zero_table(cx, ps.poles, ps.winding, complete, ratio, residue ? "rank_ratio" : "");
    return complete && ranks && lower_sheet_ok(ps.poles) ? Exit::ok : Exit::check_failed;
}

int cmd_tail_check(Context& cx) {
    const auto mm = config_model(cx.config);
    const cplx z = cx.o.z("z");
    const auto r = tail_decay_check(mm, z, scattering_options(cx.o));
    json j;
    j["z"] = format_complex(z);
    j["kappa"] = r.kappa;
    j["required"] = r.required;
    j["log_constant"] = r.log_constant;
    j["window"] = json::array({r.x_lo, r.x_hi});
    j["amplitude"] = complex_json(r.amplitude);
    j["below_noise"] = r.below_noise;
    j["passed"] = r.passed;
    write_report(cx.out, j, cx.prov);
    return r.passed ? Exit::ok : Exit::check_failed;
}

int cmd_gluing_check(Context& cx) {
    const auto mm = config_model(cx.config);
    GluingOptions go;
    go.re_u = cx.o.num("re-u", go.re_u);
    go.x_end = cx.o.num("x-end", go.x_end);
    go.h = cx.o.num("step", go.h);
    const auto ladder = parse_doubles(cx.o.str("im-u", "10,20,40,80"));
    const double thr = cx.o.num("threshold", 1e-6);
    std::vector<GluingReport> rep(ladder.size());
    for (std::size_t k = 0; k < ladder.size(); ++k) rep[k] = gluing_parametrix_check(mm, ladder[k], go);
    double lo = 1e300, hi = 0.0;
    bool passed = true;
    ResultTable t;
    t.provenance = cx.prov;
    t.columns = {"im_u",        "t_norm",          "t_norm_scaled",     "diagonal_band_max",
                 "formula_defect", "glued_vs_direct", "neumann_converges", "nodes"};
    for (const auto& r : rep) {
        lo = std::min(lo, r.t_norm_scaled);
        hi = std::max(hi, r.t_norm_scaled);
        passed = passed && r.diagonal_band_max == 0.0 && r.glued_vs_direct <= thr;
        t.add_row({r.im_u, r.t_norm, r.t_norm_scaled, r.diagonal_band_max, r.formula_defect, r.glued_vs_direct,
                   (long long)r.neumann_converges, (long long)r.nodes});
    }
    const double variation = hi / lo;
    passed = passed && variation <= 2.0;
    t.provenance.emplace_back("scaled_norm_variation", fmt(variation));
    t.write_csv(cx.out);
    return passed ? Exit::ok : Exit::check_failed;
}

}  // namespace

// ---------------------------------------------------------------- parsing

Command parse_command(const std::string& name) {
    for (const auto& e : command_table())
        if (name == e.name) return e.command;
    throw ParseError("unknown command '" + name + "'");
}

std::string command_name(Command c) { return info(c).name; }

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& e : command_table()) v.push_back(e.name);
        return v;
    }();
    return names;
}

const std::vector<std::string>& command_options(Command c) { return info(c).options; }

const std::vector<std::string>& common_options() {
    static const std::vector<std::string> v = {"model", "output", "tol", "threshold", "seed"};
    return v;
}

cplx parse_complex(const std::string& s) {
    static const std::regex re(R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?(?:([+-])((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?i)?$)");
    static const std::regex im_only(R"(^([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?i$)");
    std::smatch m;
    if (s.empty()) throw ParseError("empty complex number");
    if (std::regex_match(s, m, im_only)) {
        const double v = m[2].matched ? parse_double(m[2].str(), "imaginary part") : 1.0;
        return {0.0, m[1].str() == "-" ? -v : v};
    }
    if (std::regex_match(s, m, re) && m[1].matched) {
        const double a = parse_double(m[1].str(), "real part");
        if (!m[2].matched) return {a, 0.0};
        const double v = m[3].matched ? parse_double(m[3].str(), "imaginary part") : 1.0;
        return {a, m[2].str() == "-" ? -v : v};
    }
    throw ParseError("cannot parse complex number '" + s + "' (expected a+bi without blanks)");
}

std::string format_complex(cplx z) {
    std::string s = fmt(z.real());
    const double im = z.imag();
    s += (std::signbit(im) ? "-" : "+") + fmt(std::abs(im)) + "i";
    return s;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> v;
    for (const auto& t : split(s, ',')) v.push_back(parse_double(t, "list entry"));
    if (v.empty()) throw ParseError("empty list");
    return v;
}

Rect parse_rect(const std::string& s) {
    const auto v = parse_doubles(s);
    if (v.size() != 4) throw ParseError("rect needs re0,re1,im0,im1");
    if (!(v[0] < v[1] && v[2] < v[3])) throw InputError("rect corners must be ordered");
    return Rect{v[0], v[1], v[2], v[3]};
}

std::vector<cplx> ZGrid::points() const {
    std::vector<cplx> out;
    for (int k : sheets)
        for (int i = 0; i < steps; ++i) {
            const double re = steps == 1 ? start : start + (end - start) * double(i) / double(steps - 1);
            out.emplace_back(re, im + 2.0 * kPi * double(k));
        }
    return out;
}

ZGrid parse_z_grid(const std::string& spec, const std::string& sheets, double im) {
    const auto f = split(spec, ':');
    if (f.size() != 3) throw ParseError("z-grid must be start:end:steps");
    ZGrid g;
    g.start = parse_double(f[0], "z-grid start");
    g.end = parse_double(f[1], "z-grid end");
    g.steps = int(parse_long(f[2], "z-grid steps"));
    g.im = im;
    g.sheets.clear();
    for (const auto& s : split(sheets, ',')) g.sheets.push_back(int(parse_long(s, "sheet offset")));
    if (g.steps < 1 || g.sheets.empty()) throw InputError("z-grid must be non-empty");
    return g;
}

ModelManifold parse_model(const std::string& text) {
    const pt::ptree tree = parse_ini(text);
    for (const auto& [section, _] : tree)
        if (section != "geometry" && section != "interior" && section != "run")
            throw ParseError("unknown model section [" + section + "]");
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '/'))) return trim(*v);
        return std::nullopt;
    };
    auto num = [&](const std::string& key, double d) { auto v = get(key); return v ? parse_double(*v, key) : d; };
    auto integer = [&](const std::string& key, int d) { auto v = get(key); return v ? int(parse_long(*v, key)) : d; };

    ModelManifold mm;
    auto& g = mm.geometry;
    g.a = num("geometry/a", 1.0);
    g.n = integer("geometry/n", 2);
    g.p = integer("geometry/p", 0);
    if (auto v = get("geometry/mu"); v && !v->empty()) g.mu = parse_doubles(*v);
    g.m_p = integer("geometry/m_p", 1);
    g.m_pm1 = integer("geometry/m_pm1", 0);

    mm.x0 = num("interior/x0", 1.0);
    const std::string warp = get("interior/warp").value_or("power");
    if (warp == "spline") {
        mm.warp.kind = WarpSpec::Kind::spline;
        mm.warp.knots = parse_doubles(get("interior/knots").value_or(""));
        mm.warp.values = parse_doubles(get("interior/values").value_or(""));
    } else if (warp != "power") {
        throw ParseError("warp must be power or spline");
    }
    const std::string bc = get("interior/bc").value_or("dirichlet");
    if (bc == "neumann") mm.inner_bc = InnerBC::neumann;
    else if (bc != "dirichlet") throw ParseError("bc must be dirichlet or neumann");
    if (auto v = get("interior/first_mode")) mm.include_first_mode = parse_bool(*v, "first_mode");
    auto coupling = [&](const std::string& name, CouplingSpec& spec) {
        auto v = get("interior/" + name);
        if (!v) return;
        spec.coeffs = parse_matrices(*v);
        const auto w = parse_doubles(get("interior/" + name + "_window").value_or(fmt(mm.x0) + ",1"));
        if (w.size() != 2) throw ParseError(name + "_window needs lo,hi");
        spec.lo = w[0];
        spec.hi = w[1];
    };
    coupling("v_alpha", mm.coupling_alpha);
    coupling("v_beta", mm.coupling_beta);
    mm.validate();
    return mm;
}

ModelManifold load_model(const std::string& path) { return parse_model(read_file(path)); }

RunConfig RunConfig::from_options(const std::string& command, const std::map<std::string, std::string>& cli) {
    RunConfig c;
    c.command = parse_command(command);
    c.options = cli;
    if (auto it = cli.find("model"); it != cli.end()) {
        c.model_text = read_file(it->second);
        const pt::ptree tree = parse_ini(c.model_text);
        if (auto run = tree.get_child_optional("run"))
            for (const auto& [k, v] : *run) c.options.emplace(k, trim(v.data()));  // cli wins
    }
    if (const char* s = std::getenv("GCUSP_TOL_SCALE")) c.tol_scale = parse_double(s, "GCUSP_TOL_SCALE");
    c.validate();
    return c;
}

void RunConfig::validate() const {
    const auto& allowed = command_options(command);
    const auto& common = common_options();
    for (const auto& [k, v] : options) {
        if (k == "command") {
            if (v != command_name(command)) throw InputError("model file [run] command '" + v + "' does not match");
            continue;
        }
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end() &&
            std::find(common.begin(), common.end(), k) == common.end())
            throw InputError("option --" + k + " does not apply to " + command_name(command));
    }
    if (!(tol_scale > 0.0)) throw InputError("tolerance scale must be positive");
    Options o(*this);
    if (o.has("tol") && !(o.num("tol") > 0.0)) throw InputError("--tol must be positive");
    if (o.has("threshold") && !(o.num("threshold") > 0.0)) throw InputError("--threshold must be positive");
    if (o.has("seed") && o.integer("seed", 0) < 0) throw InputError("--seed must be non-negative");
    if (o.has("z-grid")) (void)parse_z_grid(o.str("z-grid"), o.str("sheets", "0"), o.num("im", 0.0));
    if (o.has("output")) {
        std::ofstream probe(o.str("output"), std::ios::app);
        if (!probe) throw InputError("output path '" + o.str("output") + "' is not writable");
    }
}

std::string RunConfig::canonical() const {
    std::ostringstream s;
    s << "command=" << command_name(command) << '\n';
    for (const auto& [k, v] : options)
        if (k != "output") s << k << '=' << v << '\n';
    s << "tol_scale=" << fmt(tol_scale) << '\n' << model_text;
    return s.str();
}

std::uint64_t RunConfig::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------- tables

void ResultTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw InputError("row arity does not match the columns");
    rows.push_back(std::move(row));
}

void ResultTable::write_csv(std::ostream& os) const {
    for (const auto& [k, v] : provenance) os << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) os << ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::string>) {
                        if (v.find_first_of(",\"\n") == std::string::npos) os << v;
                        else {
                            os << '"';
                            for (char ch : v) os << (ch == '"' ? "\"\"" : std::string(1, ch));
                            os << '"';
                        }
                    } else if constexpr (std::is_same_v<T, double>) {
                        os << fmt(v);
                    } else {
                        os << v;
                    }
                },
                r[i]);
        }
        os << '\n';
    }
}

void write_function_csv(std::ostream& os, const std::vector<double>& coordinate, const std::vector<cplx>& values,
                        const std::vector<std::pair<std::string, std::string>>& provenance) {
    if (coordinate.size() != values.size()) throw InputError("coordinate and value lengths differ");
    for (const auto& [k, v] : provenance) os << "# " << k << ": " << v << '\n';
    os << "coordinate,value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        os << fmt(coordinate[i]) << ",\"" << fmt(values[i].real()) << ',' << fmt(values[i].imag()) << "\"\n";
}

// ---------------------------------------------------------------- dispatch

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    Options o(config);
    std::ofstream file;
    std::ostream* sink = &out;
    if (o.has("output")) {
        file.open(o.str("output"), std::ios::trunc);
        if (!file) throw InputError("cannot write '" + o.str("output") + "'");
        sink = &file;
    }
    std::ostringstream buffer;  // written only on completion
    Context cx{config, o, provenance(config, o), buffer, err};
    int status = Exit::ok;
    switch (config.command) {
        case Command::eval_special: status = cmd_eval_special(cx); break;
        case Command::weber_roundtrip: status = cmd_weber_roundtrip(cx); break;
        case Command::resolvent_kernel: status = cmd_resolvent_kernel(cx); break;
        case Command::resolvent_apply: status = cmd_resolvent_apply(cx); break;
        case Command::poles: status = cmd_poles(cx); break;
        case Command::limiting_absorption: status = cmd_limiting_absorption(cx); break;
        case Command::mode_spectrum: status = cmd_mode_spectrum(cx); break;
        case Command::perron_check: status = cmd_perron_check(cx); break;
        case Command::scatter: status = cmd_scatter(cx); break;
        case Command::verify_thm2: status = cmd_verify_thm2(cx); break;
        case Command::resonances: status = cmd_resonances(cx); break;
        case Command::tail_check: status = cmd_tail_check(cx); break;
        case Command::gluing_check: status = cmd_gluing_check(cx); break;
    }
    *sink << buffer.str();
    sink->flush();
    return status;
}

int run_command(const std::string& command, const std::map<std::string, std::string>& options, std::ostream& out,
                std::ostream& err) {
    try {
        const RunConfig c = RunConfig::from_options(command, options);
        return run(c, out, err);
    } catch (const ParseError& e) {
        err << "gcusp: parse error: " << e.what() << '\n';
        return Exit::parse_error;
    } catch (const InputError& e) {
        err << "gcusp: invalid input: " << e.what() << '\n';
        return Exit::validation_error;
    } catch (const DomainError& e) {
        err << "gcusp: invalid input: " << e.what() << '\n';
        return Exit::validation_error;
    } catch (const Error& e) {
        err << "gcusp: outside the numerical regime: " << e.what() << '\n';
        return Exit::regime_error;
    } catch (const std::exception& e) {
        err << "gcusp: internal error: " << e.what() << '\n';
        return Exit::regime_error;
    }
}

}  // namespace gcusp::cli
