#pragma once

// Fixture catalog: a JSON file of surface descriptions (forms, punctures,
// parameters, period-closing rules, scan regions, symmetries and committed
// expectations) plus the instantiation code that turns an entry into a
// SurfaceData ready for evaluation and scanning.
//
// Parametric entries are stored once and expanded into instances named
// "<id>:<param>=<value>"; parameters that close periods are solved at
// instantiation time, never stored.

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "harmonic/end_type.hpp"
#include "harmonic/expr.hpp"
#include "harmonic/periods.hpp"
#include "harmonic/verify.hpp"

namespace harmonic {

struct CycleSpec {
    bool is_interval = true;
    double lo = 0.0, hi = 0.0;   // collapsed interval between branch points
    int puncture = 0;            // or: residue loop around this puncture
    int orientation = 1;
};

struct ClosingSpec {
    std::string unknown;
    int form_index = 0;
    CycleSpec cycle;
    double bracket_lo = -1.0, bracket_hi = 1.0;
};

struct SymmetrySpec {
    std::string map;     // rotate | conjugate | invert-conjugate | sheet-flip |
                         // conjugate-keep-w | conjugate-flip-w
    std::string order = "2";  // integer expression; may use instance parameters
    std::string linear;       // "rotation" (about x3 by 2*pi/order) or "diag(a,b,c)"
};

struct PunctureSpec {
    std::string expr;    // "inf", a point expression, or a polynomial whose
    bool roots = false;  // roots are all punctures (roots = true)
};

struct EndExpectation {
    std::array<std::string, 3> type;  // integers or parameter expressions
};

struct FixtureExpectation {
    std::vector<EndExpectation> ends;  // aligned with the puncture specs
    std::string curvature_multiple;    // integer expression; empty = not asserted
    std::optional<bool> regular, embedded, proper;
    std::optional<int> bounded_end;    // puncture-spec index that fails the probe
};

struct FixtureSpec {
    std::string id, family, note;
    bool curve = false;
    std::string branch;          // polynomial expression when curve
    std::string basepoint_w;     // w at the basepoint when curve
    std::array<std::string, 3> forms;
    std::vector<PunctureSpec> punctures;
    std::string basepoint = "1";
    std::map<std::string, double> params;
    std::string parameter_name;           // optional instantiation parameter
    std::vector<double> parameter_values;
    std::vector<ClosingSpec> closings;
    MeshRegion region;
    std::vector<SymmetrySpec> symmetries;
    FixtureExpectation expect;
};

struct InstantiatedFixture {
    std::string instance_id;
    const FixtureSpec* spec = nullptr;
    std::map<std::string, double> bindings;
    SurfaceData surface;
    std::vector<ClosingResult> closings;
    std::vector<std::array<int, 3>> expected_ends;  // aligned with surface.punctures
    std::optional<int> curvature_multiple;
    std::optional<std::size_t> bounded_puncture;
    MeshRegion region;
    std::vector<SymmetryDescriptor> symmetries;
};

inline std::string data_dir() {
    if (const char* env = std::getenv("HARMONIC_DATA_DIR")) return env;
#ifdef HARMONIC_DATA_DIR
    return HARMONIC_DATA_DIR;
#else
    return "data";
#endif
}

namespace detail {

inline double num_format_check(double v, const std::string& what) {
    if (!(v == v)) throw SchemaError(what + " is not a number");
    return v;
}

inline int int_expr(const std::string& text, const std::map<std::string, double>& bindings,
                    const std::string& what) {
    Complex c = ExprParser::parse_constant(text, bindings);
    if (std::abs(c.imag()) > 1e-9) throw SchemaError(what + " must be a real integer");
    double r = c.real();
    int k = int(std::lround(r));
    if (std::abs(r - k) > 1e-9) throw SchemaError(what + " must be an integer, got " + text);
    return k;
}

inline Mat3 parse_linear(const std::string& text, int order) {
    if (text == "rotation") return rotation_about_x3(2.0 * kPi / order);
    double a = 0, b = 0, c = 0;
    if (std::sscanf(text.c_str(), "diag(%lf,%lf,%lf)", &a, &b, &c) == 3)
        return diag_matrix(a, b, c);
    throw SchemaError("unknown symmetry linear part '" + text + "'");
}

// A parsed expression that must be a polynomial; a constant denominator
// (e.g. from literal fractions) is folded into the coefficients.
inline CPoly as_poly(const WValue& v, const std::string& what) {
    if (v.has_w() || !v.a.is_poly()) throw SchemaError(what + " must be a polynomial in z");
    Complex den = v.a.den.coeffs.empty() ? Complex(1) : v.a.den.coeffs[0];
    return (Complex(1) / den) * v.a.num;
}

inline SymmetryDescriptor::DomainMap parse_domain_map(const std::string& name) {
    using M = SymmetryDescriptor::DomainMap;
    if (name == "rotate") return M::Rotate;
    if (name == "conjugate") return M::Conjugate;
    if (name == "invert-conjugate") return M::InvertConjugate;
    if (name == "sheet-flip") return M::SheetFlip;
    if (name == "conjugate-keep-w") return M::ConjugateKeepW;
    if (name == "conjugate-flip-w") return M::ConjugateFlipW;
    throw SchemaError("unknown symmetry map '" + name + "'");
}

}  // namespace detail

class Catalog {
  public:
    static std::string default_path() { return data_dir() + "/catalog.json"; }

    static Catalog load(const std::string& path = default_path()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw SchemaError("cannot open catalog file " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        Catalog c;
        c.text_ = buf.str();
        c.parse();
        return c;
    }

    const std::string& text() const { return text_; }

    // The canonical serialization: two-space indent, keys sorted. The
    // committed file must round-trip byte for byte.
    std::string canonical_text() const {
        return nlohmann::json::parse(text_).dump(2) + "\n";
    }

    const std::vector<FixtureSpec>& specs() const { return specs_; }

    const FixtureSpec& spec(const std::string& id) const {
        for (const auto& s : specs_)
            if (s.id == id) return s;
        throw SchemaError("no catalog entry named '" + id + "'");
    }

    std::vector<std::string> instance_ids() const {
        std::vector<std::string> out;
        for (const auto& s : specs_) {
            if (s.parameter_name.empty()) {
                out.push_back(s.id);
                continue;
            }
            for (double v : s.parameter_values) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%s:%s=%g", s.id.c_str(),
                              s.parameter_name.c_str(), v);
                out.push_back(buf);
            }
        }
        return out;
    }

    InstantiatedFixture instantiate(const std::string& instance_id,
                                    double quad_tol = kQuadTol) const {
        std::string base = instance_id;
        std::map<std::string, double> bindings;
        auto colon = instance_id.find(':');
        if (colon != std::string::npos) {
            base = instance_id.substr(0, colon);
            std::string assign = instance_id.substr(colon + 1);
            auto eq = assign.find('=');
            if (eq == std::string::npos)
                throw SchemaError("malformed instance id '" + instance_id + "'");
            bindings[assign.substr(0, eq)] = std::stod(assign.substr(eq + 1));
        }
        const FixtureSpec& sp = spec(base);
        if (!sp.parameter_name.empty() && !bindings.count(sp.parameter_name))
            throw UnresolvedParam("entry '" + base + "' needs parameter " + sp.parameter_name +
                                  "; use an instance id like " + base + ":" +
                                  sp.parameter_name + "=<value>");
        for (const auto& [k, v] : sp.params) bindings.emplace(k, v);

        InstantiatedFixture fx;
        fx.instance_id = instance_id;
        fx.spec = &sp;

        // Seed unsolved closing parameters at their bracket midpoints, then
        // solve each closing condition in order.
        for (const auto& cl : sp.closings)
            bindings[cl.unknown] = 0.5 * (cl.bracket_lo + cl.bracket_hi);
        for (const auto& cl : sp.closings) {
            auto period_of = [&](double x) {
                std::map<std::string, double> b2 = bindings;
                b2[cl.unknown] = x;
                SurfaceData s2 = build_surface(sp, b2, instance_id);
                return real_period(s2, cl.form_index, make_cycle(cl.cycle), quad_tol);
            };
            ClosingResult r = close_period(period_of, cl.unknown, cl.bracket_lo, cl.bracket_hi);
            bindings[cl.unknown] = r.value;
            fx.closings.push_back(r);
        }

        fx.bindings = bindings;
        fx.surface = build_surface(sp, bindings, instance_id);
        expand_punctures(sp, bindings, fx);
        if (!sp.expect.curvature_multiple.empty())
            fx.curvature_multiple =
                detail::int_expr(sp.expect.curvature_multiple, bindings, "curvature_multiple");
        fx.region = sp.region;
        for (const auto& sy : sp.symmetries) {
            SymmetryDescriptor d;
            d.map = detail::parse_domain_map(sy.map);
            d.order = detail::int_expr(sy.order, bindings, "symmetry order");
            d.linear = detail::parse_linear(sy.linear, d.order);
            d.label = sy.map;
            fx.symmetries.push_back(d);
        }
        return fx;
    }

    std::vector<InstantiatedFixture> instantiate_all() const {
        std::vector<InstantiatedFixture> out;
        for (const std::string& id : instance_ids()) out.push_back(instantiate(id));
        return out;
    }

    static Cycle make_cycle(const CycleSpec& cs) {
        if (cs.is_interval) return CollapsedInterval{cs.lo, cs.hi, cs.orientation};
        return PunctureLoop{std::size_t(cs.puncture), cs.orientation};
    }

    // Build surface data straight from expression strings, using the same
    // grammar as the catalog file. Punctures are "inf" or point expressions;
    // an empty branch selects the sphere; an empty basepoint_w defaults to
    // the principal square root of the branch polynomial at the basepoint.
    static SurfaceData from_expressions(const std::array<std::string, 3>& forms,
                                        const std::vector<std::string>& punctures,
                                        const std::string& basepoint,
                                        const std::string& branch = {},
                                        const std::string& basepoint_w = {},
                                        const std::map<std::string, double>& bindings = {}) {
        FixtureSpec sp;
        sp.id = "inline";
        sp.curve = !branch.empty();
        sp.branch = branch;
        sp.basepoint_w = basepoint_w;
        sp.forms = forms;
        for (const std::string& p : punctures) sp.punctures.push_back(PunctureSpec{p, false});
        sp.basepoint = basepoint;
        return build_surface(sp, bindings, "inline");
    }

  private:
    std::string text_;
    std::vector<FixtureSpec> specs_;

    static SurfaceData build_surface(const FixtureSpec& sp,
                                     const std::map<std::string, double>& bindings,
                                     const std::string& label) {
        SurfaceData s;
        s.label = label;
        std::optional<CRational> branch_rat;
        if (sp.curve) {
            ExprParser bp(sp.branch, bindings, std::nullopt);
            CPoly branch_poly = detail::as_poly(bp.parse(), "branch");
            Complex z0 = ExprParser::parse_constant(sp.basepoint, bindings);
            Complex w0 = sp.basepoint_w.empty()
                             ? std::sqrt(branch_poly(z0))
                             : ExprParser::parse_constant(sp.basepoint_w, bindings);
            s.domain = Domain::hyperelliptic(branch_poly, z0, w0);
            branch_rat = CRational(branch_poly, CPoly({Complex(1, 0)}));
            s.basepoint = SheetPoint{z0, +1};
        } else {
            s.domain = Domain::sphere();
            s.basepoint =
                SheetPoint{ExprParser::parse_constant(sp.basepoint, bindings), +1};
        }
        for (int k = 0; k < 3; ++k) {
            ExprParser fp(sp.forms[std::size_t(k)], bindings, branch_rat);
            WValue v = fp.parse();
            s.forms[std::size_t(k)].a = v.a;
            // The parsed value is a(z) + b(z)*w while the form convention is
            // (a + b/w) dz; multiplying the w coefficient by p = w^2 converts,
            // and the branch factor is cancelled when it divides out exactly.
            if (!v.b.is_zero()) {
                CRational bw = v.b * *branch_rat;
                if (bw.den.degree() > 0) {
                    auto [q, rem] = divmod(bw.num, bw.den);
                    if (rem.coeff_scale() <= 1e-10 * std::max(1.0, bw.num.coeff_scale()))
                        bw = CRational(q, CPoly({Complex(1, 0)}));
                }
                s.forms[std::size_t(k)].b = bw;
            }
        }
        for (const auto& ps : sp.punctures) {
            if (!ps.roots) {
                if (ps.expr == "inf")
                    s.punctures.push_back(SurfacePoint::infinity());
                else
                    s.punctures.push_back(
                        SurfacePoint::finite(ExprParser::parse_constant(ps.expr, bindings)));
                continue;
            }
            for (const Complex& r : root_list(ps.expr, bindings))
                s.punctures.push_back(SurfacePoint::finite(r));
        }
        return s;
    }

    static std::vector<Complex> root_list(const std::string& poly_expr,
                                          const std::map<std::string, double>& bindings) {
        ExprParser pp(poly_expr, bindings, std::nullopt);
        CPoly poly = detail::as_poly(pp.parse(), "puncture root family");
        std::vector<Complex> roots;
        for (const auto& cl : poly_roots(poly)) {
            if (cl.multiplicity != 1)
                throw SchemaError("puncture root family has a repeated root");
            roots.push_back(cl.value);
        }
        std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
            if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
            return a.imag() < b.imag();
        });
        return roots;
    }

    static void expand_punctures(const FixtureSpec& sp,
                                 const std::map<std::string, double>& bindings,
                                 InstantiatedFixture& fx) {
        if (sp.expect.ends.size() != sp.punctures.size())
            throw SchemaError("entry '" + sp.id + "': expected end list must match punctures");
        std::size_t flat = 0;
        for (std::size_t j = 0; j < sp.punctures.size(); ++j) {
            std::array<int, 3> t{};
            for (int i = 0; i < 3; ++i)
                t[std::size_t(i)] = detail::int_expr(sp.expect.ends[j].type[std::size_t(i)],
                                                     bindings, "end type entry");
            std::sort(t.begin(), t.end());
            std::size_t count =
                sp.punctures[j].roots ? root_list(sp.punctures[j].expr, bindings).size() : 1;
            for (std::size_t c = 0; c < count; ++c) fx.expected_ends.push_back(t);
            if (sp.expect.bounded_end && std::size_t(*sp.expect.bounded_end) == j)
                fx.bounded_puncture = flat;  // first puncture of the flagged spec entry
            flat += count;
        }
        if (fx.expected_ends.size() != fx.surface.punctures.size())
            throw SchemaError("entry '" + sp.id + "': end expansion mismatch");
    }

    void parse() {
        nlohmann::json j = nlohmann::json::parse(text_);
        if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
            throw SchemaError("catalog schema_version must be 1");
        for (const auto& e : j.at("fixtures")) {
            FixtureSpec sp;
            sp.id = e.at("id").get<std::string>();
            sp.family = e.value("family", std::string{});
            sp.note = e.value("note", std::string{});
            if (e.contains("domain") && e["domain"].is_object()) {
                sp.curve = true;
                sp.branch = e["domain"].at("branch").get<std::string>();
                sp.basepoint_w = e["domain"].at("basepoint_w").get<std::string>();
            }
            const auto& fs = e.at("forms");
            if (!fs.is_array() || fs.size() != 3)
                throw SchemaError("entry '" + sp.id + "': forms must be three expressions");
            for (int k = 0; k < 3; ++k)
                sp.forms[std::size_t(k)] = fs[std::size_t(k)].get<std::string>();
            for (const auto& p : e.at("punctures")) {
                PunctureSpec ps;
                if (p.is_object()) {
                    ps.roots = true;
                    ps.expr = p.at("roots_of").get<std::string>();
                } else {
                    ps.expr = p.get<std::string>();
                }
                sp.punctures.push_back(ps);
            }
            sp.basepoint = e.at("basepoint").get<std::string>();
            if (e.contains("params"))
                for (auto it = e["params"].begin(); it != e["params"].end(); ++it)
                    sp.params[it.key()] =
                        detail::num_format_check(it.value().get<double>(), "param " + it.key());
            if (e.contains("parameter")) {
                sp.parameter_name = e["parameter"].at("name").get<std::string>();
                for (const auto& v : e["parameter"].at("values"))
                    sp.parameter_values.push_back(v.get<double>());
            }
            if (e.contains("solve"))
                for (const auto& c : e["solve"]) {
                    ClosingSpec cl;
                    cl.unknown = c.at("unknown").get<std::string>();
                    cl.form_index = c.at("form").get<int>();
                    if (c.contains("interval")) {
                        cl.cycle.is_interval = true;
                        cl.cycle.lo = c["interval"][0].get<double>();
                        cl.cycle.hi = c["interval"][1].get<double>();
                    } else {
                        cl.cycle.is_interval = false;
                        cl.cycle.puncture = c.at("loop").get<int>();
                    }
                    cl.bracket_lo = c.at("bracket")[0].get<double>();
                    cl.bracket_hi = c.at("bracket")[1].get<double>();
                    sp.closings.push_back(cl);
                }
            if (e.contains("region")) {
                const auto& r = e["region"];
                sp.region.r_min = r.value("r_min", sp.region.r_min);
                sp.region.r_max = r.value("r_max", sp.region.r_max);
                sp.region.puncture_radius = r.value("puncture_radius", sp.region.puncture_radius);
                sp.region.n_theta = r.value("n_theta", sp.region.n_theta);
            }
            if (e.contains("symmetries"))
                for (const auto& sj : e["symmetries"]) {
                    SymmetrySpec sy;
                    sy.map = sj.at("map").get<std::string>();
                    if (sj.contains("order")) {
                        const auto& o = sj["order"];
                        sy.order =
                            o.is_string() ? o.get<std::string>() : std::to_string(o.get<int>());
                    }
                    sy.linear = sj.at("linear").get<std::string>();
                    sp.symmetries.push_back(sy);
                }
            const auto& ex = e.at("expect");
            for (const auto& en : ex.at("ends")) {
                EndExpectation ee;
                for (int i = 0; i < 3; ++i) {
                    const auto& v = en[std::size_t(i)];
                    ee.type[std::size_t(i)] =
                        v.is_string() ? v.get<std::string>() : std::to_string(v.get<int>());
                }
                sp.expect.ends.push_back(ee);
            }
            if (ex.contains("curvature_multiple")) {
                const auto& cm = ex["curvature_multiple"];
                sp.expect.curvature_multiple =
                    cm.is_string() ? cm.get<std::string>() : std::to_string(cm.get<int>());
            }
            if (ex.contains("regular")) sp.expect.regular = ex["regular"].get<bool>();
            if (ex.contains("embedded")) sp.expect.embedded = ex["embedded"].get<bool>();
            if (ex.contains("proper")) sp.expect.proper = ex["proper"].get<bool>();
            if (ex.contains("bounded_end")) sp.expect.bounded_end = ex["bounded_end"].get<int>();
            specs_.push_back(std::move(sp));
        }
    }
};

// ---------------------------------------------------------------------------
// Classification manifest rendering
// ---------------------------------------------------------------------------

inline std::string format_end_tuple(const EndTuple& t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "(%d,%d,%d)", t[0], t[1], t[2]);
    return buf;
}

// Text rendering of the complete-configuration tables for the four
// supported queries; committed to data/classification_manifest.txt and
// compared byte for byte.
inline std::string format_budget_tables() {
    std::ostringstream os;
    os << "complete embedded configurations by total curvature and genus\n";
    const std::array<std::pair<int, int>, 4> queries{{{1, 0}, {2, 0}, {2, 1}, {3, 1}}};
    for (auto [mult, genus] : queries) {
        os << "\nquery: total curvature -" << 2 * mult << "*pi, genus " << genus << "\n";
        std::vector<EndFamily> fams = classify_budget(-2.0 * kPi * mult, genus);
        if (fams.empty()) {
            os << "  (none)\n";
            continue;
        }
        for (const EndFamily& f : fams) {
            os << " ";
            for (const EndTuple& t : f) os << " " << format_end_tuple(t);
            os << "\n";
        }
    }
    return os.str();
}

inline std::string manifest_path() { return data_dir() + "/classification_manifest.txt"; }

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace harmonic
