// Command-line front end for the harmonic-surface library.
//
//   list           catalog instances
//   info           ends, curvature budget, admissibility verdicts, closings
//   classify       complete embedded end configurations for a curvature budget
//   curvature      numeric total curvature against the quantized budget
//   close-periods  period solving and residual report
//   mesh           triangulate a fixture and write a Wavefront OBJ
//   check          compare computed invariants against committed expectations
//   report         fast invariant sweep across the whole catalog
//
// Targets are catalog ids (`info catenoid`, `info cusp-k --param k=3`) or
// inline data (`info --form "1, i, 1/z" --punctures "0,inf" --basepoint 2`).
// Exit codes: 0 pass, 1 check failed, 2 usage error, 3 non-convergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "harmonic/catalog.hpp"
#include "harmonic/curvature.hpp"
#include "harmonic/end_type.hpp"
#include "harmonic/evaluation.hpp"
#include "harmonic/mesh.hpp"
#include "harmonic/periods.hpp"
#include "harmonic/verify.hpp"

using namespace harmonic;
using nlohmann::json;

namespace {

constexpr double kPeriodPassTol = 1e-9;   // max |Re period| for a closed surface
constexpr double kCurvaturePassTol = 0.01;  // relative deviation from the budget

std::string fmt_complex(Complex c) {
    std::ostringstream os;
    os << std::setprecision(12);
    if (std::abs(c.imag()) < 1e-14) {
        os << c.real();
    } else if (std::abs(c.real()) < 1e-14) {
        os << c.imag() << "i";
    } else {
        os << c.real() << (c.imag() < 0 ? " - " : " + ") << std::abs(c.imag()) << "i";
    }
    return os.str();
}

std::string fmt_point(const SurfacePoint& p, const Domain& d) {
    if (p.at_infinity) return "infinity";
    std::string s = "z=" + fmt_complex(p.z);
    if (d.is_hyperelliptic() && !d.is_branch_point(p.z))
        s += p.sheet > 0 ? " (sheet +1)" : " (sheet -1)";
    return s;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    for (std::string& s : out) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(0, 1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Target resolution: a catalog instance or an inline form triple.

struct TargetOptions {
    std::string fixture;
    std::vector<std::string> params;  // "k=3"
    std::string form;                 // inline triple "1, i, 1/z"
    std::string curve;                // inline branch polynomial (genus 1)
    std::string punctures = "inf";
    std::string basepoint = "1";
    double tol = kQuadTol;
};

struct Target {
    std::string name;
    SurfaceData surface;
    std::optional<InstantiatedFixture> fx;
    MeshRegion region;
};

void add_target_flags(CLI::App* cmd, TargetOptions& t, bool allow_inline) {
    cmd->add_option("id", t.fixture, "catalog entry or instance id");
    cmd->add_option("--fixture", t.fixture, "catalog entry or instance id");
    cmd->add_option("--param", t.params, "instantiation parameter, e.g. k=3 (repeatable)");
    cmd->add_option("--tol", t.tol, "quadrature tolerance")->capture_default_str();
    if (allow_inline) {
        cmd->add_option("--form", t.form,
                        "inline form triple, comma separated rational expressions in z "
                        "(and w with --curve), e.g. \"1, i, 1/z\"");
        cmd->add_option("--curve", t.curve,
                        "branch polynomial p(z) for the curve w^2 = p(z); omit for the sphere");
        cmd->add_option("--punctures", t.punctures,
                        "comma separated puncture list; entries are point expressions or inf")
            ->capture_default_str();
        cmd->add_option("--basepoint", t.basepoint, "integration basepoint")
            ->capture_default_str();
    }
}

std::pair<std::string, double> parse_assignment(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos)
        throw SchemaError("--param expects name=value, got '" + text + "'");
    return {text.substr(0, eq), std::stod(text.substr(eq + 1))};
}

Target resolve_target(const Catalog& cat, const TargetOptions& t) {
    Target out;
    if (!t.form.empty()) {
        std::vector<std::string> parts = split_list(t.form, ',');
        if (parts.size() != 3)
            throw SchemaError("--form needs exactly three comma separated expressions");
        std::map<std::string, double> bindings;
        for (const std::string& p : t.params) bindings.insert(parse_assignment(p));
        out.name = "inline";
        out.surface = Catalog::from_expressions({parts[0], parts[1], parts[2]},
                                                split_list(t.punctures, ','), t.basepoint,
                                                t.curve, /*basepoint_w=*/{}, bindings);
        out.region = MeshRegion{};
        return out;
    }
    if (t.fixture.empty()) throw SchemaError("no target: give a fixture id or --form");
    std::string id = t.fixture;
    if (!t.params.empty()) {
        if (id.find(':') != std::string::npos || t.params.size() > 1)
            throw SchemaError("give the instantiation parameter once, via --param or the id");
        auto [name, value] = parse_assignment(t.params.front());
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s:%s=%g", id.c_str(), name.c_str(), value);
        id = buf;
    }
    out.fx = cat.instantiate(id, t.tol);
    out.name = out.fx->instance_id;
    out.surface = out.fx->surface;
    out.region = out.fx->region;
    return out;
}

// ---------------------------------------------------------------------------
// Shared computations.

struct PeriodCheck {
    std::vector<std::pair<std::string, double>> closings;  // name -> residual
    PeriodReport report;
    bool pass = true;
};

PeriodCheck run_period_check(const Target& tgt, double tol) {
    PeriodCheck pc;
    const SurfaceData& s = tgt.surface;
    std::vector<std::pair<std::string, Cycle>> cycles;
    for (std::size_t j = 0; j < s.punctures.size(); ++j)
        cycles.emplace_back("loop " + fmt_point(s.punctures[j], s.domain),
                            PunctureLoop{j, +1});
    if (tgt.fx && tgt.fx->spec) {
        for (const ClosingSpec& cl : tgt.fx->spec->closings) {
            if (cl.cycle.is_interval) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "interval [%g, %g]", cl.cycle.lo, cl.cycle.hi);
                cycles.emplace_back(buf, Catalog::make_cycle(cl.cycle));
            }
        }
        for (const ClosingResult& r : tgt.fx->closings) {
            pc.closings.emplace_back(r.unknown, r.residual);
            if (r.residual >= kPeriodPassTol) pc.pass = false;
        }
    }
    pc.report = period_report(s, cycles, tol);
    if (pc.report.max_abs >= kPeriodPassTol) pc.pass = false;
    return pc;
}

json end_json(const SurfaceData& s, const SurfacePoint& p) {
    EndType et = end_type_at(s, p);
    AdmissibilityResult ad = admissibility(et.reduced);
    json j;
    j["puncture"] = fmt_point(p, s.domain);
    j["raw"] = et.raw;
    j["reduced"] = et.reduced;
    j["order"] = et.order;
    j["verdict"] = to_string(ad.verdict);
    j["rule"] = ad.rule;
    return j;
}

std::string family_to_string(const EndFamily& fam) {
    std::string s;
    for (std::size_t i = 0; i < fam.size(); ++i) {
        if (i) s += " + ";
        s += format_end_tuple(fam[i]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Subcommands.

int run_list(const Catalog& cat, bool long_form, bool as_json) {
    std::map<std::string, const FixtureSpec*> by_id;
    for (const FixtureSpec& sp : cat.specs()) by_id[sp.id] = &sp;
    auto base_of = [](const std::string& id) { return id.substr(0, id.find(':')); };
    if (as_json) {
        json arr = json::array();
        for (const std::string& id : cat.instance_ids()) {
            const FixtureSpec* sp = by_id.at(base_of(id));
            arr.push_back({{"id", id}, {"family", sp->family}, {"note", sp->note}});
        }
        std::cout << arr.dump(2) << "\n";
        return 0;
    }
    for (const std::string& id : cat.instance_ids()) {
        if (long_form) {
            const FixtureSpec* sp = by_id.at(base_of(id));
            std::printf("%-26s %-26s %s\n", id.c_str(), sp->family.c_str(), sp->note.c_str());
        } else {
            std::printf("%s\n", id.c_str());
        }
    }
    return 0;
}

int run_info(const Catalog& cat, const TargetOptions& topt, bool as_json) {
    Target tgt = resolve_target(cat, topt);
    const SurfaceData& s = tgt.surface;
    CurvatureBudget budget = total_curvature(s);

    if (as_json) {
        json j;
        j["id"] = tgt.name;
        if (tgt.fx && tgt.fx->spec) {
            j["family"] = tgt.fx->spec->family;
            j["note"] = tgt.fx->spec->note;
        }
        j["genus"] = s.domain.is_hyperelliptic() ? s.domain.genus() : 0;
        j["ends"] = json::array();
        for (const SurfacePoint& p : s.punctures) j["ends"].push_back(end_json(s, p));
        j["curvature_multiple_of_minus_2pi"] = budget.multiple_of_2pi;
        j["total_curvature"] = budget.total;
        if (tgt.fx) {
            json cl = json::array();
            for (const ClosingResult& r : tgt.fx->closings)
                cl.push_back({{"name", r.unknown}, {"value", r.value}, {"residual", r.residual}});
            j["closings"] = cl;
            json sy = json::array();
            for (const SymmetryDescriptor& d : tgt.fx->symmetries)
                sy.push_back({{"map", d.label}, {"order", d.order}});
            j["symmetries"] = sy;
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    std::printf("id:         %s\n", tgt.name.c_str());
    if (tgt.fx && tgt.fx->spec) {
        std::printf("family:     %s\n", tgt.fx->spec->family.c_str());
        if (!tgt.fx->spec->note.empty())
            std::printf("note:       %s\n", tgt.fx->spec->note.c_str());
    }
    if (s.domain.is_hyperelliptic()) {
        std::printf("domain:     curve w^2 = p(z), genus %d\n", s.domain.genus());
    } else {
        std::printf("domain:     punctured sphere, genus 0\n");
    }
    if (tgt.fx && tgt.fx->spec)
        for (int k = 0; k < 3; ++k)
            std::printf("omega%d:     %s\n", k + 1, tgt.fx->spec->forms[std::size_t(k)].c_str());
    std::printf("basepoint:  %s\n", fmt_complex(s.basepoint.z).c_str());
    if (tgt.fx)
        for (const ClosingResult& r : tgt.fx->closings)
            std::printf("closing:    %s = %.12g  (residual %.3g)\n", r.unknown.c_str(), r.value,
                        r.residual);
    std::printf("ends:\n");
    for (const SurfacePoint& p : s.punctures) {
        EndType et = end_type_at(s, p);
        AdmissibilityResult ad = admissibility(et.reduced);
        std::printf("  %-22s raw %-9s reduced %-9s order %d  %s [%s]\n",
                    fmt_point(p, s.domain).c_str(), format_end_tuple(et.raw).c_str(),
                    format_end_tuple(et.reduced).c_str(), et.order, to_string(ad.verdict),
                    ad.rule.c_str());
    }
    std::printf("curvature:  total -2*pi*%d = %.10g\n", budget.multiple_of_2pi, budget.total);
    if (tgt.fx) {
        for (const SymmetryDescriptor& d : tgt.fx->symmetries)
            std::printf("symmetry:   %s (order %d)\n", d.label.c_str(), d.order);
        std::printf("region:     r in [%g, %g], %d angular cells\n", tgt.region.r_min,
                    tgt.region.r_max, tgt.region.n_theta);
    }
    return 0;
}

int run_classify(int multiple, int genus, bool all_tables, bool as_json) {
    if (all_tables) {
        std::fputs(format_budget_tables().c_str(), stdout);
        return 0;
    }
    std::vector<EndFamily> fams = classify_budget(-2.0 * kPi * multiple, genus);
    if (as_json) {
        json arr = json::array();
        for (const EndFamily& f : fams) arr.push_back(f);
        std::cout << arr.dump(2) << "\n";
        return 0;
    }
    std::printf("total curvature -%d*2*pi, genus %d: %zu complete embedded configurations\n",
                multiple, genus, fams.size());
    for (const EndFamily& f : fams) std::printf("  %s\n", family_to_string(f).c_str());
    return 0;
}

int run_curvature(const Catalog& cat, const TargetOptions& topt, CurvatureOptions copt,
                  bool as_json) {
    Target tgt = resolve_target(cat, topt);
    CurvatureBudget budget = total_curvature(tgt.surface);
    CurvatureIntegral ci = total_curvature_numeric(tgt.surface, copt);
    double deviation = std::abs(ci.total - budget.total) / std::abs(budget.total);
    bool pass = deviation <= kCurvaturePassTol;
    bool converged = ci.error <= 5.0 * copt.rel_tol * std::abs(ci.total) + 1e-12;
    if (as_json) {
        json j;
        j["id"] = tgt.name;
        j["budget_multiple"] = budget.multiple_of_2pi;
        j["budget_total"] = budget.total;
        j["numeric_total"] = ci.total;
        j["error_estimate"] = ci.error;
        j["cells"] = ci.cells;
        j["tail"] = ci.tail;
        j["nearest_multiple"] = ci.nearest_multiple;
        j["deviation"] = deviation;
        j["pass"] = pass;
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("budget:   -2*pi*%d = %.10g\n", budget.multiple_of_2pi, budget.total);
        std::printf("numeric:  %.10g  (error est %.2g, %ld cells, tail %.2g)\n", ci.total,
                    ci.error, ci.cells, ci.tail);
        std::printf("nearest multiple of -2*pi: %d  (off by %.3g%%)\n", ci.nearest_multiple,
                    100.0 * ci.multiple_deviation);
        std::printf("agreement with budget: %.4g%%  %s (tolerance %g%%)\n", 100.0 * deviation,
                    pass ? "PASS" : "FAIL", 100.0 * kCurvaturePassTol);
    }
    if (!converged) return 3;
    return pass ? 0 : 1;
}

int run_close_periods(const Catalog& cat, const TargetOptions& topt, bool as_json) {
    Target tgt = resolve_target(cat, topt);
    PeriodCheck pc = run_period_check(tgt, topt.tol);
    if (as_json) {
        json j;
        j["id"] = tgt.name;
        json cl = json::array();
        if (tgt.fx)
            for (const ClosingResult& r : tgt.fx->closings)
                cl.push_back({{"name", r.unknown}, {"value", r.value}, {"residual", r.residual}});
        j["closings"] = cl;
        json rows = json::array();
        for (const PeriodRow& row : pc.report.rows)
            rows.push_back({{"cycle", row.cycle_label}, {"periods", row.period}});
        j["periods"] = rows;
        j["max_abs_period"] = pc.report.max_abs;
        j["pass"] = pc.pass;
        std::cout << j.dump(2) << "\n";
        return pc.pass ? 0 : 1;
    }
    if (tgt.fx)
        for (const ClosingResult& r : tgt.fx->closings)
            std::printf("solved %s = %.15g  (residual %.3g)\n", r.unknown.c_str(), r.value,
                        r.residual);
    for (const PeriodRow& row : pc.report.rows)
        std::printf("%-28s Re periods  % .3e  % .3e  % .3e\n", row.cycle_label.c_str(),
                    row.period[0], row.period[1], row.period[2]);
    std::printf("max |Re period| = %.3g  %s (tolerance %g)\n", pc.report.max_abs,
                pc.pass ? "PASS" : "FAIL", kPeriodPassTol);
    return pc.pass ? 0 : 1;
}

int run_mesh(const Catalog& cat, const TargetOptions& topt, MeshRegion* override_region,
             const std::string& out_path, bool with_normals, bool as_json) {
    Target tgt = resolve_target(cat, topt);
    MeshRegion region = tgt.region;
    if (override_region->r_min >= 0) region.r_min = override_region->r_min;
    if (override_region->r_max > 0) region.r_max = override_region->r_max;
    if (override_region->n_theta > 0) region.n_theta = override_region->n_theta;
    if (override_region->puncture_radius > 0)
        region.puncture_radius = override_region->puncture_radius;
    region.quad_tol = topt.tol;

    TriMesh m = build_mesh(tgt.surface, region);
    std::string path = out_path;
    if (path.empty()) {
        path = tgt.name + ".obj";
        for (char& c : path)
            if (c == ':' || c == '=') c = '-';
    }
    std::ofstream os(path);
    if (!os) throw SchemaError("cannot open output file '" + path + "'");
    write_obj(m, os, with_normals);
    os.close();

    if (as_json) {
        json j;
        j["id"] = tgt.name;
        j["out"] = path;
        j["vertices"] = m.vertices.size();
        j["triangles"] = m.triangles.size();
        j["euler_characteristic"] = euler_characteristic(m);
        j["boundary_loops"] = boundary_loop_count(m);
        j["bbox_diagonal"] = m.bbox_diag();
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("meshed %s: %zu vertices, %zu triangles, chi %d, %d boundary loops\n",
                    tgt.name.c_str(), m.vertices.size(), m.triangles.size(),
                    euler_characteristic(m), boundary_loop_count(m));
        std::printf("wrote %s\n", path.c_str());
    }
    return 0;
}

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

int run_check(const Catalog& cat, const TargetOptions& topt, std::vector<std::string> which,
              bool as_json) {
    Target tgt = resolve_target(cat, topt);
    const SurfaceData& s = tgt.surface;
    const FixtureExpectation* exp =
        tgt.fx && tgt.fx->spec ? &tgt.fx->spec->expect : nullptr;

    if (which.empty()) {
        which.push_back("periods");
        if (tgt.fx && tgt.fx->curvature_multiple) which.push_back("curvature");
        if (tgt.fx && !tgt.fx->symmetries.empty()) which.push_back("symmetry");
        if (!exp || exp->regular.has_value()) which.push_back("regular");
        if (exp && exp->embedded.has_value()) which.push_back("embedded");
        if (exp && exp->proper.has_value()) which.push_back("proper");
    }

    std::vector<CheckOutcome> outcomes;
    char buf[256];
    for (const std::string& w : which) {
        CheckOutcome oc;
        oc.name = w;
        if (w == "periods") {
            PeriodCheck pc = run_period_check(tgt, topt.tol);
            oc.pass = pc.pass;
            std::snprintf(buf, sizeof buf, "max |Re period| %.3g (tolerance %g)",
                          pc.report.max_abs, kPeriodPassTol);
            oc.detail = buf;
        } else if (w == "curvature") {
            CurvatureBudget budget = total_curvature(s);
            CurvatureIntegral ci = total_curvature_numeric(s);
            double dev = std::abs(ci.total - budget.total) / std::abs(budget.total);
            oc.pass = dev <= kCurvaturePassTol;
            std::snprintf(buf, sizeof buf, "-2*pi*%d vs numeric %.6g, off by %.3g%%",
                          budget.multiple_of_2pi, ci.total, 100.0 * dev);
            oc.detail = buf;
        } else if (w == "symmetry") {
            if (!tgt.fx || tgt.fx->symmetries.empty()) {
                oc.pass = true;
                oc.detail = "no symmetries declared";
            } else {
                oc.pass = true;
                double worst = 0;
                for (const SymmetryDescriptor& d : tgt.fx->symmetries) {
                    SymmetryReport rep = check_symmetry(s, d);
                    worst = std::max(worst, rep.max_deviation);
                    if (!rep.pass) oc.pass = false;
                }
                std::snprintf(buf, sizeof buf, "%zu symmetries, max deviation %.3g",
                              tgt.fx->symmetries.size(), worst);
                oc.detail = buf;
            }
        } else if (w == "regular") {
            std::vector<Witness> ws = regularity_scan(s, tgt.region);
            bool expected = !exp || exp->regular.value_or(true);
            oc.pass = ws.empty() == expected;
            oc.detail = ws.empty() ? "no singular points at scan resolution"
                                   : ws.front().to_line();
        } else if (w == "embedded") {
            std::vector<Witness> ws = injectivity_witness_search(s, tgt.region);
            bool expected = !exp || exp->embedded.value_or(true);
            oc.pass = ws.empty() == expected;
            oc.detail = ws.empty() ? "no witnesses at scan resolution" : ws.front().to_line();
        } else if (w == "proper") {
            bool expected = !exp || exp->proper.value_or(true);
            if (!expected && tgt.fx && tgt.fx->bounded_puncture) {
                EscapeProbe probe =
                    properness_probe(s, s.punctures[*tgt.fx->bounded_puncture]);
                oc.pass = !probe.escapes;
                std::snprintf(buf, sizeof buf,
                              "end %s stays bounded (sup of circle minima %.4g)",
                              fmt_point(s.punctures[*tgt.fx->bounded_puncture], s.domain).c_str(),
                              probe.bound);
                oc.detail = probe.escapes ? "expected a bounded end, all probes escape" : buf;
            } else {
                oc.pass = true;
                std::string bad;
                for (const SurfacePoint& p : s.punctures) {
                    EscapeProbe probe = properness_probe(s, p);
                    if (!probe.escapes) {
                        oc.pass = false;
                        bad = fmt_point(p, s.domain);
                    }
                }
                oc.detail = oc.pass ? "every end escapes along the probe circles"
                                    : "end " + bad + " stays bounded";
                if (!expected) oc.pass = !oc.pass;  // fixture committed to a bounded end
            }
        } else {
            throw SchemaError("unknown check '" + w +
                              "' (regular|embedded|proper|symmetry|periods|curvature)");
        }
        outcomes.push_back(std::move(oc));
    }

    bool all = true;
    for (const CheckOutcome& oc : outcomes) all = all && oc.pass;
    if (as_json) {
        json j;
        j["id"] = tgt.name;
        json arr = json::array();
        for (const CheckOutcome& oc : outcomes)
            arr.push_back({{"check", oc.name}, {"pass", oc.pass}, {"detail", oc.detail}});
        j["checks"] = arr;
        j["pass"] = all;
        std::cout << j.dump(2) << "\n";
    } else {
        for (const CheckOutcome& oc : outcomes)
            std::printf("check %-10s %s  %s\n", oc.name.c_str(), oc.pass ? "PASS" : "FAIL",
                        oc.detail.c_str());
        std::printf("overall: %s\n", all ? "PASS" : "FAIL");
    }
    return all ? 0 : 1;
}

struct ReportRow {
    std::string id;
    bool ends_ok = false, budget_ok = false, periods_ok = false;
    double max_period = 0;
    std::string error;
    bool ok() const { return error.empty() && ends_ok && budget_ok && periods_ok; }
};

int run_report(const Catalog& cat, int threads, bool as_json) {
    std::vector<std::string> ids = cat.instance_ids();
    std::vector<ReportRow> rows(ids.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next.fetch_add(1); i < ids.size(); i = next.fetch_add(1)) {
            ReportRow& row = rows[i];
            row.id = ids[i];
            try {
                InstantiatedFixture fx = cat.instantiate(ids[i]);
                row.ends_ok = true;
                for (std::size_t j = 0; j < fx.surface.punctures.size(); ++j) {
                    EndType et = end_type_at(fx.surface, fx.surface.punctures[j]);
                    if (et.reduced != fx.expected_ends[j]) row.ends_ok = false;
                }
                CurvatureBudget budget = total_curvature(fx.surface);
                row.budget_ok = !fx.curvature_multiple ||
                                *fx.curvature_multiple == budget.multiple_of_2pi;
                Target tgt{ids[i], fx.surface, fx, fx.region};
                PeriodCheck pc = run_period_check(tgt, kQuadTol);
                row.periods_ok = pc.pass;
                row.max_period = pc.report.max_abs;
            } catch (const Error& e) {
                row.error = e.what();
            }
        }
    };
    if (threads < 1) threads = 1;
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();

    std::size_t good = 0;
    for (const ReportRow& r : rows) good += r.ok() ? 1 : 0;
    if (as_json) {
        json arr = json::array();
        for (const ReportRow& r : rows) {
            json j = {{"id", r.id},
                      {"ends_ok", r.ends_ok},
                      {"budget_ok", r.budget_ok},
                      {"periods_ok", r.periods_ok},
                      {"max_abs_period", r.max_period}};
            if (!r.error.empty()) j["error"] = r.error;
            arr.push_back(j);
        }
        json top = {{"instances", arr}, {"pass", good == rows.size()}};
        std::cout << top.dump(2) << "\n";
    } else {
        std::printf("%-26s %-6s %-7s %-12s\n", "instance", "ends", "budget", "periods");
        for (const ReportRow& r : rows) {
            if (!r.error.empty()) {
                std::printf("%-26s error: %s\n", r.id.c_str(), r.error.c_str());
                continue;
            }
            std::printf("%-26s %-6s %-7s %-5s %.2e\n", r.id.c_str(),
                        r.ends_ok ? "ok" : "FAIL", r.budget_ok ? "ok" : "FAIL",
                        r.periods_ok ? "ok" : "FAIL", r.max_period);
        }
        std::printf("%zu/%zu instances match their committed invariants\n", good, rows.size());
    }
    return good == rows.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"harmonic surfaces from triples of meromorphic forms"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "harmonic 1.0.0");

    bool as_json = false;
    app.add_flag("--json", as_json, "emit JSON instead of text (applies to all subcommands)");

    auto* c_list = app.add_subcommand("list", "list catalog instances");
    bool long_form = false;
    c_list->add_flag("--long", long_form, "include family and note columns");

    TargetOptions info_t;
    auto* c_info = app.add_subcommand("info", "describe a fixture: ends, budget, verdicts");
    add_target_flags(c_info, info_t, true);

    auto* c_classify =
        app.add_subcommand("classify", "complete embedded configurations for a budget");
    int multiple = -1, genus = 0;
    c_classify->add_option("--multiple", multiple,
                           "curvature budget as the positive multiple m in -2*pi*m");
    c_classify->add_option("--genus", genus, "domain genus (0 or 1)")->capture_default_str();

    TargetOptions curv_t;
    CurvatureOptions copt;
    auto* c_curv = app.add_subcommand("curvature", "numeric total curvature vs the budget");
    add_target_flags(c_curv, curv_t, true);
    c_curv->add_option("--rel-tol", copt.rel_tol, "integrator relative tolerance")
        ->capture_default_str();
    c_curv->add_option("--r-inner", copt.r_inner, "inner truncation radius")
        ->capture_default_str();
    c_curv->add_option("--r-outer", copt.r_outer, "outer truncation radius")
        ->capture_default_str();

    TargetOptions per_t;
    auto* c_per = app.add_subcommand("close-periods", "solve closings and report residuals");
    add_target_flags(c_per, per_t, true);

    TargetOptions mesh_t;
    auto* c_mesh = app.add_subcommand("mesh", "triangulate and write a Wavefront OBJ");
    add_target_flags(c_mesh, mesh_t, true);
    MeshRegion mesh_override{-1.0, 0.0, 0.0, 0, kQuadTol};
    std::string out_path;
    bool no_normals = false;
    std::pair<double, double> region_pair{-1, 0};
    c_mesh->add_option("--out", out_path, "output OBJ path (default <id>.obj)");
    c_mesh->add_option("--region", region_pair, "radial annulus r_min,r_max")->delimiter(',');
    c_mesh->add_option("--density", mesh_override.n_theta, "angular cell count");
    c_mesh->add_option("--puncture-radius", mesh_override.puncture_radius,
                       "excision radius around finite punctures");
    c_mesh->add_flag("--no-normals", no_normals, "omit vn records");

    TargetOptions check_t;
    auto* c_check = app.add_subcommand("check", "verify invariants against expectations");
    add_target_flags(c_check, check_t, true);
    std::vector<std::string> which;
    c_check->add_option("--which", which,
                        "checks to run: regular|embedded|proper|symmetry|periods|curvature "
                        "(default: everything the fixture commits to)");

    auto* c_report = app.add_subcommand("report", "fast invariant sweep over the catalog");
    int threads = int(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (threads > 8) threads = 8;
    c_report->add_option("--threads", threads, "worker threads")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Catalog cat = Catalog::load(Catalog::default_path());
        if (*c_list) return run_list(cat, long_form, as_json);
        if (*c_info) return run_info(cat, info_t, as_json);
        if (*c_classify)
            return run_classify(multiple, genus, !c_classify->count("--multiple"), as_json);
        if (*c_curv) return run_curvature(cat, curv_t, copt, as_json);
        if (*c_per) return run_close_periods(cat, per_t, as_json);
        if (*c_mesh) {
            mesh_override.r_min = region_pair.first;
            mesh_override.r_max = region_pair.second;
            return run_mesh(cat, mesh_t, &mesh_override, out_path, !no_normals, as_json);
        }
        if (*c_check) return run_check(cat, check_t, which, as_json);
        if (*c_report) return run_report(cat, threads, as_json);
    } catch (const QuadratureNonConvergence& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const NoBracket& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const SchemaError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const UnresolvedParam& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
