#include "parobst/report.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "parobst/heat_solver.hpp"
#include "parobst/projection.hpp"

namespace parobst {

namespace {

using json = nlohmann::json;

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
    const std::string s = trim(v);
    double out = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ScenarioError(key + ": bad number '" + s + "'");
    return out;
}

int parse_int(const std::string& v, const std::string& key) {
    const std::string s = trim(v);
    int out = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ScenarioError(key + ": bad integer '" + s + "'");
    return out;
}

std::vector<double> parse_list(const std::string& v, const std::string& key, char sep = ',') {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(parse_double(item, key));
    if (!v.empty() && v.back() == sep) throw ScenarioError(key + ": trailing separator");
    return out;
}

std::string join(const std::vector<double>& v, const char* sep = ",") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + num(v[i]);
    return s;
}

struct Key {
    const char* name;
    std::function<void(Scenario&, const std::string&)> set;
    std::function<std::string(const Scenario&)> get;
};

#define PAROBST_DOUBLE(k, member) \
    Key{k, [](Scenario& s, const std::string& v) { s.member = parse_double(v, k); }, \
        [](const Scenario& s) { return num(s.member); }}
#define PAROBST_INT(k, member) \
    Key{k, [](Scenario& s, const std::string& v) { s.member = parse_int(v, k); }, \
        [](const Scenario& s) { return std::to_string(s.member); }}
#define PAROBST_STRING(k, member) \
    Key{k, [](Scenario& s, const std::string& v) { s.member = v; }, [](const Scenario& s) { return s.member; }}

// Applied in this order, so grid.n is known before the centers are read.
const std::vector<Key>& keys() {
    static const std::vector<Key> k = {
        PAROBST_STRING("name", name),
        PAROBST_INT("grid.n", grid.n),
        PAROBST_DOUBLE("grid.R", grid.R),
        PAROBST_DOUBLE("grid.h", grid.h),
        PAROBST_DOUBLE("grid.T", grid.T),
        PAROBST_DOUBLE("grid.k", grid.k),
        PAROBST_STRING("problem.mode", problem.mode),
        PAROBST_STRING("problem.exact", problem.exact),
        PAROBST_STRING("problem.params", problem.params),
        PAROBST_DOUBLE("problem.perturbation", problem.perturbation),
        PAROBST_DOUBLE("problem.domain_radius", problem.domain_radius),
        PAROBST_DOUBLE("solver.tol_zero", solver.tol_zero),
        PAROBST_INT("solver.max_iter", solver.max_iter),
        Key{"diag.centers",
            [](Scenario& s, const std::string& v) {
                s.diag.centers.clear();
                if (v == "auto") return;
                std::stringstream ss(v);
                std::string item;
                while (std::getline(ss, item, ';')) {
                    auto c = parse_list(trim(item), "diag.centers");
                    if (static_cast<int>(c.size()) != s.grid.n + 1)
                        throw ScenarioError("diag.centers: each center needs " + std::to_string(s.grid.n + 1) +
                                            " numbers (space coordinates, then t)");
                    Point p;
                    for (int i = 0; i < s.grid.n; ++i) p.x[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)];
                    p.t = c.back();
                    s.diag.centers.push_back(p);
                }
            },
            [](const Scenario& s) {
                if (s.diag.centers.empty()) return std::string("auto");
                std::string out;
                for (std::size_t i = 0; i < s.diag.centers.size(); ++i) {
                    const Point& p = s.diag.centers[i];
                    if (i) out += "; ";
                    for (int d = 0; d < s.grid.n; ++d) out += num(p.x[static_cast<std::size_t>(d)]) + ",";
                    out += num(p.t);
                }
                return out;
            }},
        Key{"diag.radii", [](Scenario& s, const std::string& v) { s.diag.radii = parse_list(v, "diag.radii"); },
            [](const Scenario& s) { return join(s.diag.radii); }},
        Key{"diag.weiss_radii",
            [](Scenario& s, const std::string& v) { s.diag.weiss_radii = parse_list(v, "diag.weiss_radii"); },
            [](const Scenario& s) { return join(s.diag.weiss_radii); }},
        PAROBST_DOUBLE("diag.quad.gamma", diag.quad.gamma),
        PAROBST_INT("diag.quad.levels", diag.quad.levels),
        PAROBST_INT("diag.quad.order", diag.quad.order),
        PAROBST_INT("diag.quad.hermite", diag.quad.hermite),
        PAROBST_INT("diag.quad.space_order", diag.quad.space_order),
        PAROBST_DOUBLE("diag.quad.nu", diag.quad.nu),
        PAROBST_DOUBLE("diag.quad.cutoff", diag.quad.cutoff),
        PAROBST_DOUBLE("diag.quad.tail_tol", diag.quad.tail_tol),
        Key{"diag.sigma", [](Scenario& s, const std::string& v) { s.diag.sigma = parse_list(v, "diag.sigma"); },
            [](const Scenario& s) { return join(s.diag.sigma); }},
        PAROBST_DOUBLE("diag.bad_scale_threshold", diag.bad_scale_threshold),
        PAROBST_INT("diag.directions", diag.directions),
        PAROBST_INT("diag.telescope_levels", diag.telescope_levels),
        PAROBST_STRING("output.dir", output_dir),
    };
    return k;
}

#undef PAROBST_DOUBLE
#undef PAROBST_INT
#undef PAROBST_STRING

// Dyadic radii from 1/2 down to 4h that the grid can rescale without interpolation.
std::vector<double> default_radii(const SpaceTimeGrid& g) {
    std::vector<double> out;
    for (double r = 0.5; r >= 4 * g.h() * (1 - 1e-12); r /= 2) {
        try {
            check_dyadic_compatible(g, r);
            out.push_back(r);
        } catch (const DomainError&) {
            break;
        }
    }
    return out;
}

void validate(Scenario& s) {
    if (s.name.empty()) throw ScenarioError("name: must not be empty");
    if (s.grid.n != 1 && s.grid.n != 2) throw ScenarioError("grid.n: must be 1 or 2");
    if (!(s.grid.h > 0)) throw ScenarioError("grid.h: must be positive");
    if (s.grid.k == 0) s.grid.k = 4 * s.grid.h * s.grid.h;
    SpaceTimeGrid g;
    try {
        g = s.make();
    } catch (const DomainError& e) {
        throw ScenarioError(std::string("grid: ") + e.what());
    }
    if (s.problem.mode != "solve" && s.problem.mode != "exact")
        throw ScenarioError("problem.mode: expected 'solve' or 'exact', got '" + s.problem.mode + "'");
    try {
        make_exact(s.problem.exact, s.problem.params, s.grid.n);
    } catch (const DomainError& e) {
        throw ScenarioError(std::string("problem.exact: ") + e.what());
    }
    try {
        check_fits(g, Cylinder{Point{}, s.problem.domain_radius});
    } catch (const DomainError& e) {
        throw ScenarioError(std::string("problem.domain_radius: ") + e.what());
    }
    if (s.solver.max_iter < 0) throw ScenarioError("solver.max_iter: must be non-negative");
    for (const Point& p : s.diag.centers) {
        try {
            g.node_at(p);
        } catch (const DomainError& e) {
            throw ScenarioError(std::string("diag.centers: ") + e.what());
        }
    }
    for (double r : s.diag.radii) {
        try {
            check_dyadic_compatible(g, r);
        } catch (const DomainError& e) {
            throw ScenarioError(std::string("diag.radii: ") + e.what());
        }
    }
    for (double r : s.diag.weiss_radii)
        if (!(r > 0)) throw ScenarioError("diag.weiss_radii: radii must be positive");
    try {
        s.diag.quad.validate();
    } catch (const DomainError& e) {
        throw ScenarioError(std::string("diag.quad: ") + e.what());
    }
    if (s.diag.sigma.size() != 1 && s.diag.sigma.size() != s.diag.radii.size())
        throw ScenarioError("diag.sigma: give one value or one per radius");
    if (s.diag.directions < 0) throw ScenarioError("diag.directions: must be non-negative");
    if (s.diag.telescope_levels < 0) throw ScenarioError("diag.telescope_levels: must be non-negative");
    if (s.output_dir.empty()) throw ScenarioError("output.dir: must not be empty");
}

std::string grid_string(const GridSpec& g) {
    return "n=" + std::to_string(g.n) + " R=" + num(g.R) + " h=" + num(g.h) + " T=" + num(g.T) + " k=" + num(g.k);
}

void parallel_for(std::vector<std::function<void()>>& tasks, int threads) {
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
    if (nt == 1) {
        for (auto& t : tasks) t();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i)
        pool.emplace_back([&] {
            for (std::size_t j; (j = next++) < tasks.size();) tasks[j]();
        });
    for (auto& th : pool) th.join();
}

std::optional<Point> auto_center(const SpaceTimeGrid& g, const FreeBoundary& fb, const CoincidenceSet& lam,
                                 double rmax) {
    const NodeMask& pool = fb.nodes.empty() ? lam.mask : fb.nodes;
    std::optional<Point> best;
    double bd = INFINITY;
    for (auto idx : pool.indices()) {
        const Point p = g.point(g.unflat(idx));
        const double d = p.x[0] * p.x[0] + p.x[1] * p.x[1] + std::abs(p.t);
        if (d >= bd) continue;
        try {
            check_fits(g, Cylinder{p, rmax});
        } catch (const DomainError&) {
            continue;
        }
        bd = d;
        best = p;
    }
    return best;
}

std::string point_label(const Point& p, int n) {
    std::string s = "(";
    for (int d = 0; d < n; ++d) s += num(p.x[static_cast<std::size_t>(d)]) + ", ";
    return s + "t=" + num(p.t) + ")";
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

SpaceTimeGrid Scenario::make() const { return make_grid(grid.n, grid.R, grid.h, grid.T, grid.k); }

Scenario parse_scenario(const std::string& text) {
    std::map<std::string, std::pair<std::string, int>> seen;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ScenarioError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& ks = keys();
        if (std::none_of(ks.begin(), ks.end(), [&](const Key& k) { return key == k.name; }))
            throw ScenarioError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (seen.count(key))
            throw ScenarioError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        seen[key] = {value, lineno};
    }
    Scenario s;
    for (const Key& k : keys()) {
        auto it = seen.find(k.name);
        if (it == seen.end()) continue;
        try {
            k.set(s, it->second.first);
        } catch (const ScenarioError& e) {
            throw ScenarioError("line " + std::to_string(it->second.second) + ": " + e.what());
        }
    }
    if (!seen.count("grid.k")) s.grid.k = 0;
    validate(s);
    const SpaceTimeGrid g = s.make();
    if (!seen.count("diag.radii")) s.diag.radii = default_radii(g);
    if (!seen.count("diag.weiss_radii")) s.diag.weiss_radii = dyadic_radii(0.25, 6);
    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path + ": cannot open scenario file");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ScenarioError& e) {
        throw ScenarioError(path + ": " + e.what());
    }
}

std::string serialize(const Scenario& s) {
    std::string out;
    for (const Key& k : keys()) out += std::string(k.name) + " = " + k.get(s) + "\n";
    return out;
}

std::string grid_hash(const GridSpec& g) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : grid_string(g)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunReport run(const Scenario& s, const RunOptions& opt) {
    RunReport rep;
    rep.scenario = s;
    rep.grid = grid_string(s.grid);
    rep.grid_hash = grid_hash(s.grid);
    if (opt.timestamp) rep.timestamp = utc_now();
    auto fail = [&](const std::string& stage, const std::string& what) {
        rep.failures.push_back(s.name + ": " + stage + ": " + what);
    };

    SpaceTimeGrid g;
    ExactProfile e;
    try {
        g = s.make();
        e = make_exact(s.problem.exact, s.problem.params, s.grid.n);
    } catch (const std::exception& ex) {
        fail("setup", ex.what());
        return rep;
    }

    ScalarField u, f, theta;
    CoincidenceSet lam;
    SolverRecord& sr = rep.solver;
    sr.mode = s.problem.mode;
    try {
        if (s.problem.mode == "solve") {
            ObstacleProblem p = problem_from_exact(g, e, Cylinder{Point{}, s.problem.domain_radius},
                                                   s.problem.perturbation);
            p.params = s.solver;
            ObstacleSolution sol = solve_no_sign(p);
            sr.converged = sol.converged;
            sr.iterations = sol.iterations;
            sr.max_level_iterations = sol.max_level_iterations;
            sr.damped_levels = sol.damped_levels;
            sr.unconverged_levels = sol.unconverged_levels;
            sr.residual = sol.residual;
            u = std::move(sol.u);
            f = std::move(p.f);
            theta = std::move(sol.source_fraction);
            lam = std::move(sol.coincidence);
        } else {
            u = ScalarField::sample(g, e.value);
            f = ScalarField::sample(g, e.rhs);
            lam = coincidence_set(u, s.solver.tol_zero < 0 ? default_tol_zero(g) : s.solver.tol_zero);
            theta = source_fraction(u, f, lam.mask);
            sr.converged = true;
        }
    } catch (const std::exception& ex) {
        fail("solve", ex.what());
        return rep;
    }
    sr.tol_zero = lam.tol_zero;
    sr.coincidence_nodes = lam.mask.count();
    const FreeBoundary fb = free_boundary(g, lam);
    sr.free_boundary_nodes = fb.nodes.count();
    if (!sr.converged) {
        fail("solve", "active-set iteration did not converge; diagnostics and classification skipped");
        return rep;
    }

    const DiagnosticPlan& plan = s.diag;
    std::vector<Point> centers = plan.centers;
    if (centers.empty()) {
        const double rmax = plan.radii.empty() ? 0.0 : *std::max_element(plan.radii.begin(), plan.radii.end());
        if (auto c = auto_center(g, fb, lam, rmax)) {
            centers.push_back(*c);
        } else {
            fail("centers", "no free boundary or coincidence node fits the largest radius; set diag.centers");
            return rep;
        }
    }

    const double slack = 5 * (g.h() + g.k());
    const std::size_t nr = plan.radii.size();
    rep.points.resize(centers.size());
    struct Slot {
        std::vector<double> lambda, S, rho, M, blow;
        std::vector<bool> ok_basic, ok_blow, ok_md, ok_key;
        std::vector<std::string> errors;
    };
    std::vector<Slot> slots(centers.size());
    std::vector<std::function<void()>> tasks;
    // Each task writes only to its own slot entries; failures are merged in a fixed order below.
    std::vector<std::vector<std::string>> task_errors;
    auto add = [&](std::function<void(std::vector<std::string>&)> fn) {
        const std::size_t id = task_errors.size();
        task_errors.emplace_back();
        tasks.push_back([fn, id, &task_errors] { fn(task_errors[id]); });
    };

    for (std::size_t c = 0; c < centers.size(); ++c) {
        rep.points[c].center = centers[c];
        {
        PointReport& pr = rep.points[c];
        Slot& sl = slots[c];
        sl.lambda.assign(nr, NAN);
        sl.S.assign(nr, NAN);
        sl.rho.assign(nr, NAN);
        sl.M.assign(nr, NAN);
        sl.blow.assign(nr, NAN);
        sl.ok_basic.assign(nr, false);
        sl.ok_blow.assign(nr, false);
        pr.md.resize(nr);
        pr.key.resize(nr);
        sl.ok_md.assign(nr, false);
        sl.ok_key.assign(nr, false);
        }
        const Point X0 = centers[c];
        const std::string where = "center " + point_label(X0, g.dim());

        for (std::size_t i = 0; i < nr; ++i) {
            const double r = plan.radii[i];
            const std::string at = where + ", r=" + num(r);
            add([&, c, i, r, at, X0](std::vector<std::string>& err) {
                Slot& sl = slots[c];
                PointReport& pr = rep.points[c];
                try {
                    sl.lambda[i] = density_curve(g, lam, X0, {r}).values[0];
                    sl.S[i] = project(u, Cylinder{X0, r}).S;
                    sl.rho[i] = bmo_residual(u, Cylinder{X0, r});
                    sl.M[i] = quadratic_growth_curve(u, X0, {r}).values[0];
                    sl.ok_basic[i] = true;
                } catch (const std::exception& ex) {
                    err.push_back(at + ": curves: " + ex.what());
                }
                try {
                    sl.blow[i] = blowup_distance(u, X0, r, plan.directions).distance;
                    sl.ok_blow[i] = true;
                } catch (const std::exception& ex) {
                    err.push_back(at + ": blow-up: " + ex.what());
                }
                try {
                    const double sigma = plan.sigma.size() == 1 ? plan.sigma[0] : plan.sigma[i];
                    pr.md[i] = MdRow{r, sigma, minimal_diameter(u, X0, r, sigma, lam.tol_zero, plan.directions)};
                    sl.ok_md[i] = true;
                } catch (const std::exception& ex) {
                    err.push_back(at + ": minimal diameter: " + ex.what());
                }
                try {
                    pr.key[i] = KeyRow{r, key_inequality_audit(u, f, theta, lam, r, X0, slack)};
                    sl.ok_key[i] = true;
                } catch (const std::exception& ex) {
                    err.push_back(at + ": key inequality: " + ex.what());
                }
            });
        }
        add([&, c, X0, where](std::vector<std::string>& err) {
            PointReport& pr = rep.points[c];
            try {
                WeissCurve wc = weiss_curve(u, f, X0, plan.weiss_radii, plan.quad);
                wc.curve.name = "W";
                pr.weiss_monotone = wc.monotone;
                pr.weiss_worst_drop = wc.worst_drop;
                pr.curves.push_back(std::move(wc.curve));
            } catch (const std::exception& ex) {
                err.push_back(where + ": Weiss curve: " + ex.what());
            }
            try {
                pr.energy = classify_point(u, f, X0, plan.weiss_radii, plan.quad);
            } catch (const std::exception& ex) {
                err.push_back(where + ": classification: " + ex.what());
            }
        });
        if (nr > 0) {
            add([&, c, X0, where](std::vector<std::string>& err) {
                PointReport& pr = rep.points[c];
                const double r = *std::max_element(plan.radii.begin(), plan.radii.end());
                try {
                    const SplitResult split = split_w_g(u, f, theta, r, X0);
                    const TelescopeResult t = dyadic_telescope(split.g_r, Point{}, plan.telescope_levels);
                    pr.telescope_radius = r;
                    for (int j = 0; j <= t.levels; ++j) {
                        const auto ju = static_cast<std::size_t>(j);
                        pr.telescope.push_back({j, t.residual[ju], t.projection_sup[ju], t.caloric_defect[ju]});
                    }
                } catch (const std::exception& ex) {
                    err.push_back(where + ", r=" + num(r) + ": telescope: " + ex.what());
                }
            });
        }
    }
    parallel_for(tasks, opt.threads);
    for (auto& errs : task_errors)
        for (auto& m : errs) fail("diagnostics", m);

    double key_ratio = 0, split_res = 0, g_scal = 0, w_sup = 0, tel_sup = 0, tel_res = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        PointReport& pr = rep.points[c];
        Slot& sl = slots[c];
        auto curve = [&](const char* name, const std::vector<double>& v, const std::vector<bool>& ok) {
            DiagnosticCurve dc;
            dc.name = name;
            for (std::size_t i = 0; i < nr; ++i)
                if (ok[i]) dc.push(plan.radii[i], v[i]);
            return dc;
        };
        // W was pushed by its task; keep the fixed order lambda, S, rho, M, W, blowup.
        std::vector<DiagnosticCurve> w = std::move(pr.curves);
        pr.curves = {curve("lambda", sl.lambda, sl.ok_basic), curve("S", sl.S, sl.ok_basic),
                     curve("rho", sl.rho, sl.ok_basic), curve("M", sl.M, sl.ok_basic)};
        for (auto& x : w) pr.curves.push_back(std::move(x));
        pr.curves.push_back(curve("blowup", sl.blow, sl.ok_blow));

        const DiagnosticCurve& lc = pr.curves[0];
        bool consecutive = lc.size() >= 2;
        for (std::size_t j = 0; j + 1 < lc.size(); ++j)
            consecutive = consecutive && std::abs(lc.radii[j + 1] - 0.5 * lc.radii[j]) <= 1e-12 * lc.radii[j];
        if (consecutive) pr.decay_flags = decay_flags(lc, g.h());
        for (std::size_t i = 0; i < pr.curves[1].size(); ++i)
            if (pr.curves[1].values[i] > plan.bad_scale_threshold) pr.bad_scales.push_back(pr.curves[1].radii[i]);

        std::vector<MdRow> md;
        std::vector<KeyRow> key;
        for (std::size_t i = 0; i < nr; ++i) {
            if (sl.ok_md[i]) md.push_back(pr.md[i]);
            if (!sl.ok_key[i]) continue;
            key.push_back(pr.key[i]);
            const KeyInequalityReport& k = pr.key[i].key;
            if (!k.vacuous) key_ratio = std::max(key_ratio, k.ratio);
            split_res = std::max(split_res, k.split_residual);
            g_scal = std::max(g_scal, k.g_scaling);
            w_sup = std::max(w_sup, k.w_sup_half);
        }
        pr.md = std::move(md);
        pr.key = std::move(key);
        for (const TelescopeRow& t : pr.telescope) {
            tel_sup = std::max(tel_sup, t.projection_sup);
            tel_res = std::max(tel_res, t.residual);
        }
    }
    auto constant = [&](const char* name, double v) { rep.constants.push_back({name, v, rep.grid}); };
    constant("solver_residual", sr.residual);
    constant("split_residual_max", split_res);
    constant("key_ratio_max", key_ratio);
    constant("g_scaling_max", g_scal);
    constant("w_sup_half_max", w_sup);
    constant("telescope_residual_max", tel_res);
    constant("telescope_projection_sup_max", tel_sup);
    return rep;
}

namespace {

json curve_json(const DiagnosticCurve& c) { return {{"name", c.name}, {"radii", c.radii}, {"values", c.values}}; }

json point_json(const Point& p, int n) {
    json x = json::array();
    for (int d = 0; d < n; ++d) x.push_back(p.x[static_cast<std::size_t>(d)]);
    return {{"x", x}, {"t", p.t}};
}

}  // namespace

std::string report_json(const RunReport& r, bool with_timestamp) {
    const int n = r.scenario.grid.n;
    json j;
    j["version"] = r.version;
    j["grid"] = r.grid;
    j["grid_hash"] = r.grid_hash;
    j["scenario_echo"] = serialize(r.scenario);
    const SolverRecord& s = r.solver;
    j["solver"] = {{"mode", s.mode},
                   {"converged", s.converged},
                   {"iterations", s.iterations},
                   {"max_level_iterations", s.max_level_iterations},
                   {"damped_levels", s.damped_levels},
                   {"unconverged_levels", s.unconverged_levels},
                   {"residual", s.residual},
                   {"tol_zero", s.tol_zero},
                   {"coincidence_nodes", s.coincidence_nodes},
                   {"free_boundary_nodes", s.free_boundary_nodes}};
    json pts = json::array();
    for (const PointReport& p : r.points) {
        json pj;
        pj["center"] = point_json(p.center, n);
        json curves = json::array();
        for (const auto& c : p.curves) curves.push_back(curve_json(c));
        pj["curves"] = curves;
        pj["decay_flags"] = p.decay_flags;
        pj["bad_scales"] = p.bad_scales;
        pj["weiss_monotone"] = p.weiss_monotone;
        pj["weiss_worst_drop"] = p.weiss_worst_drop;
        if (p.energy) {
            pj["energy"] = {{"class", to_string(p.energy->kind)},
                            {"w0", p.energy->w0},
                            {"reference", p.energy->reference},
                            {"distance", p.energy->distance},
                            {"warning", p.energy->warning},
                            {"curve", curve_json(p.energy->curve)}};
        } else {
            pj["energy"] = nullptr;
        }
        json md = json::array();
        for (const MdRow& m : p.md)
            md.push_back({{"r", m.r}, {"sigma", m.sigma}, {"md", m.md.md}, {"ratio", m.md.ratio},
                          {"condition", m.md.condition}, {"cloud", m.md.cloud}});
        pj["minimal_diameter"] = md;
        json key = json::array();
        for (const KeyRow& kr : p.key) {
            const KeyInequalityReport& k = kr.key;
            key.push_back({{"r", kr.r}, {"S", k.S}, {"lambda_r", k.lambda_r}, {"lambda_half", k.lambda_half},
                           {"lhs", k.lhs}, {"w_norm", k.w_norm}, {"g_norm", k.g_norm}, {"ratio", k.ratio},
                           {"holds", k.holds}, {"vacuous", k.vacuous}, {"audit_nodes", k.audit_nodes},
                           {"split_residual", k.split_residual}, {"g_scaling", k.g_scaling},
                           {"w_sup_half", k.w_sup_half}});
        }
        pj["key_inequality"] = key;
        json tel = json::array();
        for (const TelescopeRow& t : p.telescope)
            tel.push_back({{"level", t.level}, {"residual", t.residual}, {"projection_sup", t.projection_sup},
                           {"caloric_defect", t.caloric_defect}});
        pj["telescope"] = {{"radius", p.telescope_radius}, {"levels", tel}};
        pts.push_back(pj);
    }
    j["points"] = pts;
    json consts = json::array();
    for (const auto& c : r.constants) consts.push_back({{"name", c.name}, {"value", c.value}, {"grid", c.grid}});
    j["constants"] = consts;
    j["failures"] = r.failures;
    if (with_timestamp) j["timestamp"] = r.timestamp;
    return j.dump(2) + "\n";
}

std::vector<DiagnosticCurve> report_curves(const RunReport& r) {
    std::vector<DiagnosticCurve> out;
    for (std::size_t i = 0; i < r.points.size(); ++i)
        for (DiagnosticCurve c : r.points[i].curves) {
            if (c.size() == 0) continue;
            c.name = "p" + std::to_string(i) + "_" + c.name;
            out.push_back(std::move(c));
        }
    return out;
}

EmitFormats parse_formats(const std::string& list) {
    EmitFormats f{false, false, false};
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item == "json") f.json = true;
        else if (item == "csv") f.csv = true;
        else if (item == "svg") f.svg = true;
        else throw ScenarioError("--formats: unknown format '" + item + "'");
    }
    return f;
}

std::string curve_csv(const DiagnosticCurve& c) {
    std::string out = "r,value\n";
    for (std::size_t i = 0; i < c.size(); ++i) out += num(c.radii[i]) + "," + num(c.values[i]) + "\n";
    return out;
}

std::string curve_svg(const DiagnosticCurve& c) {
    const double W = 640, H = 400, ml = 80, mr = 20, mt = 40, mb = 60;
    std::vector<std::pair<double, double>> pts;
    bool logx = true;
    for (double r : c.radii) logx = logx && r > 0;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (std::isfinite(c.values[i])) pts.emplace_back(logx ? std::log2(c.radii[i]) : c.radii[i], c.values[i]);
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!pts.empty()) {
        x0 = x1 = pts[0].first;
        y0 = y1 = pts[0].second;
        for (auto [x, y] : pts) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 - x0 < 1e-300) { x0 -= 0.5; x1 += 0.5; }
    if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y0))) {
        const double pad = std::max(1e-3, 0.1 * std::abs(y0));
        y0 -= pad;
        y1 += pad;
    }
    auto sx = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto sy = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
    auto fx = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.2f", v);
        return std::string(b);
    };
    auto label = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.4g", v);
        return std::string(b);
    };
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
    s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" + c.name +
         "</text>\n";
    s += "<line x1=\"" + fx(ml) + "\" y1=\"" + fx(H - mb) + "\" x2=\"" + fx(W - mr) + "\" y2=\"" + fx(H - mb) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + fx(ml) + "\" y1=\"" + fx(mt) + "\" x2=\"" + fx(ml) + "\" y2=\"" + fx(H - mb) +
         "\" stroke=\"black\"/>\n";
    for (double r : c.radii) {
        const double x = logx ? std::log2(r) : r;
        s += "<line x1=\"" + fx(sx(x)) + "\" y1=\"" + fx(H - mb) + "\" x2=\"" + fx(sx(x)) + "\" y2=\"" +
             fx(H - mb + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fx(sx(x)) + "\" y=\"" + fx(H - mb + 20) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + label(r) + "</text>\n";
    }
    for (double y : {y0, 0.5 * (y0 + y1), y1}) {
        s += "<line x1=\"" + fx(ml - 5) + "\" y1=\"" + fx(sy(y)) + "\" x2=\"" + fx(ml) + "\" y2=\"" + fx(sy(y)) +
             "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fx(ml - 8) + "\" y=\"" + fx(sy(y) + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + label(y) + "</text>\n";
    }
    s += "<text x=\"" + fx(0.5 * (ml + W - mr)) + "\" y=\"" + fx(H - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">r" +
         std::string(logx ? " (log scale)" : "") + "</text>\n";
    if (!pts.empty()) {
        std::sort(pts.begin(), pts.end());
        s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            s += (i ? " " : "") + fx(sx(pts[i].first)) + "," + fx(sy(pts[i].second));
        s += "\"/>\n";
        for (auto [x, y] : pts)
            s += "<circle cx=\"" + fx(sx(x)) + "\" cy=\"" + fx(sy(y)) + "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

std::vector<std::string> emit(const RunReport& r, const std::string& dir, const EmitFormats& formats) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error(dir + ": " + ec.message());
    std::vector<std::string> written;
    auto write = [&](const std::string& name, const std::string& body) {
        const std::string path = (fs::path(dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error(path + ": cannot open for writing");
        out << body;
        out.close();
        if (!out) throw std::runtime_error(path + ": write failed");
        written.push_back(path);
    };
    if (formats.json) write("report.json", report_json(r));
    for (const DiagnosticCurve& c : report_curves(r)) {
        if (formats.csv) write(c.name + ".csv", curve_csv(c));
        if (formats.svg) write(c.name + ".svg", curve_svg(c));
    }
    return written;
}

}  // namespace parobst
