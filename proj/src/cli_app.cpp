#include "bowsim/cli_app.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>
#include <json.hpp>

#include "bowsim/analytic.hpp"
#include "bowsim/atom_dielectric.hpp"
#include "bowsim/core.hpp"
#include "bowsim/diagnostics.hpp"
#include "bowsim/io.hpp"
#include "bowsim/kernel_solver.hpp"

namespace bowsim {

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json default_config() {
    return json{
        {"model", {{"m", 1.0}, {"V", 0.5}, {"rho", 0.05}, {"s", 1.0}, {"hbar", 1.0}}},
        {"grid", {{"n", 1200}, {"tau_max", 50.0}, {"grading", 2.0}}},
        {"solver", {{"tol", 1e-9}, {"max_newton", 40}, {"tail_fit_order", 2}}},
        {"quadrature",
         {{"relative_tolerance", 1e-10}, {"max_subdivisions", 4000}, {"tail_switch", 0.0}}},
        {"output_dir", "."},
        {"format", "csv"},
        {"profile", {{"gamma_tau", {0.0, 3.0, 10.0}}, {"y_max", 15.0}, {"n_y", 121}}},
        {"energies", {{"gamma_tau_max", 10.0}, {"n_tau", 41}}},
        {"action", {{"x_over_xi", {0.1, 8.0}}}},
        {"sweep",
         {{"eE0_xi_over_V", {0.1, 0.3, 1.0, 3.0, 10.0, 30.0}},
          {"n", 1200},
          {"grading", 3.0}}},
        {"scenario",
         {{"R_over_aB", 1e4},
          {"eps0", 2.0},
          {"eps_inf", 1.0},
          {"V_over_hbar_omega0", 1e6},
          {"V_over_hbar_omegaph", 1e3},
          {"hbar_c_over_e2", 137.036}}},
        {"vdw", {{"R_over_aB_values", {100.0, 200.0}}}},
        {"lamb", {{"R_over_aB_values", {100.0, 1e4, 1e7}}}},
        {"regimes",
         {{"log10_R_min", 0.5}, {"log10_R_max", 7.0}, {"points_per_decade", 20}}},
        {"layer", {{"L_over_aB", 1e8}}},
    };
}

// reject unknown keys anywhere in the document, naming the offender
void check_keys(const json& user, const json& allowed, const std::string& prefix) {
    if (!user.is_object()) return;
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!allowed.contains(it.key()))
            throw ConfigError("unknown config key: " + path);
        if (it.value().is_object()) check_keys(it.value(), allowed.at(it.key()), path);
    }
}

void merge_into(json& base, const json& user) {
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (it.value().is_object() && base.contains(it.key()) &&
            base[it.key()].is_object())
            merge_into(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

void apply_override(json& cfg, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects key.path=value, got: " + kv);
    const std::string path = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    json parsed;
    try {
        parsed = json::parse(val);
    } catch (...) {
        parsed = val;  // bare string
    }
    // navigate dotted path
    json* node = &cfg;
    size_t pos = 0;
    std::vector<std::string> parts;
    while (true) {
        const auto dot = path.find('.', pos);
        parts.push_back(path.substr(pos, dot == std::string::npos ? dot : dot - pos));
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]))
            throw ConfigError("unknown config key: " + path);
        node = &(*node)[parts[i]];
    }
    if (!node->contains(parts.back()))
        throw ConfigError("unknown config key: " + path);
    (*node)[parts.back()] = parsed;
}

StringModel model_from(const json& cfg) {
    const auto& m = cfg.at("model");
    StringModel model;
    model.m = m.at("m").get<double>();
    model.V = m.at("V").get<double>();
    model.rho = m.at("rho").get<double>();
    model.s = m.at("s").get<double>();
    model.hbar = m.at("hbar").get<double>();
    model.validate();
    return model;
}

TauGrid grid_from(const json& g) {
    return TauGrid::graded(g.at("n").get<int>(), g.at("tau_max").get<double>(),
                           g.at("grading").get<double>());
}

SolverOptions solver_from(const json& cfg) {
    const auto& s = cfg.at("solver");
    SolverOptions opt;
    opt.tol = s.at("tol").get<double>();
    opt.max_newton = s.at("max_newton").get<int>();
    opt.tail_fit_order = s.at("tail_fit_order").get<int>();
    return opt;
}

QuadratureSpec quad_from(const json& cfg) {
    const auto& q = cfg.at("quadrature");
    QuadratureSpec spec;
    spec.relative_tolerance = q.at("relative_tolerance").get<double>();
    spec.max_subdivisions = q.at("max_subdivisions").get<int>();
    spec.tail_switch = q.at("tail_switch").get<double>();
    return spec;
}

AtomDielectricScenario scenario_from(const json& cfg) {
    const auto& s = cfg.at("scenario");
    AtomDielectricScenario scn;
    scn.a_B = 1.0;
    scn.V_ryd = 1.0;
    scn.hbar = 1.0;
    scn.R = s.at("R_over_aB").get<double>() * scn.a_B;
    scn.dielectric.eps0 = s.at("eps0").get<double>();
    scn.dielectric.eps_inf = s.at("eps_inf").get<double>();
    scn.dielectric.omega0 = 1.0 / s.at("V_over_hbar_omega0").get<double>();
    scn.dielectric.omega_ph = 1.0 / s.at("V_over_hbar_omegaph").get<double>();
    scn.hbar_c_over_e2 = s.at("hbar_c_over_e2").get<double>();
    scn.validate();
    return scn;
}

struct Emitter {
    std::string out_dir;
    std::string hash;
    std::string format;  // csv | json
    json sidecar;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void check_stale() const {
        namespace fs = std::filesystem;
        if (!fs::exists(out_dir)) return;
        for (const auto& ent : fs::directory_iterator(out_dir)) {
            const auto p = ent.path();
            if (p.extension() != ".json" || p.stem().extension() != ".meta") continue;
            std::ifstream in(p);
            json j;
            try {
                in >> j;
            } catch (...) {
                continue;
            }
            if (j.contains("config_hash") && j["config_hash"] != hash)
                std::cerr << "warning: " << p.string()
                          << " was produced with a different config (stale mix)\n";
        }
    }

    void emit(const std::string& name, const std::vector<std::string>& columns,
              const std::vector<std::vector<std::string>>& rows) {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        check_stale();
        const auto elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
        sidecar["config_hash"] = hash;
        sidecar["version"] = kVersion;
        sidecar["wall_time_s"] = elapsed.count();
        if (format == "json") {
            json data = json::array();
            for (const auto& r : rows) {
                json rec;
                for (size_t i = 0; i < columns.size(); ++i) {
                    try {
                        rec[columns[i]] = std::stod(r[i]);
                    } catch (...) {
                        rec[columns[i]] = r[i];
                    }
                }
                data.push_back(rec);
            }
            json doc{{"config_hash", hash}, {"columns", columns}, {"data", data}};
            write_text_file(out_dir + "/" + name + ".json", doc.dump(2) + "\n");
        } else {
            write_csv(out_dir + "/" + name + ".csv", hash, columns, rows);
        }
        write_text_file(out_dir + "/" + name + ".meta.json", sidecar.dump(2) + "\n");
    }
};

std::vector<std::string> num_row(std::initializer_list<double> xs) {
    std::vector<std::string> r;
    for (double x : xs) r.push_back(format_sig(x));
    return r;
}

int cmd_string_profile(const json& cfg, bool via_solver, Emitter& em) {
    const StringModel model = model_from(cfg);
    const QuadratureSpec qspec = quad_from(cfg);
    const Scales sc = derive_scales(model);
    const auto& p = cfg.at("profile");
    const std::vector<double> gts = p.at("gamma_tau").get<std::vector<double>>();
    const double y_max = p.at("y_max").get<double>();
    const int n_y = p.at("n_y").get<int>();
    std::vector<double> ys(n_y);  // reduced y*gamma/s
    for (int i = 0; i < n_y; ++i) ys[i] = y_max * i / (n_y - 1);

    std::vector<std::vector<std::string>> rows;
    if (via_solver) {
        const TrajectorySolution traj =
            solve_flat(model, grid_from(cfg.at("grid")), solver_from(cfg));
        const StringField field = reconstruct_field(traj, ys, gts);
        em.sidecar["residual_norm"] = traj.residual_norm;
        for (size_t iy = 0; iy < ys.size(); ++iy)
            for (size_t it = 0; it < gts.size(); ++it)
                rows.push_back(num_row({ys[iy], gts[it], field.at(iy, it)}));
    } else {
        for (double y : ys)
            for (double gt : gts) {
                const double u =
                    eval_u(y * model.s / sc.gamma, gt / sc.gamma, model, qspec);
                rows.push_back(num_row({y, gt, u / sc.xi}));
            }
    }
    em.sidecar["path"] = via_solver ? "solver" : "analytic";
    em.emit("string_profile", {"y_gamma_over_s", "gamma_tau", "u_over_xi"}, rows);
    return kExitOk;
}

int cmd_energies(const json& cfg, Emitter& em) {
    const StringModel model = model_from(cfg);
    const TrajectorySolution traj =
        solve_flat(model, grid_from(cfg.at("grid")), solver_from(cfg));
    const auto& e = cfg.at("energies");
    const double gt_max = e.at("gamma_tau_max").get<double>();
    const int n_tau = e.at("n_tau").get<int>();

    StringField field;  // wide quadrature grid carrier
    field.y_gamma_over_s = default_energy_y_grid();
    field.gamma_tau = {};
    field.scales = traj.scales;

    std::vector<std::vector<std::string>> rows;
    double prev_gap = 1.0;
    double crossing = std::numeric_limits<double>::quiet_NaN();
    double prev_x = 0.0;
    for (int i = 0; i < n_tau; ++i) {
        const double gt = gt_max * i / (n_tau - 1);
        const EnergyBreakdown eb = energy_breakdown(traj, field, gt);
        const double x = traj.x_at_gamma_tau(gt);
        const double ep = eb.E_particle / traj.V;
        const double es = (eb.E_string_elastic - eb.E_string_kinetic) / traj.V;
        rows.push_back(num_row({gt, x, ep, es}));
        const double gap = ep - es;
        if (i > 0 && prev_gap < 0.0 && gap >= 0.0)
            crossing = prev_x + (x - prev_x) * (-prev_gap) / (gap - prev_gap);
        prev_gap = gap;
        prev_x = x;
    }
    em.sidecar["residual_norm"] = traj.residual_norm;
    em.sidecar["crossing_x_over_xi"] = crossing;  // reported, not asserted
    em.emit("energies", {"gamma_tau", "x_over_xi", "Ep_over_V", "Estring_over_V"},
            rows);
    return kExitOk;
}

int cmd_action(const json& cfg, Emitter& em) {
    const StringModel model = model_from(cfg);
    const TrajectorySolution traj =
        solve_flat(model, grid_from(cfg.at("grid")), solver_from(cfg));
    const ActionCurve curve = action_curve(traj, model);
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : curve.samples)
        rows.push_back(num_row({s.x_over_xi, s.action, s.ratio}));
    json report = json::object();
    for (double x : cfg.at("action").at("x_over_xi").get<std::vector<double>>())
        report[format_sig(x)] = curve.ratio_at(x);
    em.sidecar["ratio_at_x_over_xi"] = report;
    em.sidecar["residual_norm"] = traj.residual_norm;
    em.emit("action", {"x_over_xi", "A", "A_over_A_wkb"}, rows);
    return kExitOk;
}

int cmd_field_sweep(const json& cfg, Emitter& em) {
    const StringModel model = model_from(cfg);
    const Scales sc = derive_scales(model);
    const auto& sw = cfg.at("sweep");
    const TauGrid grid = TauGrid::graded(
        sw.at("n").get<int>(), cfg.at("grid").at("tau_max").get<double>(),
        sw.at("grading").get<double>());
    std::vector<double> fields;
    for (double f : sw.at("eE0_xi_over_V").get<std::vector<double>>())
        fields.push_back(f * model.V / sc.xi);
    const FieldSweepResult res =
        bow_energy_sweep(model, fields, grid, solver_from(cfg));
    std::vector<std::vector<std::string>> rows;
    bool any_failed = false;
    for (const auto& e : res.entries) {
        rows.push_back(num_row(
            {e.eE0_xi_over_V, e.bow_energy / model.V, e.gamma_tau0}));
        if (!e.converged) any_failed = true;
    }
    em.sidecar["crossover_eE0_xi_over_V"] = res.crossover_eE0_xi_over_V;
    json flags = json::array();
    for (const auto& e : res.entries)
        flags.push_back(json{{"eE0_xi_over_V", e.eE0_xi_over_V},
                             {"beyond_quantum_limit", e.beyond_quantum_limit},
                             {"converged", e.converged},
                             {"error", e.error}});
    em.sidecar["entries"] = flags;
    em.emit("field_sweep", {"eE0_xi_over_V", "E_bow_over_V", "gamma_tau0"}, rows);
    return any_failed ? kExitNumerics : kExitOk;
}

int cmd_regimes(const json& cfg, Emitter& em) {
    const AtomDielectricScenario scn = scenario_from(cfg);
    const auto& r = cfg.at("regimes");
    const auto rows_raw =
        regime_map(scn, r.at("log10_R_min").get<double>(),
                   r.at("log10_R_max").get<double>(),
                   r.at("points_per_decade").get<int>());
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : rows_raw)
        rows.push_back({format_sig(row.log10_R_over_aB),
                        format_sig(row.log10_xi_over_aB), row.regime});
    em.emit("regimes", {"log10_R_over_aB", "log10_xi_over_aB", "regime"}, rows);
    return kExitOk;
}

int cmd_vdw(const json& cfg, Emitter& em) {
    AtomDielectricScenario scn = scenario_from(cfg);
    std::vector<std::vector<std::string>> rows;
    double coeff = 0.0;
    for (double r : cfg.at("vdw").at("R_over_aB_values").get<std::vector<double>>()) {
        scn.R = r * scn.a_B;
        bool far_ok = false;
        const double U = vdw_energy(scn, hydrogen_polarizability(scn.a_B),
                                    default_vdw_phi, &far_ok);
        coeff = -U / scn.V_ryd * std::pow(r, 4);
        rows.push_back(num_row({r, U / scn.V_ryd, coeff}));
    }
    em.sidecar["coefficient"] = coeff;  // 37.3 for eps0 = 2
    em.emit("vdw", {"R_over_aB", "U_over_V", "coefficient"}, rows);
    return kExitOk;
}

int cmd_lamb(const json& cfg, Emitter& em) {
    AtomDielectricScenario scn = scenario_from(cfg);
    std::vector<std::vector<std::string>> rows;
    const double g = 1.0 / scn.hbar_c_over_e2;
    const Estimate usual = lamb_shift_usual(g, scn.V_ryd);
    for (double r : cfg.at("lamb").at("R_over_aB_values").get<std::vector<double>>()) {
        scn.R = r * scn.a_B;
        const RegimeReport rep = classify_regime(scn);
        const Estimate dE = lamb_shift_dielectric(scn, rep.effective_damping);
        rows.push_back(
            {format_sig(r), regime_label(rep.regime),
             format_sig(scn.hbar * rep.effective_damping / scn.V_ryd),
             format_sig(usual.value / scn.V_ryd), format_sig(dE.value / scn.V_ryd),
             dE.order_of_magnitude ? "estimate" : "formula"});
    }
    em.sidecar["usual_lamb_over_V"] = usual.value / scn.V_ryd;
    em.emit("lamb",
            {"R_over_aB", "regime", "hbar_gamma_eff_over_V", "dE_usual_over_V",
             "dE_dielectric_over_V", "precision"},
            rows);
    return kExitOk;
}

int cmd_layer(const json& cfg, Emitter& em) {
    const AtomDielectricScenario scn = scenario_from(cfg);
    const double L = cfg.at("layer").at("L_over_aB").get<double>() * scn.a_B;
    const RepulsionBound b = repulsion_layer_bound(scn, L);
    std::vector<std::vector<std::string>> rows{
        {format_sig(L / scn.a_B), format_sig(b.R_max / scn.a_B),
         b.capped_at_band_edge ? "capped" : "interior"}};
    em.emit("layer", {"L_over_aB", "R_max_over_aB", "bound_kind"}, rows);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"bow-state simulator: dissipative underbarrier trajectories, "
                 "energy partition, and atom-dielectric regime maps"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir_flag;
    std::string format_flag;
    bool via_solver = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--set", overrides, "override config entries, key.path=value");
    app.add_option("--out", out_dir_flag, "output directory");
    app.add_option("--format", format_flag, "csv or json data payload");

    auto* c_profile =
        app.add_subcommand("string-profile", "u/xi vs y*gamma/s curves");
    c_profile->add_flag("--via-solver", via_solver,
                        "use the nonlocal solver instead of the closed form");
    auto* c_energies =
        app.add_subcommand("energies", "particle/string energy partition");
    auto* c_action = app.add_subcommand("action", "underbarrier action vs WKB");
    auto* c_sweep =
        app.add_subcommand("field-sweep", "bow energy vs tilting field");
    auto* c_regimes =
        app.add_subcommand("regimes", "coherence-length map vs distance");
    auto* c_vdw = app.add_subcommand("vdw", "van der Waals energy");
    auto* c_lamb = app.add_subcommand("lamb", "Lamb shift estimates");
    auto* c_layer = app.add_subcommand("layer", "repulsion layer bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        json cfg = default_config();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "error: cannot read config " << config_path << "\n";
                return kExitIo;
            }
            json user;
            try {
                in >> user;
            } catch (const std::exception& e) {
                std::cerr << "error: config parse: " << e.what() << "\n";
                return kExitConfig;
            }
            check_keys(user, default_config(), "");
            merge_into(cfg, user);
        }
        for (const auto& kv : overrides) apply_override(cfg, kv);
        if (!out_dir_flag.empty()) cfg["output_dir"] = out_dir_flag;
        if (!format_flag.empty()) cfg["format"] = format_flag;
        const std::string fmt = cfg.at("format").get<std::string>();
        if (fmt != "csv" && fmt != "json")
            throw ConfigError("format must be csv or json");

        Emitter em;
        em.out_dir = cfg.at("output_dir").get<std::string>();
        em.hash = hash_hex(cfg.dump());
        em.format = fmt;
        em.sidecar["config"] = cfg;
        em.sidecar["command"] = app.get_subcommands().front()->get_name();

        if (c_profile->parsed()) return cmd_string_profile(cfg, via_solver, em);
        if (c_energies->parsed()) return cmd_energies(cfg, em);
        if (c_action->parsed()) return cmd_action(cfg, em);
        if (c_sweep->parsed()) return cmd_field_sweep(cfg, em);
        if (c_regimes->parsed()) return cmd_regimes(cfg, em);
        if (c_vdw->parsed()) return cmd_vdw(cfg, em);
        if (c_lamb->parsed()) return cmd_lamb(cfg, em);
        if (c_layer->parsed()) return cmd_layer(cfg, em);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ModelError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ScenarioError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NonConvergenceError& e) {
        std::cerr << "numerical error: " << e.what()
                  << " (best residual " << e.best_residual << ")\n";
        return kExitNumerics;
    } catch (const QuadratureFailure& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerics;
    } catch (const SolverError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerics;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

} // namespace bowsim
