#ifndef ENTFORCE_RUNNER_HPP
#define ENTFORCE_RUNNER_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "entforce/config.hpp"
#include "entforce/dynamics.hpp"
#include "entforce/fit.hpp"
#include "entforce/table.hpp"

// Scenario engine: maps each named experiment onto the physics layer and
// assembles a ResultTable. All grids are deterministic and results are
// aggregated in grid order, so output is bit-identical for any worker count.

namespace entforce {

inline constexpr const char* code_version = "1.0.0";

// Positive --jobs wins, then ENTFORCE_JOBS, then hardware concurrency (0).
inline int resolve_jobs(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ENTFORCE_JOBS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (*env == '\0' || *end != '\0' || n < 1 || n > 4096)
            throw ConfigError("ENTFORCE_JOBS must be a positive integer, got '" +
                              std::string(env) + "'");
        return static_cast<int>(n);
    }
    return 0;
}

namespace detail {

inline void parallel_for_index(std::size_t count, int jobs,
                               const std::function<void(std::size_t)>& body) {
    std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs)
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    std::vector<std::exception_ptr> errors(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::string fmt(double x) { return format_value(x); }

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

inline double atom_gamma0(const ExperimentConfig& cfg) {
    return spontaneous_decay_rate(cfg.atom.omega0, cfg.atom.d0);
}

inline void echo_atom(ResultTable& t, const ExperimentConfig& cfg) {
    t.metadata.emplace_back("scenario", cfg.scenario);
    t.metadata.emplace_back("code_version", code_version);
    t.metadata.emplace_back("omega0_rad_s", fmt(cfg.atom.omega0));
    t.metadata.emplace_back("d0_Cm", fmt(cfg.atom.d0));
    t.metadata.emplace_back("theta_rad", fmt(cfg.atom.theta));
    t.metadata.emplace_back("r_um", fmt(cfg.atom.geometry.r * 1e6));
    t.metadata.emplace_back("gamma0_per_s", fmt(atom_gamma0(cfg)));
    if (cfg.atom.graphene) {
        const GrapheneModel& g = *cfg.atom.graphene;
        t.metadata.emplace_back("graphene", "true");
        t.metadata.emplace_back("fermi_energy_eV", fmt(g.fermi_energy));
        t.metadata.emplace_back("relaxation_time_s", fmt(g.relaxation_time));
        t.metadata.emplace_back("temperature_K", fmt(g.temperature));
        t.metadata.emplace_back("substrate_epsilon", fmt(g.substrate_permittivity.real()));
        t.metadata.emplace_back("z0_nm", fmt(cfg.atom.geometry.z0 * 1e9));
    }
    t.metadata.emplace_back("rel_tol", fmt(cfg.tolerances.rel_tol));
    t.metadata.emplace_back("abs_tol", fmt(cfg.tolerances.abs_tol));
}

inline void echo_pulse(ResultTable& t, const ExperimentConfig& cfg) {
    const double gamma0 = atom_gamma0(cfg);
    const bool fock = cfg.pulse.kind == PulseKind::fock;
    t.metadata.emplace_back("pulse_kind", fock ? "fock" : "coherent");
    if (fock)
        t.metadata.emplace_back("photon_count", std::to_string(cfg.pulse.photon_count));
    else
        t.metadata.emplace_back("mean_photon_number", fmt(cfg.pulse.mean_photon_number));
    t.metadata.emplace_back("tau_f_inv_gamma0", fmt(cfg.pulse.tau_f * gamma0));
    t.metadata.emplace_back("carrier_rad_s",
                            fmt(cfg.pulse.carrier > 0.0 ? cfg.pulse.carrier : cfg.atom.omega0));
    t.metadata.emplace_back("t1_inv_gamma0", fmt(cfg.pulse.t1 * gamma0));
    t.metadata.emplace_back("t2_inv_gamma0", fmt(cfg.pulse.t2 * gamma0));
    t.metadata.emplace_back("eta1", fmt(cfg.pulse.eta1));
    t.metadata.emplace_back("eta2", fmt(cfg.pulse.eta2));
}

inline void echo_grid(ResultTable& t, const std::string& key, const std::vector<double>& g) {
    std::string v;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i > 0) v += ',';
        v += fmt(g[i]);
    }
    t.metadata.emplace_back(key, v);
}

inline void set_pulse_length_gamma0(ExperimentConfig& cfg, double tau_gamma) {
    cfg.pulse.tau_f = tau_gamma / atom_gamma0(cfg);
}

// Figure presets fill in the parameters the figure fixes, but never
// override a value the user set explicitly.
inline void preset_pulse_length(ExperimentConfig& cfg, double tau_gamma) {
    if (!cfg.was_provided("pulse.tau_f_inv_gamma0")) set_pulse_length_gamma0(cfg, tau_gamma);
}

inline void preset_eta(ExperimentConfig& cfg, double e1, double e2) {
    if (!cfg.was_provided("pulse.eta1")) cfg.pulse.eta1 = e1;
    if (!cfg.was_provided("pulse.eta2")) cfg.pulse.eta2 = e2;
}

inline void require_vacuum(const ExperimentConfig& cfg) {
    if (cfg.atom.graphene)
        throw ConfigError("scenario '" + cfg.scenario + "' is a free-space computation; "
                          "disable the [graphene] section");
}

// Enables the graphene interface and retunes the transition into the
// plasmon band (hbar omega0 = 0.7 eV) unless the user chose otherwise.
inline void preset_graphene(ExperimentConfig& cfg) {
    if (!cfg.atom.graphene) {
        if (cfg.was_provided("graphene.enabled"))
            throw ConfigError("scenario '" + cfg.scenario +
                              "' requires the graphene environment");
        cfg.atom.graphene = GrapheneModel{};
    }
    if (!cfg.was_provided("atom.omega0_rad_s"))
        cfg.atom.omega0 = 0.7 * constants::ev / constants::hbar;
}

inline ResultTable scenario_fig2(const ExperimentConfig& in, int jobs) {
    ExperimentConfig cfg = in;
    require_vacuum(cfg);
    std::vector<double> r_um = cfg.sweep.axis == "r"
                                   ? cfg.sweep.grid
                                   : linspace(0.9, 1.5, 7);
    const double gamma0 = atom_gamma0(cfg);
    const std::size_t samples = 400;

    std::vector<ObservableSeries> series(r_um.size());
    parallel_for_index(r_um.size(), jobs, [&](std::size_t i) {
        DipolePairConfig atom = cfg.atom;
        atom.geometry.r = r_um[i] * 1e-6;
        series[i] = simulate(atom, cfg.pulse, default_time_span(gamma0, cfg.pulse), samples);
    });

    ResultTable t;
    echo_atom(t, cfg);
    echo_pulse(t, cfg);
    echo_grid(t, "r_grid_um", r_um);
    t.names = {"time", "r", "force"};
    t.units = {"1/gamma0", "um", "N"};
    for (std::size_t i = 0; i < r_um.size(); ++i)
        for (std::size_t k = 0; k < series[i].times.size(); ++k)
            t.rows.push_back({series[i].times[k], r_um[i], series[i].force[k]});
    return t;
}

inline ResultTable scenario_fig3(const ExperimentConfig& in, bool local_pumping) {
    ExperimentConfig cfg = in;
    require_vacuum(cfg);
    const double sqrt_half = std::sqrt(0.5);
    if (local_pumping) {
        // Fig. 3(b) caption reads "tau_f gamma0 / 2 pi = 0.75"; both readings
        // land in the metadata and the 2 pi form drives the run.
        preset_pulse_length(cfg, 0.75 * 2.0 * M_PI);
        preset_eta(cfg, 1.0, 0.0);
    } else {
        preset_pulse_length(cfg, 0.62);
        preset_eta(cfg, sqrt_half, sqrt_half);
    }

    const double gamma0 = atom_gamma0(cfg);
    const ObservableSeries s =
        simulate(cfg.atom, cfg.pulse, default_time_span(gamma0, cfg.pulse), 1200);

    ResultTable t;
    echo_atom(t, cfg);
    echo_pulse(t, cfg);
    if (local_pumping)
        t.metadata.emplace_back("tau_f_inv_gamma0_alternate_reading", fmt(0.75));
    t.names = {"time", "force", "concurrence", "p1e", "p2e", "absorbed"};
    t.units = {"1/gamma0", "N", "1", "1", "1", "1"};
    for (std::size_t k = 0; k < s.times.size(); ++k)
        t.rows.push_back({s.times[k], s.force[k], s.concurrence[k], s.p1e[k], s.p2e[k],
                          s.absorbed_total[k]});
    return t;
}

inline ResultTable scenario_fig4(const ExperimentConfig& in, int jobs) {
    ExperimentConfig cfg = in;
    require_vacuum(cfg);
    preset_pulse_length(cfg, 0.3);

    std::vector<int> fock_grid = {1, 2, 3};
    std::vector<double> coherent_grid = {1.0, 3.0, 10.0};
    if (cfg.sweep.axis == "n") {
        fock_grid.clear();
        for (double v : cfg.sweep.grid) fock_grid.push_back(static_cast<int>(v + 0.5));
    } else if (cfg.sweep.axis == "mean_n") {
        coherent_grid = cfg.sweep.grid;
    }

    struct Job {
        bool coherent;
        double photons;
    };
    std::vector<Job> grid;
    for (int n : fock_grid) grid.push_back({false, static_cast<double>(n)});
    for (double m : coherent_grid) grid.push_back({true, m});

    const double gamma0 = atom_gamma0(cfg);
    std::vector<PeakMetrics> peaks(grid.size());
    parallel_for_index(grid.size(), jobs, [&](std::size_t i) {
        PulseSpec pulse = cfg.pulse;
        if (grid[i].coherent) {
            pulse.kind = PulseKind::coherent;
            pulse.mean_photon_number = grid[i].photons;
        } else {
            pulse.kind = PulseKind::fock;
            pulse.photon_count = static_cast<int>(grid[i].photons);
        }
        peaks[i] = peak_metrics(
            simulate(cfg.atom, pulse, default_time_span(gamma0, pulse), 1200));
    });

    ResultTable t;
    echo_atom(t, cfg);
    echo_pulse(t, cfg);
    t.names = {"is_coherent", "photon_number", "peak_force", "peak_time"};
    t.units = {"1", "1", "N", "1/gamma0"};
    for (std::size_t i = 0; i < grid.size(); ++i)
        t.rows.push_back({grid[i].coherent ? 1.0 : 0.0, grid[i].photons,
                          peaks[i].force_value, peaks[i].force_time});
    return t;
}

// The graphene figures normalize by the free-space force-operator eigenvalue
// at r0 = 1.05 um (same dipole orientation).
inline double vacuum_normalizer(const ExperimentConfig& cfg, double r0_m) {
    DipolePairConfig vac = cfg.atom;
    vac.graphene.reset();
    vac.geometry.r = r0_m;
    return std::abs(couplings_free_space(vac).force_element);
}

inline ResultTable scenario_fig5a(const ExperimentConfig& in, int jobs) {
    ExperimentConfig cfg = in;
    preset_graphene(cfg);
    const std::vector<double> r_um =
        cfg.sweep.axis == "r" ? cfg.sweep.grid : linspace(0.95, 1.15, 9);
    const std::vector<double> z0_nm = cfg.was_provided("graphene.z0_nm")
                                          ? std::vector<double>{cfg.atom.geometry.z0 * 1e9}
                                          : std::vector<double>{10, 20, 50, 200, 500};
    const double r0_m = 1.05e-6;
    const double f_vac = vacuum_normalizer(cfg, r0_m);

    std::vector<double> force(z0_nm.size() * r_um.size());
    parallel_for_index(force.size(), jobs, [&](std::size_t i) {
        DipolePairConfig atom = cfg.atom;
        atom.geometry.z0 = z0_nm[i / r_um.size()] * 1e-9;
        atom.geometry.r = r_um[i % r_um.size()] * 1e-6;
        force[i] = couplings_from_green(atom).force_element;
    });

    ResultTable t;
    echo_atom(t, cfg);
    echo_grid(t, "r_grid_um", r_um);
    echo_grid(t, "z0_grid_nm", z0_nm);
    t.metadata.emplace_back("r0_um", fmt(r0_m * 1e6));
    t.metadata.emplace_back("f_vacuum_r0_N", fmt(f_vac));
    t.names = {"r", "z0", "normalized_force"};
    t.units = {"um", "nm", "1"};
    for (std::size_t zi = 0; zi < z0_nm.size(); ++zi)
        for (std::size_t ri = 0; ri < r_um.size(); ++ri)
            t.rows.push_back({r_um[ri], z0_nm[zi], force[zi * r_um.size() + ri] / f_vac});
    return t;
}

inline ResultTable scenario_fig5b(const ExperimentConfig& in) {
    ExperimentConfig cfg = in;
    require_vacuum(cfg);
    if (!cfg.was_provided("atom.r_um")) cfg.atom.geometry.r = 0.8e-6;

    const bool theta_only = cfg.sweep.axis == "theta";
    const bool r_only = cfg.sweep.axis == "r";
    const std::vector<double> r_um = r_only ? cfg.sweep.grid : linspace(0.4, 1.6, 61);
    const std::vector<double> theta_rad =
        theta_only ? cfg.sweep.grid : linspace(0.0, M_PI / 2.0, 31);
    const double r_sub_um = cfg.atom.geometry.r * 1e6;

    auto eigenvalue = [&](double r_um_value, double theta) {
        DipolePairConfig atom = cfg.atom;
        atom.geometry.r = r_um_value * 1e-6;
        atom.theta = theta;
        return couplings_free_space(atom).force_element;
    };

    ResultTable t;
    echo_atom(t, cfg);
    t.names = {"curve", "r", "theta", "force"};
    t.units = {"1", "um", "rad", "N"};
    if (!theta_only) {
        echo_grid(t, "r_grid_um", r_um);
        for (double r : r_um) t.rows.push_back({0.0, r, 0.0, eigenvalue(r, 0.0)});
        for (double r : r_um)
            t.rows.push_back({1.0, r, M_PI / 2.0, eigenvalue(r, M_PI / 2.0)});
    }
    if (!r_only) {
        echo_grid(t, "theta_grid_rad", theta_rad);
        t.metadata.emplace_back("theta_scan_r_um", fmt(r_sub_um));
        for (double th : theta_rad)
            t.rows.push_back({2.0, r_sub_um, th, eigenvalue(r_sub_um, th)});
    }
    return t;
}

inline ResultTable scenario_vdw(const ExperimentConfig& in, int jobs) {
    ExperimentConfig cfg = in;
    require_vacuum(cfg);
    const double k0 = cfg.atom.omega0 / constants::c_light;
    std::vector<double> r_um;
    if (cfg.sweep.axis == "r") {
        r_um = cfg.sweep.grid;
    } else {
        // log grid over k0 r in [0.01, 100]: both scaling regions present
        for (std::size_t i = 0; i < 41; ++i)
            r_um.push_back(0.01 * std::pow(10.0, static_cast<double>(i) / 10.0) / k0 * 1e6);
    }

    std::vector<double> potential(r_um.size()), force(r_um.size());
    parallel_for_index(r_um.size(), jobs, [&](std::size_t i) {
        DipolePairConfig atom = cfg.atom;
        atom.geometry.r = r_um[i] * 1e-6;
        potential[i] = vdw_potential(atom);
        force[i] = vdw_force(atom);
    });

    ResultTable t;
    echo_atom(t, cfg);
    echo_grid(t, "r_grid_um", r_um);
    auto window_fit = [&](const std::vector<double>& values, double lo, double hi,
                          const char* key) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < r_um.size(); ++i) {
            const double x = k0 * r_um[i] * 1e-6;
            if (x >= lo && x <= hi) pts.emplace_back(r_um[i], std::abs(values[i]));
        }
        if (pts.size() >= 4) t.metadata.emplace_back(key, fmt(fit_loglog_slope(pts)));
    };
    window_fit(force, 0.01, 0.1, "slope_force_near");
    window_fit(force, 10.0, 100.0, "slope_force_far");
    window_fit(potential, 0.01, 0.1, "slope_potential_near");
    window_fit(potential, 10.0, 100.0, "slope_potential_far");

    t.names = {"r", "potential", "force", "local_slope"};
    t.units = {"um", "J", "N", "1"};
    for (std::size_t i = 0; i < r_um.size(); ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 < r_um.size() ? i + 1 : i;
        double slope = 0.0;
        if (hi > lo)
            slope = (std::log(std::abs(force[hi])) - std::log(std::abs(force[lo]))) /
                    (std::log(r_um[hi]) - std::log(r_um[lo]));
        t.rows.push_back({r_um[i], potential[i], force[i], slope});
    }
    return t;
}

inline ResultTable scenario_graphene_sweep(const ExperimentConfig& in, int jobs) {
    ExperimentConfig cfg = in;
    preset_graphene(cfg);
    const std::vector<double> z0_nm =
        cfg.sweep.axis == "z0" ? cfg.sweep.grid : std::vector<double>{10, 20, 50, 200, 500};
    const std::vector<double> r_um = linspace(0.95, 1.15, 9);
    const double r0_m = 1.05e-6;
    const double f_vac = vacuum_normalizer(cfg, r0_m);

    std::vector<double> force(z0_nm.size() * r_um.size());
    parallel_for_index(force.size(), jobs, [&](std::size_t i) {
        DipolePairConfig atom = cfg.atom;
        atom.geometry.z0 = z0_nm[i / r_um.size()] * 1e-9;
        atom.geometry.r = r_um[i % r_um.size()] * 1e-6;
        force[i] = couplings_from_green(atom).force_element;
    });

    ResultTable t;
    echo_atom(t, cfg);
    echo_grid(t, "z0_grid_nm", z0_nm);
    echo_grid(t, "r_grid_um", r_um);
    t.metadata.emplace_back("r0_um", fmt(r0_m * 1e6));
    t.metadata.emplace_back("f_vacuum_r0_N", fmt(f_vac));
    t.names = {"z0", "enhancement"};
    t.units = {"nm", "1"};
    for (std::size_t zi = 0; zi < z0_nm.size(); ++zi) {
        double best = 0.0;
        for (std::size_t ri = 0; ri < r_um.size(); ++ri)
            best = std::max(best, std::abs(force[zi * r_um.size() + ri]) / f_vac);
        t.rows.push_back({z0_nm[zi], best});
    }
    return t;
}

inline ResultTable scenario_custom(const ExperimentConfig& in, int jobs) {
    ExperimentConfig cfg = in;
    require_vacuum(cfg);
    const double gamma0 = atom_gamma0(cfg);
    const std::vector<double> tau_gamma = cfg.sweep.axis == "tau_f"
                                              ? cfg.sweep.grid
                                              : std::vector<double>{0.2, 0.4, 0.63, 1.3, 2.5};
    std::vector<double> tau_s;
    for (double tg : tau_gamma) tau_s.push_back(tg / gamma0);

    const std::vector<SweepPoint> points =
        sweep_pulse_length(cfg.atom, cfg.pulse, tau_s, jobs);

    ResultTable t;
    echo_atom(t, cfg);
    echo_pulse(t, cfg);
    echo_grid(t, "tau_f_grid_inv_gamma0", tau_gamma);
    t.names = {"tau_f", "peak_force", "peak_force_time", "peak_concurrence",
               "peak_concurrence_time", "peak_p1e", "peak_p1e_time"};
    t.units = {"1/gamma0", "N", "1/gamma0", "1", "1/gamma0", "1", "1/gamma0"};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const PeakMetrics& p = points[i].peaks;
        t.rows.push_back({tau_gamma[i], p.force_value, p.force_time, p.concurrence_value,
                          p.concurrence_time, p.p1e_value, p.p1e_time});
    }
    return t;
}

} // namespace detail

inline ResultTable run_scenario(const ExperimentConfig& cfg, int jobs = 0) {
    const std::string context = "scenario " + cfg.scenario + ": ";
    try {
        if (cfg.scenario == "fig2") return detail::scenario_fig2(cfg, jobs);
        if (cfg.scenario == "fig3a") return detail::scenario_fig3(cfg, false);
        if (cfg.scenario == "fig3b") return detail::scenario_fig3(cfg, true);
        if (cfg.scenario == "fig4") return detail::scenario_fig4(cfg, jobs);
        if (cfg.scenario == "fig5a") return detail::scenario_fig5a(cfg, jobs);
        if (cfg.scenario == "fig5b") return detail::scenario_fig5b(cfg);
        if (cfg.scenario == "vdw-sweep") return detail::scenario_vdw(cfg, jobs);
        if (cfg.scenario == "graphene-sweep") return detail::scenario_graphene_sweep(cfg, jobs);
        if (cfg.scenario == "custom") return detail::scenario_custom(cfg, jobs);
    } catch (const ConfigError&) {
        throw;
    } catch (const IntegrationError& e) {
        throw IntegrationError(context + e.what(), e.time);
    } catch (const StiffnessError& e) {
        throw StiffnessError(context + e.what(), e.time);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(context + e.what(), e.partial);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(context + e.what());
    } catch (const std::domain_error& e) {
        throw std::domain_error(context + e.what());
    }
    throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

} // namespace entforce

#endif
