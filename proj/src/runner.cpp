#include "carleman/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include "carleman/field_io.hpp"
#include "carleman/harness.hpp"
#include "carleman/inverse.hpp"
#include "carleman/norms.hpp"

namespace carleman {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(error_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

AnnulusGrid doubled(const AnnulusGrid& g) {
    return build_annulus_grid(g.r0, g.r1, 2 * g.nr, 2 * g.ntheta, g.T, 2 * g.nt);
}

std::vector<double> zero_initial(const AnnulusGrid& g, int n) {
    return std::vector<double>(static_cast<std::size_t>(n) * g.n_space(), 0.0);
}

// One solved dataset per sample and resolution.
struct SolvedSample {
    SpaceTimeField g;
    SpaceTimeField y;
    ObservationTrace zeta;
};

SolvedSample solve_for(const ForwardProblem& fp, const SpaceTimeField& g) {
    SolvedSample out;
    out.g = g;
    out.y = fp.solve(g, zero_initial(fp.grid(), fp.n_components()));
    out.zeta = fp.observe(out.y);
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw config_error("cannot create output directory: " + dir);
}

SourceClassSpec class_from_config(const ExperimentConfig& cfg) {
    if (!cfg.gtilde_files.empty()) {
        SourceClassSpec cls;
        cls.q = cfg.class_q;
        cls.delta_tilde = cfg.class_delta;
        for (const auto& path : cfg.gtilde_files)
            cls.g_tilde.push_back(read_field(path, cfg.grid));
        cls.validate(cfg.grid);
        return cls;
    }
    SourceClassSpec cls = default_source_class(cfg.grid, cfg.n, cfg.class_q);
    if (cfg.class_delta > 0.0) cls.delta_tilde = cfg.class_delta;
    return cls;
}

}  // namespace

RunOutcome run_forward_cmd(const ExperimentConfig& cfg, std::ostream& log) {
    ensure_dir(cfg.output_dir);
    const ForwardProblem fp(cfg.grid, cfg.problem.coeffs, cfg.problem.bspec, cfg.problem.ospec,
                            cfg.scheme);

    SpaceTimeField g(cfg.n, cfg.grid.n_time(), cfg.grid.n_space());
    std::vector<double> y0 = zero_initial(cfg.grid, cfg.n);
    if (cfg.has_exact) {
        g = source_field(cfg.problem, cfg.grid, cfg.n);
        y0 = initial_vector(cfg.problem, cfg.grid, cfg.n);
    } else if (cfg.samples > 0) {
        const SourceClassSpec cls = default_source_class(cfg.grid, cfg.n, cfg.class_q);
        g = sample_source(cls, cfg.grid, cfg.sample_seed, cfg.n).field;
    }

    const SpaceTimeField y = fp.solve(g, y0);
    const ObservationTrace zeta = fp.observe(y);

    write_field(cfg.output_dir + "/y.fld", y, cfg.grid);
    write_field(cfg.output_dir + "/g.fld", g, cfg.grid);
    write_trace(cfg.output_dir + "/zeta.fld", zeta, cfg.grid);
    if (cfg.export_csv_fields) {
        export_field_csv(cfg.output_dir + "/y.csv", y, cfg.grid);
        export_trace_csv(cfg.output_dir + "/zeta.csv", zeta, cfg.grid);
    }

    log << "y_l2=" << fmt(lq_norm(y, cfg.grid, 2.0)) << "\n";
    log << "y_max=" << fmt(y.max_abs()) << "\n";
    log << "zeta_l2=" << fmt(std::sqrt(std::max(0.0, fp.dot_trace(zeta, zeta)))) << "\n";
    if (cfg.has_exact)
        log << "relative_l2_error=" << fmt(relative_l2_error(y, cfg.problem, cfg.grid)) << "\n";
    return {};
}

RunOutcome run_observe_cmd(const ExperimentConfig& cfg, const std::string& field_path,
                           std::ostream& log) {
    ensure_dir(cfg.output_dir);
    const SpaceTimeField y = read_field(field_path, cfg.grid);
    const ObservationTrace zeta =
        observe(y, cfg.problem.coeffs, cfg.problem.ospec, cfg.grid);
    write_trace(cfg.output_dir + "/zeta.fld", zeta, cfg.grid);
    if (cfg.export_csv_fields) export_trace_csv(cfg.output_dir + "/zeta.csv", zeta, cfg.grid);
    double zmax = 0.0;
    for (double v : zeta.data) zmax = std::max(zmax, std::abs(v));
    log << "zeta_max=" << fmt(zmax) << "\n";
    return {};
}

RunOutcome run_check_cmd(const ExperimentConfig& cfg, std::ostream& log, bool* all_pass) {
    const HypothesisReport rep =
        check_hypotheses(cfg.problem.coeffs, cfg.problem.bspec, cfg.problem.ospec, cfg.grid);
    auto line = [&](const char* name, const HypothesisReport::Entry& e) {
        log << name << ": " << (e.pass ? "pass" : "FAIL");
        if (!e.checked) log << " (deferred)";
        log << " margin=" << fmt(e.margin);
        if (!e.witness.empty()) log << " at " << e.witness;
        log << "\n";
    };
    line("H1", rep.h1);
    line("H2", rep.h2);
    line("H3", rep.h3);
    line("H4", rep.h4);
    line("H5", rep.h5);
    if (all_pass != nullptr) *all_pass = rep.all_pass();
    return {};
}

namespace {

struct VerifyCell {
    double lambda;
    double s;
    double q;
    int sample;
};

CarlemanParams cell_params(const VerifyCell& cell, const ExperimentConfig& cfg, bool lq) {
    CarlemanParams p;
    p.lambda = cell.lambda;
    p.s = cell.s;
    p.gamma_bar = cfg.gamma_bar;
    if (lq) p.s_prime = 1.25 * cfg.gamma_bar * cell.s;
    return p;
}

}  // namespace

RunOutcome run_verify_cmd(const ExperimentConfig& cfg, bool lq, std::ostream& log) {
    if (cfg.samples == 0 && !cfg.has_exact)
        throw config_error("verify: non-manufactured systems need [carleman] samples >= 1");
    ensure_dir(cfg.output_dir);
    const AnnulusGrid fine_grid = doubled(cfg.grid);

    const ForwardProblem base_fp(cfg.grid, cfg.problem.coeffs, cfg.problem.bspec,
                                 cfg.problem.ospec, cfg.scheme);
    const ForwardProblem fine_fp(fine_grid, cfg.problem.coeffs, cfg.problem.bspec,
                                 cfg.problem.ospec, cfg.scheme);

    // solved datasets per sample at both resolutions
    const int n_samples = cfg.samples > 0 ? cfg.samples : 1;
    std::vector<SolvedSample> base(n_samples), fine(n_samples);
    SourceClassSpec cls;
    if (cfg.samples > 0) cls = class_from_config(cfg);
    for (int sidx = 0; sidx < n_samples; ++sidx) {
        if (cfg.samples > 0) {
            const SourceSample smp =
                sample_source(cls, cfg.grid, cfg.sample_seed + sidx, cfg.n);
            base[sidx] = solve_for(base_fp, smp.field);
            if (cfg.refine_check)
                fine[sidx] = solve_for(
                    fine_fp, render_bumps(smp.bumps, smp.time_base, smp.time_amp, fine_grid));
        } else {
            base[sidx] = solve_for(base_fp, source_field(cfg.problem, cfg.grid, cfg.n));
            if (cfg.refine_check)
                fine[sidx] = solve_for(fine_fp, source_field(cfg.problem, fine_grid, cfg.n));
        }
    }

    std::vector<VerifyCell> cells;
    for (double lambda : cfg.lambdas)
        for (double s : cfg.s_values)
            for (double q : (lq ? cfg.q_values : std::vector<double>{2.0}))
                for (int sidx = 0; sidx < n_samples; ++sidx)
                    cells.push_back({lambda, s, q, sidx});

    std::vector<CarlemanReport> reports(cells.size());
    parallel_for(static_cast<int>(cells.size()), cfg.threads, [&](int idx) {
        const VerifyCell& cell = cells[idx];
        const CarlemanParams p = cell_params(cell, cfg, lq);
        const SolvedSample& bs = base[cell.sample];
        CarlemanReport rep =
            lq ? verify_lq_carleman(base_fp, bs.y, bs.g, bs.zeta, p, cell.q)
               : verify_l2_carleman(base_fp, bs.y, bs.g, bs.zeta, p);
        if (cfg.refine_check) {
            const SolvedSample& fs = fine[cell.sample];
            const CarlemanReport fine_rep =
                lq ? verify_lq_carleman(fine_fp, fs.y, fs.g, fs.zeta, p, cell.q)
                   : verify_l2_carleman(fine_fp, fs.y, fs.g, fs.zeta, p);
            apply_refinement_check(rep, fine_rep);
        }
        reports[idx] = std::move(rep);
    });

    std::string csv = "# schema=1\n";
    if (lq) {
        csv += "lambda,s,s_prime,gamma_bar,q,sample,grid,log_scale_lhs,log_scale_rhs,"
               "lhs_y,lhs_dy,lhs_d2y,lhs_dty,rhs_source,rhs_obs,rhs_obs_phi3,"
               "lhs_total,rhs_total,ratio,solver_residual,unconverged,anomaly\n";
    } else {
        csv += "lambda,s,q,sample,grid,log_scale,lhs_dt_d2,lhs_grad,lhs_zero_order,"
               "lhs_gamma0,rhs_source,rhs_obs,lhs_total,rhs_total,ratio,solver_residual,"
               "unconverged,anomaly\n";
    }
    RunOutcome outcome;
    for (std::size_t idx = 0; idx < cells.size(); ++idx) {
        const VerifyCell& cell = cells[idx];
        const CarlemanReport& r = reports[idx];
        if (r.anomaly) ++outcome.anomalies;
        if (r.unconverged) ++outcome.unconverged;
        std::string row;
        row += fmt(cell.lambda) + ',' + fmt(cell.s) + ',';
        if (lq) row += fmt(r.params.s_prime) + ',' + fmt(r.params.gamma_bar) + ',';
        row += fmt(cell.q) + ',' + std::to_string(cell.sample) + ',' + r.grid_signature + ',';
        if (lq) {
            row += fmt(r.log_scale_lhs) + ',' + fmt(r.log_scale_rhs) + ',';
        } else {
            row += fmt(r.log_scale_lhs) + ',';
        }
        for (const auto& [name, v] : r.lhs_terms) row += fmt(v) + ',';
        for (const auto& [name, v] : r.rhs_terms) row += fmt(v) + ',';
        row += fmt(r.lhs_total) + ',' + fmt(r.rhs_total) + ',' + fmt(r.ratio) + ',' +
               fmt(r.solver_residual) + ',' + (r.unconverged ? "1" : "0") + ',' +
               (r.anomaly ? "1" : "0") + '\n';
        csv += row;
    }
    const std::string path =
        cfg.output_dir + (lq ? "/verify_lq.csv" : "/verify_l2.csv");
    write_text_atomic(path, csv);
    log << "wrote " << path << " (" << cells.size() << " cells, " << outcome.anomalies
        << " anomalies, " << outcome.unconverged << " unconverged)\n";
    return outcome;
}

RunOutcome run_reconstruct_cmd(const ExperimentConfig& cfg, std::ostream& log) {
    ensure_dir(cfg.output_dir);
    RunOutcome outcome;

    const SourceClassSpec cls = class_from_config(cfg);

    struct Row {
        int sample;
        double noise;
        std::uint64_t seed;
        double rho;
        int iterations;
        bool converged;
        double residual;
        double gnorm_q;
        double rel_error;
    };

    struct Cell {
        int sample;
        double noise;
        std::uint64_t seed;
        double rho;  // < 0 means discrepancy mode
    };

    // ground-truth samples and their clean observations (serial, cheap)
    const ForwardProblem fp0(cfg.grid, cfg.problem.coeffs, cfg.problem.bspec, cfg.problem.ospec,
                             cfg.scheme);
    std::vector<SourceSample> truths;
    std::vector<ObservationTrace> clean;
    const bool radial_rich = !(cfg.inverse_separable && cfg.dict_angular > 0);
    for (int sidx = 0; sidx < cfg.inverse_samples; ++sidx) {
        truths.push_back(
            sample_source(cls, cfg.grid, cfg.sample_seed + sidx, cfg.n, radial_rich));
        clean.push_back(fp0.apply_forward(truths.back().field));
    }

    std::vector<Cell> cells;
    for (int sidx = 0; sidx < cfg.inverse_samples; ++sidx)
        for (double noise : cfg.noise_levels)
            for (std::uint64_t seed : cfg.noise_seeds) {
                if (cfg.rho_discrepancy) {
                    cells.push_back({sidx, noise, seed, -1.0});
                } else {
                    for (double rho : cfg.rho_values) cells.push_back({sidx, noise, seed, rho});
                }
            }

    std::vector<Row> rows(cells.size());
    auto process = [&](int idx, const ForwardProblem& fp) {
        const Cell& cell = cells[idx];
        auto [zeta_obs, eps] =
            add_relative_noise(clean[cell.sample], cfg.grid, cell.noise, cell.seed);
        ReconstructOptions opt;
        opt.tol = cfg.cg_tol;
        opt.max_iter = cfg.max_iter;
        opt.project_nonneg = cfg.project_nonneg;
        if (cfg.inverse_separable) {
            opt.time_profile = truths[cell.sample].time_profile(cfg.grid);
            opt.dict_radial = cfg.dict_radial;
            opt.dict_angular = cfg.dict_angular;
        }
        ReconstructionResult res;
        if (cell.rho < 0.0) {
            res = reconstruct_discrepancy(fp, zeta_obs, eps, cfg.discrepancy_tau, opt);
        } else {
            opt.rho = cell.rho;
            res = reconstruct(fp, zeta_obs, opt);
        }
        rows[idx] = {cell.sample,
                     cell.noise,
                     cell.seed,
                     res.rho,
                     res.iterations,
                     res.converged,
                     res.residual_norm,
                     lq_norm(res.g_hat, cfg.grid, cfg.class_q),
                     relative_field_error(res.g_hat, truths[cell.sample].field, cfg.grid)};
    };
    // each worker owns a solver instance; the shared fp0 is not used here
    {
        const int n_cells = static_cast<int>(cells.size());
        const int workers = std::max(1, std::min(cfg.threads, n_cells));
        if (workers == 1) {
            for (int i = 0; i < n_cells; ++i) process(i, fp0);
        } else {
            std::atomic<int> next{0};
            std::exception_ptr first_error;
            std::mutex error_mu;
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&]() {
                    std::unique_ptr<ForwardProblem> local;
                    for (int i = next.fetch_add(1); i < n_cells; i = next.fetch_add(1)) {
                        try {
                            if (!local)
                                local = std::make_unique<ForwardProblem>(
                                    cfg.grid, cfg.problem.coeffs, cfg.problem.bspec,
                                    cfg.problem.ospec, cfg.scheme);
                            process(i, *local);
                        } catch (...) {
                            std::lock_guard<std::mutex> lk(error_mu);
                            if (!first_error) first_error = std::current_exception();
                        }
                    }
                });
            }
            for (auto& t : pool) t.join();
            if (first_error) std::rethrow_exception(first_error);
        }
    }

    std::string csv = "# schema=1\n";
    csv += "sample,noise,seed,rho,iterations,converged,residual,gnorm_q,relative_error\n";
    for (const Row& r : rows) {
        if (!r.converged) ++outcome.unconverged;
        csv += std::to_string(r.sample) + ',' + fmt(r.noise) + ',' + std::to_string(r.seed) +
               ',' + fmt(r.rho) + ',' + std::to_string(r.iterations) + ',' +
               (r.converged ? "1" : "0") + ',' + fmt(r.residual) + ',' + fmt(r.gnorm_q) + ',' +
               fmt(r.rel_error) + '\n';
    }
    write_text_atomic(cfg.output_dir + "/reconstruction.csv", csv);
    log << "wrote " << cfg.output_dir << "/reconstruction.csv (" << rows.size() << " rows)\n";

    if (cfg.stability_samples > 0) {
        std::vector<SpaceTimeField> sources;
        for (int sidx = 0; sidx < cfg.stability_samples; ++sidx)
            sources.push_back(
                sample_source(cls, cfg.grid, cfg.sample_seed + 1000 + sidx, cfg.n).field);
        const StabilityTable table = estimate_stability_constant(fp0, sources, cfg.class_q);
        std::string scsv = "# schema=1\nsample,gnorm_q,zeta_norm,ratio,flagged,anomaly\n";
        for (const auto& smp : table.samples) {
            if (smp.anomaly) ++outcome.anomalies;
            scsv += std::to_string(smp.sample_id) + ',' + fmt(smp.g_norm_q) + ',' +
                    fmt(smp.zeta_norm) + ',' + fmt(smp.ratio) + ',' +
                    (smp.flagged ? "1" : "0") + ',' + (smp.anomaly ? "1" : "0") + '\n';
        }
        scsv += "# max_ratio=" + fmt(table.max_ratio) +
                " median_ratio=" + fmt(table.median_ratio) + "\n";
        write_text_atomic(cfg.output_dir + "/stability.csv", scsv);
        log << "wrote " << cfg.output_dir << "/stability.csv (max/median="
            << fmt(table.max_ratio / std::max(table.median_ratio, 1e-300)) << ")\n";
    }
    return outcome;
}

}  // namespace carleman
