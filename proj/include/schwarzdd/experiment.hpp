#ifndef SCHWARZDD_EXPERIMENT_HPP
#define SCHWARZDD_EXPERIMENT_HPP

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "config.hpp"
#include "krylov.hpp"
#include "matrix_market.hpp"
#include "mesh.hpp"
#include "partition.hpp"
#include "preconditioner.hpp"
#include "sparse.hpp"

namespace schwarzdd {

/// One table row, following the ranks/dofs/overlap reporting layout.
struct ExperimentRow {
    index_t ranks = 0;
    index_t dofs = 0;
    int k = 0;
    double delta_over_H_pct = 0.0;
    std::string variant;
    int levels = 1;
    int iterations = 0;
    bool converged = false;
    double kappa = 0.0;
    bool has_kappa = false;
    double walltime = 0.0;
    double true_residual = 0.0;  // recomputed independently of the solver
    std::vector<double> residual_history;
};

/// Optional per-run dumps (decomposition, setup report, residuals, solution).
struct ExperimentArtifacts {
    std::string decomposition_csv;
    std::string setup_report_csv;
    std::string residual_csv;
    std::string solution_txt;
};

namespace detail {

inline BcType bc_type_from_string(const std::string& s) {
    if (s == "dirichlet") return BcType::dirichlet;
    if (s == "neumann") return BcType::neumann;
    if (s == "absorbing") return BcType::absorbing;
    if (s == "incident") return BcType::incident;
    throw std::runtime_error("config: unknown boundary condition '" + s + "'");
}

template <typename Scalar>
ProblemSpec<Scalar> problem_from_config(const ExperimentConfig& cfg) {
    ProblemSpec<Scalar> spec;
    spec.kind = cfg.kind == "helmholtz" ? ProblemKind::helmholtz : ProblemKind::poisson;
    if (spec.kind == ProblemKind::helmholtz) spec.omega = cfg.effective_omega();

    if (cfg.core_width > 0.0) {
        const double cx = cfg.core_center_x, w = cfg.core_width;
        const double core = cfg.core_coefficient, clad = cfg.cladding_coefficient;
        spec.coefficient = [cx, w, core, clad](Point p) {
            return std::abs(p.x - cx) <= 0.5 * w ? core : clad;
        };
    }
    if (cfg.source_constant != 0.0) {
        const double f = cfg.source_constant;
        spec.source = [f](Point) { return Scalar(f); };
    }

    const std::pair<std::string, std::string> sides[] = {{"bottom", cfg.bc_bottom},
                                                         {"right", cfg.bc_right},
                                                         {"top", cfg.bc_top},
                                                         {"left", cfg.bc_left}};
    for (const auto& [mark, bcs] : sides) {
        BoundaryCondition bc;
        bc.type = bc_type_from_string(bcs);
        if (bc.type == BcType::incident && cfg.incident_gaussian_decay > 0.0) {
            const double decay = cfg.incident_gaussian_decay;
            bc.value = [decay](Point p) { return std::exp(-decay * p.x * p.x); };
        }
        spec.bc[mark] = bc;
    }
    return spec;
}

inline SideMarks side_marks() { return SideMarks{"bottom", "right", "top", "left"}; }

template <typename Scalar>
std::string solution_to_text(const Vector<Scalar>& x) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& v : x) {
        if constexpr (scalar_traits<Scalar>::is_complex)
            os << v.real() << " " << v.imag() << "\n";
        else
            os << v << "\n";
    }
    return os.str();
}

}  // namespace detail

/// Per-dof owner and multiplicity dump (plot-ready CSV).
inline std::string decomposition_csv(const OverlappingDecomposition& d) {
    std::ostringstream os;
    os << "dof,owner,multiplicity\n";
    for (index_t dof = 0; dof < d.n_dofs; ++dof)
        os << dof << "," << d.dof_owner[static_cast<std::size_t>(dof)] << ","
           << d.multiplicity[static_cast<std::size_t>(dof)] << "\n";
    return os.str();
}

template <typename Scalar>
std::string setup_report_csv(const SchwarzPreconditioner<Scalar>& M,
                             const OverlappingDecomposition& d) {
    std::ostringstream os;
    os << "subdomain,n_dofs,n_interface,factor_nnz\n";
    for (std::size_t i = 0; i < M.locals.size(); ++i)
        os << i << "," << d.dofs[i].size() << "," << d.interface_dofs[i].size() << ","
           << M.locals[i].factor->factor_nnz() << "\n";
    return os.str();
}

inline std::string residual_csv(const std::vector<double>& history) {
    std::ostringstream os;
    os << "iteration,relative_residual\n";
    os.precision(17);
    for (std::size_t i = 0; i < history.size(); ++i)
        os << (i + 1) << "," << history[i] << "\n";
    return os.str();
}

/// Simple ASCII mesh export: vertex list, cell list, boundary marks.
inline std::string mesh_to_text(const Mesh& mesh) {
    std::ostringstream os;
    os.precision(17);
    os << "vertices " << mesh.vertices.size() << "\n";
    for (const auto& v : mesh.vertices) os << v.x << " " << v.y << "\n";
    os << "cells " << mesh.cells.size() << "\n";
    for (const auto& c : mesh.cells)
        os << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
    os << "boundary_edges " << mesh.boundary_edges.size() << "\n";
    for (const auto& be : mesh.boundary_edges)
        os << be.v0 << " " << be.v1 << " " << be.mark << "\n";
    return os.str();
}

/// Full pipeline for one (refinement, overlap, variant, levels) instance:
/// mesh -> partition -> overlap -> assembly -> preconditioner -> solver.
template <typename Scalar>
std::pair<ExperimentRow, Vector<Scalar>> run_instance(
    const ExperimentConfig& cfg, int refinement, int k, const std::string& variant_str,
    int levels, ExperimentArtifacts* artifacts = nullptr) {
    auto fail = [](const std::string& stage, const std::string& what) -> std::runtime_error {
        return std::runtime_error("[" + stage + "] " + what);
    };

    const int scale = 1 << refinement;
    const index_t nx = cfg.nx * scale, ny = cfg.ny * scale;

    Mesh mesh;
    DofMap dofmap;
    try {
        mesh = structured_quad_mesh(nx, ny, cfg.lx, cfg.ly, detail::side_marks());
        dofmap = q1_dof_map(mesh);
    } catch (const std::exception& e) {
        throw fail("mesh", e.what());
    }

    ProblemSpec<Scalar> spec;
    AssembledSystem<Scalar> sys;
    try {
        spec = detail::problem_from_config<Scalar>(cfg);
        sys = assemble_global(mesh, dofmap, spec);
    } catch (const std::exception& e) {
        throw fail("assembly", e.what());
    }

    const Variant variant = variant_from_string(variant_str);
    const bool optimized = variant == Variant::OAS || variant == Variant::ORAS;

    OverlappingDecomposition decomp;
    try {
        if (cfg.overlap_mode == "node") {
            if (optimized)
                throw std::runtime_error(
                    "OAS/ORAS need local triangulations; node overlap is algebraic only");
            const Graph ng = node_graph(sys.A);
            const index_t N = cfg.mode == "geometric"
                                  ? static_cast<index_t>(cfg.px) * cfg.py * scale * scale
                                  : static_cast<index_t>(cfg.n_subdomains) * scale * scale;
            const Partition p = partition_graph_greedy(ng, N, cfg.seed);
            decomp = extend_overlap_nodes(p, ng, k, &dofmap.dof_coords);
        } else {
            const Graph dual = dual_graph(mesh);
            Partition p;
            if (cfg.mode == "geometric")
                p = partition_geometric(mesh, cfg.px * scale, cfg.py * scale);
            else
                p = partition_graph_greedy(
                    dual, static_cast<index_t>(cfg.n_subdomains) * scale * scale,
                    cfg.seed);
            decomp = extend_overlap_elements(p, dual, k, dofmap, mesh);
        }
    } catch (const std::exception& e) {
        throw fail("decomposition", e.what());
    }

    const auto t0 = std::chrono::steady_clock::now();
    SchwarzPreconditioner<Scalar> M;
    try {
        LocalMatrixBuilder<Scalar> builder;
        if (optimized) {
            builder = [&mesh, &spec, &decomp, &cfg](index_t i) {
                const LocalMesh lm =
                    build_local_mesh(mesh, decomp.elements[static_cast<std::size_t>(i)]);
                if (lm.global_dof_of_local_dof != decomp.dofs[static_cast<std::size_t>(i)])
                    throw std::runtime_error("local mesh dofs do not match V_i");
                // For wave problems the interface closure mirrors the
                // first-order absorbing condition: alpha scales the
                // impedance i*omega. For real problems alpha is the real
                // Robin coefficient itself.
                const Scalar robin =
                    spec.kind == ProblemKind::helmholtz
                        ? Scalar(cfg.alpha) * detail::i_omega<Scalar>(spec.omega)
                        : Scalar(cfg.alpha);
                return assemble_local_robin(lm, spec, robin);
            };
        }
        SchwarzOptions opts;
        opts.oras_inverse_multiplicity = cfg.oras_inverse_multiplicity;
        opts.n_threads = cfg.threads;
        M = build_one_level(sys.A, decomp, variant, builder, sys.dirichlet_dofs, opts);
        if (levels == 2) M = build_two_level(M, sys.A);
    } catch (const std::exception& e) {
        throw fail("preconditioner", e.what());
    }

    Vector<Scalar> x;
    SolveStats stats;
    ExperimentRow row;
    try {
        const auto Aop = as_operator(sys.A);
        const auto Mop = M.as_linear_operator();
        if (cfg.method == "pcg") {
            std::tie(x, stats) = pcg(Aop, sys.b, Mop, cfg.tol, cfg.maxit);
            row.kappa = estimate_condition(stats);
            row.has_kappa = true;
        } else {
            std::optional<int> restart;
            if (cfg.restart > 0) restart = cfg.restart;
            std::tie(x, stats) = gmres(Aop, sys.b, Mop, cfg.tol, cfg.maxit, restart);
        }
    } catch (const std::exception& e) {
        throw fail("solver", e.what());
    }
    row.walltime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Independent residual check, outside the solver's recurrence.
    {
        const auto ax = spmv(sys.A, x);
        Vector<Scalar> r = sys.b;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
        row.true_residual = norm2(r) / std::max(norm2(sys.b), 1e-300);
    }

    row.ranks = decomp.n_subdomains;
    row.dofs = dofmap.n_dofs;
    row.k = k;
    row.delta_over_H_pct = decomp.delta_over_H_percent();
    row.variant = variant_str;
    row.levels = levels;
    row.iterations = stats.iterations;
    row.converged = stats.converged;
    row.residual_history = stats.residual_history;

    if (artifacts) {
        artifacts->decomposition_csv = decomposition_csv(decomp);
        artifacts->setup_report_csv = setup_report_csv(M, decomp);
        artifacts->residual_csv = residual_csv(stats.residual_history);
        artifacts->solution_txt = detail::solution_to_text(x);
    }
    return {std::move(row), std::move(x)};
}

/// Scalar-dispatching wrapper: poisson runs real, helmholtz runs complex.
inline ExperimentRow run_row(const ExperimentConfig& cfg, int refinement, int k,
                             const std::string& variant, int levels,
                             ExperimentArtifacts* artifacts = nullptr) {
    if (cfg.kind == "helmholtz")
        return run_instance<std::complex<double>>(cfg, refinement, k, variant, levels,
                                                  artifacts)
            .first;
    return run_instance<double>(cfg, refinement, k, variant, levels, artifacts).first;
}

inline ExperimentRow run_solve(const ExperimentConfig& cfg,
                               ExperimentArtifacts* artifacts = nullptr) {
    return run_row(cfg, 0, cfg.overlap_layers.front(), cfg.variant, cfg.levels,
                   artifacts);
}

/// Weak-scaling sweep: one global refinement pairs with a fourfold
/// subdomain increase; one row per (refinement, overlap) pair.
inline std::vector<ExperimentRow> run_scaling_study(const ExperimentConfig& cfg) {
    std::vector<ExperimentRow> rows;
    for (int r = 0; r < std::max(1, cfg.refinements); ++r)
        for (int k : cfg.overlap_layers)
            rows.push_back(run_row(cfg, r, k, cfg.variant, cfg.levels));
    return rows;
}

/// Fixed subdomain count, sweep the overlap layers.
inline std::vector<ExperimentRow> run_overlap_study(const ExperimentConfig& cfg) {
    std::vector<ExperimentRow> rows;
    for (int k : cfg.overlap_layers)
        rows.push_back(run_row(cfg, 0, k, cfg.variant, cfg.levels));
    return rows;
}

/// Same problem under each listed (variant, levels) pair.
inline std::vector<ExperimentRow> run_compare(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, int>> pairs;
    for (const auto& item : cfg.compare) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            pairs.emplace_back(item, 1);
        else
            pairs.emplace_back(item.substr(0, colon),
                               std::stoi(item.substr(colon + 1)));
    }
    if (pairs.empty()) {
        pairs.emplace_back(cfg.variant, 1);
        pairs.emplace_back(cfg.variant, 2);
    }
    std::vector<ExperimentRow> rows;
    for (const auto& [variant, levels] : pairs)
        for (int k : cfg.overlap_layers)
            rows.push_back(run_row(cfg, 0, k, variant, levels));
    return rows;
}

inline std::string rows_to_csv(const std::vector<ExperimentRow>& rows,
                               bool report_walltime = true) {
    std::ostringstream os;
    os << "ranks,dofs,k,delta_over_H_pct,variant,levels,iterations,converged,kappa,"
          "walltime_s\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.1f", r.delta_over_H_pct);
        os << r.ranks << "," << r.dofs << "," << r.k << "," << buf << "," << r.variant
           << "," << r.levels << "," << r.iterations << ","
           << (r.converged ? "true" : "false") << ",";
        if (r.has_kappa) {
            std::snprintf(buf, sizeof(buf), "%.6g", r.kappa);
            os << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.3f", report_walltime ? r.walltime : 0.0);
        os << "," << buf << "\n";
    }
    return os.str();
}

inline std::string rows_to_table(const std::vector<ExperimentRow>& rows,
                                 bool report_walltime = true) {
    const char* headers[] = {"ranks",  "dofs",       "k",         "delta/H %",
                             "variant", "levels",    "iterations", "converged",
                             "kappa",  "walltime_s"};
    std::vector<std::vector<std::string>> cells;
    char buf[64];
    for (const auto& r : rows) {
        std::vector<std::string> c;
        c.push_back(std::to_string(r.ranks));
        c.push_back(std::to_string(r.dofs));
        c.push_back(std::to_string(r.k));
        std::snprintf(buf, sizeof(buf), "%.1f", r.delta_over_H_pct);
        c.push_back(buf);
        c.push_back(r.variant);
        c.push_back(std::to_string(r.levels));
        // Unconverged runs show the iteration budget with a ">" prefix.
        c.push_back(r.converged ? std::to_string(r.iterations)
                                : (">" + std::to_string(r.iterations)));
        c.push_back(r.converged ? "yes" : "no");
        if (r.has_kappa) {
            std::snprintf(buf, sizeof(buf), "%.4g", r.kappa);
            c.push_back(buf);
        } else {
            c.push_back("-");
        }
        std::snprintf(buf, sizeof(buf), "%.3f", report_walltime ? r.walltime : 0.0);
        c.push_back(buf);
        cells.push_back(std::move(c));
    }
    std::size_t widths[10];
    for (int j = 0; j < 10; ++j) {
        widths[j] = std::string(headers[j]).size();
        for (const auto& row : cells) widths[j] = std::max(widths[j], row[static_cast<std::size_t>(j)].size());
    }
    std::ostringstream os;
    for (int j = 0; j < 10; ++j) {
        os << std::string(widths[j] - std::string(headers[j]).size(), ' ') << headers[j]
           << (j + 1 < 10 ? "  " : "\n");
    }
    for (const auto& row : cells)
        for (int j = 0; j < 10; ++j)
            os << std::string(widths[j] - row[static_cast<std::size_t>(j)].size(), ' ')
               << row[static_cast<std::size_t>(j)] << (j + 1 < 10 ? "  " : "\n");
    return os.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << content;
}

}  // namespace schwarzdd

#endif
