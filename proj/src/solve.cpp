#include "rigidkit/solve.hpp"

#include "rigidkit/rng.hpp"

#include <Eigen/Dense>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rigidkit {

void SolveConfig::validate() const {
    if (!(tol > 0) || max_iter < 1 || restarts < 1)
        throw std::invalid_argument("SolveConfig: need tol > 0, max_iter >= 1, restarts >= 1");
}

namespace {

Eigen::MatrixXd edge_block(const PinnedInstance& inst, const Eigen::MatrixXd& points,
                           int k) {
    const auto& verts = inst.hypergraph.hyperedges[k].vertices;
    Eigen::MatrixXd m(verts.size(), inst.hypergraph.d - 1);
    for (std::size_t i = 0; i < verts.size(); ++i) m.row(i) = points.row(verts[i]);
    return m;
}

int equations_of(const PinnedInstance& inst, int k) {
    const auto& e = inst.hypergraph.hyperedges[k];
    return e.weight * (inst.hypergraph.d - static_cast<int>(e.vertices.size()));
}

} // namespace

double residual(const Framework& fr) {
    std::vector<int> edges(fr.instance.hypergraph.num_edges());
    std::iota(edges.begin(), edges.end(), 0);
    return residual_vector(fr.instance, fr.points, edges).norm();
}

Eigen::VectorXd residual_vector(const PinnedInstance& inst, const Eigen::MatrixXd& points,
                                const std::vector<int>& edges) {
    const int d = inst.hypergraph.d;
    int rows = 0;
    for (int k : edges) rows += equations_of(inst, k);
    Eigen::VectorXd r(rows);
    int row = 0;
    for (int k : edges) {
        const Eigen::MatrixXd block = edge_block(inst, points, k);
        const int sz = static_cast<int>(block.rows());
        for (int t = 1; t <= d - sz; ++t)
            for (const auto& pin : inst.pins[k])
                r(row++) = constraint_value(block, pin, t);
    }
    return r;
}

Eigen::MatrixXd residual_jacobian(const PinnedInstance& inst,
                                  const Eigen::MatrixXd& points,
                                  const std::vector<int>& edges,
                                  const std::vector<int>& free_vertices) {
    const int d = inst.hypergraph.d;
    // linear scan keeps the cost tied to the subsystem, not to |V|
    auto col_of = [&](int v) -> int {
        for (std::size_t i = 0; i < free_vertices.size(); ++i)
            if (free_vertices[i] == v) return static_cast<int>(i) * (d - 1);
        return -1;
    };
    int rows = 0;
    for (int k : edges) rows += equations_of(inst, k);
    Eigen::MatrixXd jac =
        Eigen::MatrixXd::Zero(rows, static_cast<int>(free_vertices.size()) * (d - 1));
    int row = 0;
    for (int k : edges) {
        const auto& verts = inst.hypergraph.hyperedges[k].vertices;
        const Eigen::MatrixXd block = edge_block(inst, points, k);
        const int sz = static_cast<int>(block.rows());
        for (int t = 1; t <= d - sz; ++t) {
            for (const auto& pin : inst.pins[k]) {
                const Eigen::MatrixXd grad = constraint_gradient(block, pin, t);
                for (int i = 0; i < sz; ++i) {
                    const int col = col_of(verts[i]);
                    if (col >= 0) jac.block(row, col, 1, d - 1) = grad.row(i);
                }
                ++row;
            }
        }
    }
    return jac;
}

namespace {

// One Levenberg-Marquardt run from the state currently in `points`. Only the
// free-vertex rows are touched; on return they hold the last accepted state.
bool lm_run(const PinnedInstance& inst, const std::vector<int>& edges,
            const std::vector<int>& free_vertices, Eigen::MatrixXd& points,
            const SolveConfig& cfg, double& out_residual) {
    const int d = inst.hypergraph.d;
    const int nf = static_cast<int>(free_vertices.size());
    auto pack = [&] {
        Eigen::VectorXd x(nf * (d - 1));
        for (int i = 0; i < nf; ++i)
            x.segment(i * (d - 1), d - 1) = points.row(free_vertices[i]).transpose();
        return x;
    };
    auto unpack = [&](const Eigen::VectorXd& x) {
        for (int i = 0; i < nf; ++i)
            points.row(free_vertices[i]) = x.segment(i * (d - 1), d - 1).transpose();
    };

    // The minor equations also vanish when an edge's points become affinely
    // dependent, and that degenerate variety attracts plain least squares.
    // Weighting each edge's rows by the inverse simplex volume of its point
    // block turns the collapse into a residual blow-up instead.
    auto row_weights = [&] {
        Eigen::VectorXd w(0);
        std::vector<double> per_row;
        for (int k : edges) {
            const auto& verts = inst.hypergraph.hyperedges[k].vertices;
            const int sz = static_cast<int>(verts.size());
            double vol = 1.0;
            if (sz > 1) {
                Eigen::MatrixXd diff(d - 1, sz - 1);
                for (int i = 1; i < sz; ++i)
                    diff.col(i - 1) =
                        (points.row(verts[i]) - points.row(verts[0])).transpose();
                const auto sv = diff.jacobiSvd().singularValues();
                for (int i = 0; i < sv.size(); ++i) vol *= sv(i);
            }
            const double weight = 1.0 / (vol + 1e-9);
            const int eq = inst.hypergraph.hyperedges[k].weight * (d - sz);
            for (int i = 0; i < eq; ++i) per_row.push_back(weight);
        }
        return Eigen::VectorXd::Map(per_row.data(), per_row.size()).eval();
    };

    Eigen::VectorXd x = pack();
    Eigen::VectorXd r = residual_vector(inst, points, edges);
    double rnorm = r.norm();
    double lambda = 1e-3;
    for (int iter = 0; iter < cfg.max_iter && rnorm > cfg.tol; ++iter) {
        const Eigen::VectorXd w = row_weights();
        const Eigen::VectorXd rw = w.cwiseProduct(r);
        const Eigen::MatrixXd jac =
            w.asDiagonal() * residual_jacobian(inst, points, edges, free_vertices);
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * rw;
        bool stepped = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal().array() += lambda * (jtj.diagonal().array().abs() + 1e-12);
            const Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
            unpack(x + delta);
            const Eigen::VectorXd trial_r = residual_vector(inst, points, edges);
            if (w.cwiseProduct(trial_r).norm() < rw.norm()) {
                x += delta;
                r = trial_r;
                rnorm = trial_r.norm();
                lambda = std::max(lambda / 10.0, 1e-12);
                stepped = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            unpack(x);  // roll back the rejected trial
            break;
        }
    }
    out_residual = rnorm;
    return rnorm <= cfg.tol;
}

// The constraint minors also vanish on degenerate configurations (an edge's
// points affinely dependent), which are exact but meaningless roots. A restart
// only counts as converged if every pin has true barycentric coordinates.
bool realization_nondegenerate(const PinnedInstance& inst, const Eigen::MatrixXd& points,
                               const std::vector<int>& edges) {
    for (int k : edges) {
        const auto& verts = inst.hypergraph.hyperedges[k].vertices;
        Eigen::MatrixXd block(verts.size(), inst.hypergraph.d - 1);
        for (std::size_t i = 0; i < verts.size(); ++i) block.row(i) = points.row(verts[i]);
        for (const auto& pin : inst.pins[k]) {
            try {
                barycentric(block, pin, 1e-6);
            } catch (const std::invalid_argument&) {
                return false;
            }
        }
    }
    return true;
}

} // namespace

SubsystemReport solve_subsystem_inplace(const PinnedInstance& inst,
                                        const std::vector<int>& edges,
                                        const std::vector<int>& free_vertices,
                                        Eigen::MatrixXd& points, const SolveConfig& cfg) {
    const int d = inst.hypergraph.d;
    const int nf = static_cast<int>(free_vertices.size());
    SubsystemReport best;
    best.residual = std::numeric_limits<double>::infinity();
    bool have_init = true;
    for (int v : free_vertices)
        if (!points.row(v).allFinite()) have_init = false;
    Eigen::MatrixXd best_rows(nf, d - 1);
    const Eigen::MatrixXd init_rows = [&] {
        Eigen::MatrixXd m(nf, d - 1);
        for (int i = 0; i < nf; ++i) m.row(i) = points.row(free_vertices[i]);
        return m;
    }();
    // random initialization centered on the incident pins: a vertex's chart
    // point is an affine mixture along each pin, so the pins set the scale
    Eigen::MatrixXd pin_mean = Eigen::MatrixXd::Zero(nf, d - 1);
    Eigen::VectorXd pin_count = Eigen::VectorXd::Zero(nf);
    double spread = 1.0;
    {
        Eigen::RowVectorXd global = Eigen::RowVectorXd::Zero(d - 1);
        int total = 0;
        for (int k : edges)
            for (const auto& pin : inst.pins[k]) {
                global += pin.transpose();
                ++total;
                spread = std::max(spread, pin.cwiseAbs().maxCoeff());
                for (int i = 0; i < nf; ++i) {
                    const auto& verts = inst.hypergraph.hyperedges[k].vertices;
                    if (std::find(verts.begin(), verts.end(), free_vertices[i]) !=
                        verts.end()) {
                        pin_mean.row(i) += pin.transpose();
                        pin_count(i) += 1;
                    }
                }
            }
        if (total > 0) global /= total;
        for (int i = 0; i < nf; ++i) {
            if (pin_count(i) > 0)
                pin_mean.row(i) /= pin_count(i);
            else
                pin_mean.row(i) = global;
        }
    }
    for (int restart = 0; restart < cfg.restarts; ++restart) {
        if (restart > 0 || !have_init) {
            Rng rng = Rng::substream(cfg.seed, "solve-restart-" + std::to_string(restart));
            for (int i = 0; i < nf; ++i)
                for (int j = 0; j < d - 1; ++j)
                    points(free_vertices[i], j) =
                        pin_mean(i, j) + rng.uniform(-1.0, 1.0) * spread;
        } else {
            for (int i = 0; i < nf; ++i) points.row(free_vertices[i]) = init_rows.row(i);
        }
        double rnorm = 0.0;
        bool ok = lm_run(inst, edges, free_vertices, points, cfg, rnorm);
        if (ok && !realization_nondegenerate(inst, points, edges)) {
            ok = false;
            rnorm = std::numeric_limits<double>::infinity();
        }
        if (rnorm < best.residual || restart == 0) {
            best.residual = rnorm;
            for (int i = 0; i < nf; ++i) best_rows.row(i) = points.row(free_vertices[i]);
        }
        best.restarts_used = restart + 1;
        if (ok) {
            best.converged = true;
            break;
        }
    }
    for (int i = 0; i < nf; ++i) points.row(free_vertices[i]) = best_rows.row(i);
    return best;
}

SolveReport solve_subsystem(const PinnedInstance& inst, const std::vector<int>& edges,
                            const std::vector<int>& free_vertices,
                            Eigen::MatrixXd points, const SolveConfig& cfg) {
    cfg.validate();
    inst.validate();
    if (!inst.has_pins()) throw std::invalid_argument("solve requires pins");
    const SubsystemReport sub = solve_subsystem_inplace(inst, edges, free_vertices, points, cfg);
    SolveReport rep;
    rep.converged = sub.converged;
    rep.residual = sub.residual;
    rep.restarts_used = sub.restarts_used;
    rep.points = std::move(points);
    return rep;
}

SolveReport solve(const PinnedInstance& inst, const SolveConfig& cfg,
                  const std::optional<Eigen::MatrixXd>& init,
                  const std::vector<int>& frozen) {
    cfg.validate();
    inst.validate();
    const int n = inst.hypergraph.num_vertices();
    const int d = inst.hypergraph.d;
    std::vector<char> is_frozen(n, 0);
    for (int v : frozen) is_frozen[v] = 1;
    if (!frozen.empty() && !init)
        throw std::invalid_argument("frozen vertices require initial coordinates");
    std::vector<int> free_vertices;
    for (int v = 0; v < n; ++v)
        if (!is_frozen[v]) free_vertices.push_back(v);
    Eigen::MatrixXd points =
        init ? *init : Eigen::MatrixXd::Constant(n, d - 1,
                                                 std::numeric_limits<double>::quiet_NaN());
    std::vector<int> edges(inst.hypergraph.num_edges());
    std::iota(edges.begin(), edges.end(), 0);
    return solve_subsystem(inst, edges, free_vertices, points, cfg);
}

} // namespace rigidkit
