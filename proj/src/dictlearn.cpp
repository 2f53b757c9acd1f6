#include "rigidkit/dictlearn.hpp"

#include "rigidkit/instance_io.hpp"
#include "rigidkit/drplan.hpp"
#include "rigidkit/rng.hpp"

#include <json.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rigidkit {

using nlohmann::json;

void Dataset::validate() const {
    if (d < 2) throw std::invalid_argument("dataset dimension d must be >= 2");
    if (s < 0 || s >= d) throw std::invalid_argument("dataset needs 0 <= s < d");
    if (points.rows() < 1 || points.cols() != d)
        throw std::invalid_argument("dataset points must be m x d with m >= 1");
    for (int i = 0; i < points.rows(); ++i) {
        if (!points.row(i).allFinite())
            throw std::invalid_argument("data point " + std::to_string(i) +
                                        " has non-finite coordinates");
        if (points.row(i).norm() == 0.0)
            throw std::invalid_argument("data point " + std::to_string(i) + " is zero");
    }
    if (!support.empty()) {
        if (static_cast<int>(support.size()) != points.rows())
            throw std::invalid_argument("support list count does not match point count");
        const int n = static_cast<int>(vertex_ids.size());
        if (n == 0) throw std::invalid_argument("supports given without vertex ids");
        for (const auto& sup : support) {
            if (sup.empty() || static_cast<int>(sup.size()) >= d)
                throw std::invalid_argument("each support needs 1 <= size < d vertices");
            if (!std::is_sorted(sup.begin(), sup.end()) ||
                std::adjacent_find(sup.begin(), sup.end()) != sup.end())
                throw std::invalid_argument("supports must be strictly increasing");
            if (sup.front() < 0 || sup.back() >= n)
                throw std::invalid_argument("support references unknown vertex");
        }
    }
}

int size_bound(int m, int d, int s) {
    if (s < 1 || s >= d) throw std::invalid_argument("size_bound requires 1 <= s < d");
    if (m < 0) throw std::invalid_argument("size_bound requires m >= 0");
    return static_cast<int>((static_cast<long long>(d - s) * m + d - 2) / (d - 1));
}

ChartMap ChartMap::random(int d, std::uint64_t seed) {
    Rng rng(seed);
    auto gauss = [&] {
        const double u1 = std::max(rng.next_double(), 1e-300);
        const double u2 = rng.next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = gauss();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    return {q};
}

Eigen::VectorXd ChartMap::to_chart(const Eigen::VectorXd& x) const {
    const int d = static_cast<int>(rot.rows());
    const Eigen::VectorXd y = rot * x;
    if (std::abs(y(d - 1)) < 1e-12 * y.norm())
        throw std::runtime_error("data point falls on the chart boundary");
    return y.head(d - 1) / y(d - 1);
}

Eigen::VectorXd ChartMap::lift(const Eigen::VectorXd& q) const {
    const int d = static_cast<int>(rot.rows());
    Eigen::VectorXd y(d);
    y.head(d - 1) = q;
    y(d - 1) = 1.0;
    Eigen::VectorXd x = rot.transpose() * y;
    x.normalize();
    for (int j = 0; j < d; ++j) {
        if (std::abs(x(j)) > 1e-12) {
            if (x(j) < 0) x = -x;
            break;
        }
    }
    return x;
}

namespace {

// least squares of x on the named dictionary rows; entries below 1e-12 zeroed
Eigen::VectorXd fit_theta(const Eigen::VectorXd& x, const Eigen::MatrixXd& vectors,
                          const std::vector<int>& sup) {
    Eigen::MatrixXd a(x.size(), sup.size());
    for (std::size_t j = 0; j < sup.size(); ++j) a.col(j) = vectors.row(sup[j]).transpose();
    Eigen::VectorXd theta = a.colPivHouseholderQr().solve(x);
    for (int j = 0; j < theta.size(); ++j)
        if (std::abs(theta(j)) < 1e-12) theta(j) = 0.0;
    return theta;
}

double reconstruction_error(const Eigen::VectorXd& x, const Eigen::MatrixXd& vectors,
                            const std::vector<int>& sup, const Eigen::VectorXd& theta) {
    Eigen::VectorXd rec = Eigen::VectorXd::Zero(x.size());
    for (std::size_t j = 0; j < sup.size(); ++j)
        rec += theta(j) * vectors.row(sup[j]).transpose();
    return (x - rec).norm() / x.norm();
}

void fill_point_fits(Dictionary& dict, const Eigen::MatrixXd& points) {
    dict.coefficients.clear();
    dict.residuals.clear();
    for (std::size_t i = 0; i < dict.supports.size(); ++i) {
        const Eigen::VectorXd x = points.row(static_cast<int>(i)).transpose();
        Eigen::VectorXd theta = fit_theta(x, dict.vectors, dict.supports[i]);
        dict.residuals.push_back(
            reconstruction_error(x, dict.vectors, dict.supports[i], theta));
        dict.coefficients.push_back(std::move(theta));
    }
}

} // namespace

LearnReport learn_random(const Dataset& X, int s, const SolveConfig& cfg) {
    X.validate();
    cfg.validate();
    const int d = X.d;
    if (s < 1 || s >= d) throw std::invalid_argument("learn_random requires 1 <= s < d");
    const int m = X.size();

    LearnReport rep;
    rep.construction =
        build_construction(d, s, m, Rng::substream_seed(cfg.seed, "construction"));
    const auto& con = rep.construction;
    rep.used = con.trace.pins_consumed;
    rep.leftover = con.trace.leftover;

    const ChartMap chart = ChartMap::random(d, Rng::substream_seed(cfg.seed, "chart"));
    std::vector<Eigen::VectorXd> pins;
    pins.reserve(rep.used);
    for (int k = 0; k < rep.used; ++k)
        pins.push_back(chart.to_chart(X.points.row(k).transpose()));

    const IncrementalReport inc = incremental_solve(con, pins, cfg);
    rep.converged = inc.converged;
    rep.failed_block = inc.converged ? -2 : inc.failed_block;

    Dictionary& dict = rep.dictionary;
    dict.d = d;
    dict.s = s;
    dict.vertex_ids = con.hypergraph.vertex_ids;
    const int n = con.hypergraph.num_vertices();
    dict.vectors.resize(n, d);
    for (int v = 0; v < n; ++v)
        dict.vectors.row(v) = chart.lift(inc.framework.points.row(v).transpose()).transpose();

    // tightness identity (d-s) m_used = (d-1) n holds by construction
    if ((d - s) * rep.used != (d - 1) * n)
        throw std::logic_error("construction violated the tightness identity");

    for (int i = 0; i < rep.used; ++i)
        dict.supports.push_back(con.hypergraph.hyperedges[i].vertices);
    fill_point_fits(dict, X.points.topRows(rep.used));
    return rep;
}

namespace {

// vertex-maximal proper connected tight vertex-induced subgraph, or empty
std::vector<int> max_proper_tight(const WeightedHypergraph& h,
                                  const std::vector<int>& verts) {
    const int n = static_cast<int>(verts.size());
    std::vector<char> in(h.num_vertices(), 0);
    std::vector<int> best;
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
        std::vector<int> sub;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) sub.push_back(verts[i]);
        if (sub.size() <= best.size()) continue;
        std::fill(in.begin(), in.end(), 0);
        for (int v : sub) in[v] = 1;
        int copies = 0, edge_count = 0;
        for (int k = 0; k < h.num_edges(); ++k) {
            bool all = true;
            for (int v : h.hyperedges[k].vertices) all = all && in[v];
            if (all) {
                copies += h.copies_of(k);
                ++edge_count;
            }
        }
        if (edge_count == 0 || copies != (h.d - 1) * static_cast<int>(sub.size())) continue;
        const WeightedHypergraph g = induced_subgraph(h, sub);
        if (is_connected(g) && is_tight(expand(g), h.d - 1)) best = sub;
    }
    return best;
}

std::vector<int> edges_inside(const WeightedHypergraph& h, const std::vector<int>& verts) {
    std::vector<char> in(h.num_vertices(), 0);
    for (int v : verts) in[v] = 1;
    std::vector<int> out;
    for (int k = 0; k < h.num_edges(); ++k) {
        bool all = true;
        for (int v : h.hyperedges[k].vertices) all = all && in[v];
        if (all) out.push_back(k);
    }
    return out;
}

// Solves a (near-)tight instance by peeling to a minimal tight core and
// re-solving outward: each extension is a small square system with the inner
// solution frozen, so only the core needs a global search.
SubsystemReport chain_solve(const PinnedInstance& inst, Eigen::MatrixXd& points,
                            const SolveConfig& cfg) {
    const auto& h = inst.hypergraph;
    std::vector<std::vector<int>> chain;  // outermost first
    std::vector<int> current(h.num_vertices());
    std::iota(current.begin(), current.end(), 0);
    chain.push_back(current);
    if (h.num_vertices() <= 18) {
        while (true) {
            const auto inner = max_proper_tight(h, chain.back());
            if (inner.empty()) break;
            chain.push_back(inner);
        }
    }

    SolveConfig step_cfg = cfg;
    SubsystemReport last;
    std::vector<char> solved(h.num_vertices(), 0);
    for (int i = static_cast<int>(chain.size()) - 1; i >= 0; --i) {
        std::vector<int> free_verts;
        for (int v : chain[i])
            if (!solved[v]) free_verts.push_back(v);
        std::vector<int> eqs;
        const auto all_edges = edges_inside(h, chain[i]);
        if (i + 1 < static_cast<int>(chain.size())) {
            std::vector<char> inner_edge(h.num_edges(), 0);
            for (int k : edges_inside(h, chain[i + 1])) inner_edge[k] = 1;
            for (int k : all_edges)
                if (!inner_edge[k]) eqs.push_back(k);
        } else {
            eqs = all_edges;
        }
        step_cfg.seed = Rng::substream_seed(cfg.seed, "chain-" + std::to_string(i));
        last = solve_subsystem_inplace(inst, eqs, free_verts, points, step_cfg);
        if (!last.converged) return last;
        for (int v : chain[i]) solved[v] = 1;
    }
    // the chain shares work but the contract is the full residual
    std::vector<int> all_edges(h.num_edges());
    std::iota(all_edges.begin(), all_edges.end(), 0);
    last.residual = residual_vector(inst, points, all_edges).norm();
    last.converged = last.residual <= cfg.tol * std::sqrt(std::max(1, h.num_edges()));
    return last;
}

} // namespace

FittedReport learn_fitted(const Dataset& X, const SolveConfig& cfg) {
    X.validate();
    cfg.validate();
    if (!X.has_support())
        throw std::invalid_argument("learn_fitted requires a support hypergraph");
    const int d = X.d;
    const int s = X.s;
    if (s < 1 || s >= d) throw std::invalid_argument("learn_fitted requires 1 <= s < d");

    // group points with equal support into one weighted hyperedge
    WeightedHypergraph h;
    h.d = d;
    h.vertex_ids = X.vertex_ids;
    std::vector<std::vector<int>> edge_points;  // data point indices per edge
    {
        std::map<std::vector<int>, int> edge_of;
        for (int i = 0; i < X.size(); ++i) {
            auto [it, fresh] = edge_of.emplace(X.support[i], h.num_edges());
            if (fresh) {
                h.hyperedges.push_back({X.support[i], 0});
                edge_points.emplace_back();
            }
            ++h.hyperedges[it->second].weight;
            edge_points[it->second].push_back(i);
        }
    }
    h.validate(false);

    FittedReport rep;
    const ChartMap chart = ChartMap::random(d, Rng::substream_seed(cfg.seed, "chart"));

    // core extraction: overconstrained inputs keep a maximum rigid subsystem
    const MultiHypergraph mh = expand(h);
    const auto sp = pebble_game(mh, d - 1);
    WeightedHypergraph core = h;
    std::vector<int> core_edge_map(h.num_edges());
    std::iota(core_edge_map.begin(), core_edge_map.end(), 0);
    std::vector<std::vector<int>> core_pins;  // data point index per (edge, pin)
    std::vector<std::pair<int, int>> validation;  // (original edge, pin l)
    if (sp.sparse) {
        if (mh.num_copies() < (d - 1) * h.num_vertices())
            rep.warnings.push_back("underconstrained input: realization is not unique");
        for (int k = 0; k < h.num_edges(); ++k) core_pins.push_back(edge_points[k]);
    } else {
        const MaxRigidResult mr = max_rigid_subsystem(h);
        core = mr.hypergraph;
        core_edge_map = mr.edge_map;
        for (std::size_t j = 0; j < mr.edge_map.size(); ++j) {
            const int k = mr.edge_map[j];
            std::vector<int> kept;
            for (int l : mr.kept_pins[k]) kept.push_back(edge_points[k][l]);
            core_pins.push_back(std::move(kept));
        }
        validation = mr.dropped;
        rep.warnings.push_back("overconstrained input: " +
                               std::to_string(validation.size()) +
                               " pin(s) moved to validation");
    }

    PinnedInstance inst;
    inst.hypergraph = core;
    inst.pins.resize(core.num_edges());
    for (int k = 0; k < core.num_edges(); ++k)
        for (int i : core_pins[k])
            inst.pins[k].push_back(chart.to_chart(X.points.row(i).transpose()));
    inst.validate();

    Eigen::MatrixXd points = Eigen::MatrixXd::Constant(
        h.num_vertices(), d - 1, std::numeric_limits<double>::quiet_NaN());
    const SubsystemReport solved = chain_solve(inst, points, cfg);
    rep.converged = solved.converged;

    Dictionary& dict = rep.dictionary;
    dict.d = d;
    dict.s = s;
    dict.vertex_ids = h.vertex_ids;
    dict.vectors.resize(h.num_vertices(), d);
    for (int v = 0; v < h.num_vertices(); ++v) {
        Eigen::VectorXd q = points.row(v).transpose();
        if (!q.allFinite()) {
            rep.warnings.push_back("vertex " + h.vertex_ids[v] +
                                   " is unconstrained; placed arbitrarily");
            q.setZero();
        }
        dict.vectors.row(v) = chart.lift(q).transpose();
    }

    // leftover pins judge the genericity of the data against the solved core
    for (const auto& [k, l] : validation) {
        const int i = edge_points[k][l];
        const auto& verts = h.hyperedges[k].vertices;
        Eigen::MatrixXd block(verts.size(), d - 1);
        for (std::size_t j = 0; j < verts.size(); ++j) block.row(j) = points.row(verts[j]);
        const Eigen::VectorXd pin = chart.to_chart(X.points.row(i).transpose());
        double sq = 0.0;
        for (int t = 1; t <= d - static_cast<int>(verts.size()); ++t) {
            const double val = constraint_value(block, pin, t);
            sq += val * val;
        }
        const double res = std::sqrt(sq);
        rep.validation_residuals.push_back(res);
        if (res > 1e-6)
            rep.warnings.push_back("validation pin (point " + std::to_string(i) +
                                   ") breaches tolerance: data is not generic for "
                                   "this hypergraph");
    }

    dict.supports = X.support;
    fill_point_fits(dict, X.points);
    return rep;
}

VerifyReport verify(const Dataset& X, const Dictionary& D, int s, double tol) {
    X.validate();
    if (s < 1) throw std::invalid_argument("verify requires s >= 1");
    VerifyReport rep;
    rep.pass = true;
    const bool have_supports = static_cast<int>(D.supports.size()) == X.size();
    for (int i = 0; i < X.size(); ++i) {
        const Eigen::VectorXd x = X.points.row(i).transpose();
        std::vector<int> sup;
        if (have_supports) {
            sup = D.supports[i];
        } else if (X.has_support()) {
            sup = X.support[i];
        } else {
            // orthogonal matching pursuit over the dictionary
            Eigen::VectorXd res = x;
            for (int pick = 0; pick < s; ++pick) {
                int best = -1;
                double score = 0.0;
                for (int v = 0; v < D.size(); ++v) {
                    if (std::find(sup.begin(), sup.end(), v) != sup.end()) continue;
                    const double c = std::abs(D.vectors.row(v).dot(res.transpose()));
                    if (c > score) {
                        score = c;
                        best = v;
                    }
                }
                if (best < 0) break;
                sup.push_back(best);
                std::sort(sup.begin(), sup.end());
                const Eigen::VectorXd theta = fit_theta(x, D.vectors, sup);
                res = x;
                for (std::size_t j = 0; j < sup.size(); ++j)
                    res -= theta(j) * D.vectors.row(sup[j]).transpose();
                if (res.norm() <= tol * x.norm()) break;
            }
        }
        const Eigen::VectorXd theta = fit_theta(x, D.vectors, sup);
        const double err = reconstruction_error(x, D.vectors, sup, theta);
        int nnz = 0;
        for (int j = 0; j < theta.size(); ++j)
            if (theta(j) != 0.0) ++nnz;
        rep.errors.push_back(err);
        rep.support_sizes.push_back(nnz);
        if (err > tol || nnz > s) rep.pass = false;
    }
    return rep;
}

// ---- document IO ----

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* what) {
    if (!rows.is_array() || rows.empty())
        throw ParseError(std::string(what) + " must be a nonempty array of rows");
    const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
    if (cols == 0) throw ParseError(std::string(what) + " rows must be number arrays");
    Eigen::MatrixXd m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != cols)
            throw ParseError(std::string(what) + " rows must all have equal length");
        for (std::size_t j = 0; j < cols; ++j) {
            if (!rows[i][j].is_number())
                throw ParseError(std::string(what) + " entries must be numbers");
            m(i, j) = rows[i][j].get<double>();
        }
    }
    return m;
}

} // namespace

Dataset parse_dataset(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("dataset root must be an object");
    if (!doc.contains("d") || !doc["d"].is_number_integer())
        throw ParseError("dataset missing integer field \"d\"");
    if (!doc.contains("points")) throw ParseError("dataset missing field \"points\"");
    Dataset x;
    x.d = doc["d"].get<int>();
    x.s = doc.value("s", 0);
    x.points = matrix_from_json(doc["points"], "\"points\"");
    if (x.points.cols() != x.d)
        throw ParseError("points have " + std::to_string(x.points.cols()) +
                         " coordinates but d = " + std::to_string(x.d));
    if (doc.contains("vertices")) {
        for (const auto& v : doc["vertices"]) {
            if (!v.is_string()) throw ParseError("vertex ids must be strings");
            x.vertex_ids.push_back(v.get<std::string>());
        }
    }
    if (doc.contains("support")) {
        if (!doc["support"].is_array()) throw ParseError("\"support\" must be an array");
        for (const auto& sj : doc["support"]) {
            std::vector<int> sup;
            for (const auto& v : sj) {
                if (!v.is_number_integer())
                    throw ParseError("support entries must be vertex indices");
                sup.push_back(v.get<int>());
            }
            std::sort(sup.begin(), sup.end());
            x.support.push_back(std::move(sup));
        }
    }
    try {
        x.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return x;
}

Dataset parse_delimited(const std::string& text) {
    Dataset x;
    std::vector<std::vector<double>> rows;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        std::istringstream fields(line);
        std::vector<double> row;
        double v;
        while (fields >> v) row.push_back(v);
        if (fields.fail() && !fields.eof())
            throw ParseError("non-numeric value in delimited data");
        if (row.empty()) continue;  // blank line
        if (!rows.empty() && row.size() != rows[0].size())
            throw ParseError("delimited rows have inconsistent column counts");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("delimited data contains no points");
    x.d = static_cast<int>(rows[0].size());
    x.points.resize(rows.size(), x.d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < x.d; ++j) x.points(i, j) = rows[i][j];
    try {
        x.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return x;
}

std::string serialize_dataset(const Dataset& X) {
    json doc;
    doc["d"] = X.d;
    if (X.s > 0) doc["s"] = X.s;
    doc["points"] = matrix_to_json(X.points);
    if (!X.vertex_ids.empty()) doc["vertices"] = X.vertex_ids;
    if (X.has_support()) {
        json sup = json::array();
        for (const auto& sv : X.support) sup.push_back(sv);
        doc["support"] = std::move(sup);
    }
    return doc.dump(2) + "\n";
}

Dictionary parse_dictionary(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("d") || !doc.contains("vectors"))
        throw ParseError("dictionary document needs \"d\" and \"vectors\"");
    Dictionary dict;
    dict.d = doc["d"].get<int>();
    dict.s = doc.value("s", 0);
    dict.vectors = matrix_from_json(doc["vectors"], "\"vectors\"");
    if (dict.vectors.cols() != dict.d)
        throw ParseError("dictionary vectors must have d coordinates");
    if (doc.contains("vertices"))
        for (const auto& v : doc["vertices"]) dict.vertex_ids.push_back(v.get<std::string>());
    if (doc.contains("supports"))
        for (const auto& sj : doc["supports"])
            dict.supports.push_back(sj.get<std::vector<int>>());
    if (doc.contains("coefficients")) {
        for (const auto& cj : doc["coefficients"]) {
            Eigen::VectorXd c(cj.size());
            for (std::size_t j = 0; j < cj.size(); ++j) c(j) = cj[j].get<double>();
            dict.coefficients.push_back(std::move(c));
        }
    }
    if (doc.contains("residuals"))
        dict.residuals = doc["residuals"].get<std::vector<double>>();
    return dict;
}

std::string serialize_dictionary(const Dictionary& D) {
    json doc;
    doc["d"] = D.d;
    doc["s"] = D.s;
    doc["n"] = D.size();
    doc["vectors"] = matrix_to_json(D.vectors);
    if (!D.vertex_ids.empty()) doc["vertices"] = D.vertex_ids;
    if (!D.supports.empty()) {
        json sup = json::array();
        for (const auto& sv : D.supports) sup.push_back(sv);
        doc["supports"] = std::move(sup);
    }
    if (!D.coefficients.empty()) {
        json coeffs = json::array();
        for (const auto& c : D.coefficients) {
            json row = json::array();
            for (int j = 0; j < c.size(); ++j) row.push_back(c(j));
            coeffs.push_back(std::move(row));
        }
        doc["coefficients"] = std::move(coeffs);
    }
    if (!D.residuals.empty()) doc["residuals"] = D.residuals;
    return doc.dump(2) + "\n";
}

} // namespace rigidkit
