// rigidkit command-line tool: analysis, realization and dictionary learning
// for pinned subspace-incidence systems.

#include "rigidkit/construction.hpp"
#include "rigidkit/dictlearn.hpp"
#include "rigidkit/drplan.hpp"
#include "rigidkit/instance_io.hpp"
#include "rigidkit/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace rigidkit;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240331;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;   // verdict negative / verification failed
constexpr int kExitInput = 2;      // unparseable or invalid input
constexpr int kExitNoConverge = 3; // solver exhausted its budget

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw ParseError("cannot write file: " + out_path);
        out << text;
    }
}

json labeling_to_json(const WeightedHypergraph& h, const CompatibleLabeling& lab) {
    const MultiHypergraph mh = expand(h);
    json arr = json::array();
    for (int c = 0; c < mh.num_copies(); ++c) {
        const auto& cl = lab.copies[c];
        arr.push_back({{"edge", mh.copies[c].edge},
                       {"map", cl.map_index},
                       {"tail", h.vertex_ids[cl.tail]},
                       {"t", cl.t},
                       {"l", cl.l}});
    }
    return arr;
}

int cmd_check(const std::string& path, bool as_json, int trials, std::uint64_t seed,
              const std::string& backend_name) {
    const PinnedInstance inst = load_instance(path);
    const auto& h = inst.hypergraph;
    const RankBackend backend =
        backend_name == "float" ? RankBackend::Float : RankBackend::PrimeField;

    RigidityVerdict verdict = combinatorial_check(h);
    verdict.numeric_rank = generic_rank(h, trials, seed, backend);
    const int target = (h.d - 1) * h.num_vertices();
    const int rows = h.total_copies();
    const bool numeric_min_rigid = verdict.numeric_rank == target && rows == target;
    const bool agree =
        (verdict.cls == RigidityClass::MinimallyRigid) == numeric_min_rigid;

    json doc;
    doc["class"] = to_string(verdict.cls);
    doc["rank"] = verdict.numeric_rank;
    doc["target_rank"] = target;
    doc["rows"] = rows;
    doc["backend"] = backend_name;
    doc["oracles_agree"] = agree;
    if (verdict.labeling) doc["labeling"] = labeling_to_json(h, *verdict.labeling);
    doc["warnings"] = verdict.warnings;
    if (verdict.cls == RigidityClass::Flexible && rows < target)
        doc["flex_count"] = target - verdict.numeric_rank;
    if (inst.has_pins() && rows == target) {
        // a realization attempt gives a pure-condition reading
        SolveConfig cfg;
        cfg.seed = seed;
        const SolveReport sr = solve(inst, cfg);
        if (sr.converged) {
            const Framework fr{inst, sr.points};
            doc["pure_condition"] = pure_condition_value(fr);
            doc["pure_condition_relative"] = pure_condition_relative(fr);
        }
    }

    if (as_json) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "class: " << to_string(verdict.cls) << "\n"
                  << "rank: " << verdict.numeric_rank << "/" << target
                  << " (rows " << rows << ", backend " << backend_name << ")\n"
                  << "oracles agree: " << (agree ? "yes" : "NO") << "\n";
        if (verdict.labeling) std::cout << "witness labeling: found\n";
        if (doc.contains("pure_condition"))
            std::cout << "pure condition: " << doc["pure_condition"].get<double>() << "\n";
        for (const auto& w : verdict.warnings) std::cout << "warning: " << w << "\n";
    }
    if (!agree) {
        std::cerr << "error: combinatorial and numeric oracles disagree\n";
        return kExitNegative;
    }
    return verdict.cls == RigidityClass::MinimallyRigid ? kExitOk : kExitNegative;
}

int cmd_sparsity(const std::string& path, bool as_json) {
    const PinnedInstance inst = load_instance(path);
    const auto& h = inst.hypergraph;
    const MultiHypergraph mh = expand(h);
    const auto res = pebble_game(mh, h.d - 1);
    const bool tight = res.sparse && mh.num_copies() == (h.d - 1) * h.num_vertices();
    if (as_json) {
        json doc;
        doc["sparse"] = res.sparse;
        doc["tight"] = tight;
        doc["copies"] = mh.num_copies();
        doc["target"] = (h.d - 1) * h.num_vertices();
        if (!res.sparse) doc["rejected_copy"] = res.rejected_copy;
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "sparse: " << (res.sparse ? "yes" : "no") << "\n"
                  << "tight: " << (tight ? "yes" : "no") << " (" << mh.num_copies()
                  << " of " << (h.d - 1) * h.num_vertices() << " copies)\n";
        if (!res.sparse)
            std::cout << "first rejected copy: " << res.rejected_copy << " (hyperedge "
                      << mh.copies[res.rejected_copy].edge << ")\n";
    }
    return res.sparse ? kExitOk : kExitNegative;
}

int cmd_decompose(const std::string& path, bool as_json) {
    const PinnedInstance inst = load_instance(path);
    const auto& h = inst.hypergraph;
    const MultiHypergraph mh = expand(h);
    if (!is_tight(mh, h.d - 1)) {
        std::cerr << "error: instance is not tight; no map decomposition exists\n";
        return kExitInput;
    }
    const MapDecomposition md = map_decompose(mh, h.d - 1);
    if (as_json) {
        json arr = json::array();
        for (int c = 0; c < mh.num_copies(); ++c)
            arr.push_back({{"edge", mh.copies[c].edge},
                           {"map", md.map_index[c]},
                           {"tail", h.vertex_ids[md.tail[c]]}});
        json doc;
        doc["maps"] = h.d - 1;
        doc["copies"] = std::move(arr);
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << (h.d - 1) << "-map decomposition:\n";
        for (int c = 0; c < mh.num_copies(); ++c)
            std::cout << "  copy " << c << " (hyperedge " << mh.copies[c].edge
                      << "): map " << md.map_index[c] << ", tail "
                      << h.vertex_ids[md.tail[c]] << "\n";
    }
    return kExitOk;
}

int cmd_drplan(const std::string& path, bool as_json) {
    const PinnedInstance inst = load_instance(path);
    DRPlan plan;
    try {
        plan = drplan(inst.hypergraph);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    const auto& h = inst.hypergraph;
    if (as_json) {
        json nodes = json::array();
        for (const auto& node : plan.nodes) {
            json vj = json::array();
            for (int v : node.vertices) vj.push_back(h.vertex_ids[v]);
            nodes.push_back({{"vertices", std::move(vj)},
                             {"edges", node.edges},
                             {"children", node.children}});
        }
        json doc;
        doc["nodes"] = std::move(nodes);
        doc["max_fan_in"] = plan.max_fan_in;
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "plan with " << plan.nodes.size() << " nodes, max fan-in "
                  << plan.max_fan_in << "\n";
        for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
            const auto& node = plan.nodes[i];
            std::cout << "  node " << i << ": " << node.vertices.size() << " vertices, "
                      << node.edges.size() << " edges, " << node.children.size()
                      << " children\n";
        }
    }
    return kExitOk;
}

int cmd_gen(int d, int s, int m, std::uint64_t seed, const std::string& kind,
            const std::string& out_path, const std::string& dict_path) {
    Dataset x;
    x.d = d;
    x.s = s;
    x.points.resize(m, d);
    Rng rng = Rng::substream(seed, "gen");
    auto gauss = [&] {
        const double u1 = std::max(rng.next_double(), 1e-300);
        const double u2 = rng.next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    auto unit = [&](int dim) {
        Eigen::VectorXd v(dim);
        do {
            for (int j = 0; j < dim; ++j) v(j) = gauss();
        } while (v.norm() < 1e-6);
        return Eigen::VectorXd(v / v.norm());
    };

    if (kind == "uniform") {
        for (int i = 0; i < m; ++i) x.points.row(i) = unit(d).transpose();
        emit(serialize_dataset(x), out_path);
        return kExitOk;
    }

    // planted: hidden dictionary on the construction hypergraph, data sampled
    // from the spans of its hyperedge supports
    const Construction con = build_construction(d, s, m, Rng::substream_seed(seed, "construction"));
    const auto& h = con.hypergraph;
    Dictionary hidden;
    hidden.d = d;
    hidden.s = s;
    hidden.vertex_ids = h.vertex_ids;
    hidden.vectors.resize(h.num_vertices(), d);
    for (int v = 0; v < h.num_vertices(); ++v) {
        Eigen::VectorXd vec = unit(d);
        for (int j = 0; j < d; ++j) {
            if (std::abs(vec(j)) > 1e-12) {
                if (vec(j) < 0) vec = -vec;
                break;
            }
        }
        hidden.vectors.row(v) = vec.transpose();
    }
    x.vertex_ids = h.vertex_ids;
    for (int i = 0; i < m; ++i) {
        // leftover points reuse hyperedges cyclically
        const int k = i % h.num_edges();
        const auto& sup = h.hyperedges[k].vertices;
        Eigen::VectorXd pt = Eigen::VectorXd::Zero(d);
        do {
            for (int v : sup) pt += gauss() * hidden.vectors.row(v).transpose();
        } while (pt.norm() < 1e-6);
        x.points.row(i) = (pt / pt.norm()).transpose();
        x.support.push_back(sup);
    }
    emit(serialize_dataset(x), out_path);
    const std::string dp =
        dict_path.empty() ? (out_path.empty() ? "" : out_path + ".dict") : dict_path;
    if (!dp.empty()) emit(serialize_dictionary(hidden), dp);
    return kExitOk;
}

int cmd_learn(const std::string& path, int s, const std::string& mode,
              const SolveConfig& cfg, bool as_json, const std::string& out_path,
              double verify_tol) {
    const std::string text = read_file(path);
    Dataset x;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        x = parse_dataset(text);
    else
        x = parse_delimited(text);
    if (s > 0) x.s = s;
    if (x.s < 1 || x.s >= x.d) throw ParseError("need 1 <= s < d (got s = " +
                                                std::to_string(x.s) + ", d = " +
                                                std::to_string(x.d) + ")");

    Dictionary dict;
    bool converged = false;
    std::vector<std::string> warnings;
    if (mode == "fitted") {
        FittedReport rep = learn_fitted(x, cfg);
        dict = std::move(rep.dictionary);
        converged = rep.converged;
        warnings = rep.warnings;
    } else {
        LearnReport rep = learn_random(x, x.s, cfg);
        dict = std::move(rep.dictionary);
        converged = rep.converged;
        if (rep.leftover > 0)
            warnings.push_back(std::to_string(rep.leftover) +
                               " data point(s) beyond the last stage boundary were "
                               "not used");
        if (!converged)
            warnings.push_back("solver failed at " +
                               (rep.failed_block == -1
                                    ? std::string("stage 1")
                                    : "block " + std::to_string(rep.failed_block)));
    }
    const VerifyReport ver = verify(x, dict, x.s, verify_tol);

    if (as_json || !out_path.empty()) {
        std::string doc = serialize_dictionary(dict);
        emit(doc, out_path);
        if (!out_path.empty() && !as_json)
            std::cout << "dictionary with " << dict.size() << " vectors written to "
                      << out_path << "\n";
    }
    if (!as_json) {
        std::cout << "dictionary size: " << dict.size() << "\n"
                  << "verification: " << (ver.pass ? "pass" : "FAIL") << "\n";
        for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
    }
    if (!converged) return kExitNoConverge;
    return ver.pass ? kExitOk : kExitNegative;
}

int cmd_solve(const std::string& path, const SolveConfig& cfg, bool as_json,
              const std::string& out_path) {
    const PinnedInstance inst = load_instance(path);
    if (!inst.has_pins()) {
        std::cerr << "error: instance has no pins to realize\n";
        return kExitInput;
    }
    const SolveReport rep = solve(inst, cfg);
    json doc;
    doc["converged"] = rep.converged;
    doc["residual"] = rep.residual;
    doc["restarts_used"] = rep.restarts_used;
    json pts = json::array();
    for (int v = 0; v < rep.points.rows(); ++v) {
        json row = json::array();
        for (int j = 0; j < rep.points.cols(); ++j) row.push_back(rep.points(v, j));
        pts.push_back(std::move(row));
    }
    doc["points"] = std::move(pts);
    if (as_json || !out_path.empty()) emit(doc.dump(2) + "\n", out_path);
    if (!as_json)
        std::cout << (rep.converged ? "solved" : "NOT solved") << ", residual "
                  << rep.residual << " after " << rep.restarts_used << " restart(s)\n";
    return rep.converged ? kExitOk : kExitNoConverge;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pinned subspace-incidence systems: rigidity analysis, "
                 "realization and dictionary learning"};
    app.require_subcommand(1);
    app.fallthrough();  // lets `--json` follow the subcommand
    bool as_json = false;
    app.add_flag("--json", as_json, "emit structured JSON documents");

    std::string in_path, out_path, dict_path;
    std::uint64_t seed = kDefaultSeed;
    int trials = 3;
    std::string backend = "prime";
    int d = 3, s = 2, m = 10;
    std::string kind = "planted", mode = "random";
    SolveConfig cfg;
    cfg.seed = kDefaultSeed;
    double verify_tol = 1e-6;

    auto* check = app.add_subcommand("check", "decide generic rigidity");
    check->add_option("instance", in_path)->required();
    check->add_option("--trials", trials, "rank oracle evaluations");
    check->add_option("--seed", seed);
    check->add_option("--backend", backend)->check(CLI::IsMember({"prime", "float"}));

    auto* sparsity = app.add_subcommand("sparsity", "run the pebble game");
    sparsity->add_option("instance", in_path)->required();

    auto* decompose = app.add_subcommand("decompose", "map decomposition of a tight system");
    decompose->add_option("instance", in_path)->required();

    auto* plan = app.add_subcommand("drplan", "decomposition-recombination plan");
    plan->add_option("instance", in_path)->required();

    auto* gen = app.add_subcommand("gen", "generate datasets");
    gen->add_option("--d", d)->required();
    gen->add_option("--s", s)->required();
    gen->add_option("--m", m)->required();
    gen->add_option("--seed", seed);
    gen->add_option("--kind", kind)->check(CLI::IsMember({"planted", "uniform"}));
    gen->add_option("-o,--out", out_path);
    gen->add_option("--dict-out", dict_path, "hidden dictionary sidecar (planted)");

    auto* learn = app.add_subcommand("learn", "learn a dictionary from data");
    learn->add_option("data", in_path)->required();
    learn->add_option("--s", s, "subspace dimension (overrides the document)");
    learn->add_option("--mode", mode)->check(CLI::IsMember({"random", "fitted"}));
    learn->add_option("--seed", cfg.seed);
    learn->add_option("--tol", cfg.tol);
    learn->add_option("--restarts", cfg.restarts);
    learn->add_option("--verify-tol", verify_tol);
    learn->add_option("-o,--out", out_path);

    auto* slv = app.add_subcommand("solve", "realize a pinned instance");
    slv->add_option("instance", in_path)->required();
    slv->add_option("--seed", cfg.seed);
    slv->add_option("--tol", cfg.tol);
    slv->add_option("--restarts", cfg.restarts);
    slv->add_option("--max-iter", cfg.max_iter);
    slv->add_option("-o,--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*check) return cmd_check(in_path, as_json, trials, seed, backend);
        if (*sparsity) return cmd_sparsity(in_path, as_json);
        if (*decompose) return cmd_decompose(in_path, as_json);
        if (*plan) return cmd_drplan(in_path, as_json);
        if (*gen) {
            if (s < 1 || s >= d) throw ParseError("gen requires 1 <= s < d");
            return cmd_gen(d, s, m, seed, kind, out_path, dict_path);
        }
        if (*learn) {
            const int s_arg = learn->count("--s") ? s : 0;
            return cmd_learn(in_path, s_arg, mode, cfg, as_json, out_path, verify_tol);
        }
        if (*slv) return cmd_solve(in_path, cfg, as_json, out_path);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
