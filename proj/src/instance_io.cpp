#include "rigidkit/instance_io.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace rigidkit {

using nlohmann::json;

PinnedInstance parse_instance(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("document root must be an object");
    if (!doc.contains("d") || !doc["d"].is_number_integer())
        throw ParseError("missing integer field \"d\"");
    if (!doc.contains("vertices") || !doc["vertices"].is_array())
        throw ParseError("missing array field \"vertices\"");
    if (!doc.contains("hyperedges") || !doc["hyperedges"].is_array())
        throw ParseError("missing array field \"hyperedges\"");

    PinnedInstance inst;
    auto& h = inst.hypergraph;
    h.d = doc["d"].get<int>();

    std::map<std::string, int> index_of;
    for (const auto& v : doc["vertices"]) {
        if (!v.is_string()) throw ParseError("vertex ids must be strings");
        const auto id = v.get<std::string>();
        if (!index_of.emplace(id, h.num_vertices()).second)
            throw ParseError("duplicate vertex id \"" + id + "\"");
        h.vertex_ids.push_back(id);
    }

    bool any_pins = false;
    std::vector<std::vector<Eigen::VectorXd>> pins;
    for (const auto& ej : doc["hyperedges"]) {
        if (!ej.is_object() || !ej.contains("vertices") || !ej["vertices"].is_array())
            throw ParseError("each hyperedge needs a \"vertices\" array");
        WeightedHypergraph::Hyperedge e;
        for (const auto& v : ej["vertices"]) {
            if (!v.is_string()) throw ParseError("hyperedge vertex ids must be strings");
            auto it = index_of.find(v.get<std::string>());
            if (it == index_of.end())
                throw ParseError("hyperedge references undeclared vertex \"" +
                                 v.get<std::string>() + "\"");
            e.vertices.push_back(it->second);
        }
        std::sort(e.vertices.begin(), e.vertices.end());
        e.weight = ej.value("weight", 1);
        std::vector<Eigen::VectorXd> edge_pins;
        if (ej.contains("pins")) {
            any_pins = true;
            if (!ej["pins"].is_array()) throw ParseError("\"pins\" must be an array");
            for (const auto& pj : ej["pins"]) {
                if (!pj.is_array() || static_cast<int>(pj.size()) != h.d - 1)
                    throw ParseError("each pin must have d-1 = " +
                                     std::to_string(h.d - 1) + " coordinates");
                Eigen::VectorXd pin(h.d - 1);
                for (int c = 0; c < h.d - 1; ++c) {
                    if (!pj[c].is_number()) throw ParseError("pin coordinates must be numbers");
                    pin(c) = pj[c].get<double>();
                }
                edge_pins.push_back(std::move(pin));
            }
            if (static_cast<int>(edge_pins.size()) != e.weight)
                throw ParseError("hyperedge " + std::to_string(h.num_edges()) +
                                 " declares weight " + std::to_string(e.weight) +
                                 " but lists " + std::to_string(edge_pins.size()) + " pins");
        }
        h.hyperedges.push_back(std::move(e));
        pins.push_back(std::move(edge_pins));
    }
    if (any_pins) inst.pins = std::move(pins);

    try {
        inst.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return inst;
}

std::string serialize_instance(const PinnedInstance& inst) {
    const auto& h = inst.hypergraph;
    json doc;
    doc["d"] = h.d;
    doc["vertices"] = h.vertex_ids;
    doc["hyperedges"] = json::array();
    for (int k = 0; k < h.num_edges(); ++k) {
        const auto& e = h.hyperedges[k];
        json ej;
        ej["vertices"] = json::array();
        for (int v : e.vertices) ej["vertices"].push_back(h.vertex_ids[v]);
        ej["weight"] = e.weight;
        if (inst.has_pins()) {
            ej["pins"] = json::array();
            for (const auto& pin : inst.pins[k]) {
                json pj = json::array();
                for (int c = 0; c < pin.size(); ++c) pj.push_back(pin(c));
                ej["pins"].push_back(pj);
            }
        }
        doc["hyperedges"].push_back(std::move(ej));
    }
    return doc.dump(2) + "\n";
}

PinnedInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

void save_instance(const PinnedInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write instance file: " + path);
    out << serialize_instance(inst);
}

} // namespace rigidkit
