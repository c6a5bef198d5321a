#include "artkg/interpret.hpp"

#include <algorithm>
#include <cstdio>

#include "artkg/error.hpp"
#include "artkg/kge.hpp"
#include "artkg/relative.hpp"

namespace artkg {

std::vector<Neighbor> top_k_similar(const std::string& query_id, const EmbeddingStore& query_store,
                                    const EmbeddingStore& reference_store, std::size_t k) {
    if (!query_store.contains(query_id)) throw Error("unknown query id '" + query_id + "'");
    if (reference_store.empty()) throw Error("reference store is empty");
    if (query_store.dim() != reference_store.dim()) {
        throw Error("query and reference stores have different dimensions (" + std::to_string(query_store.dim()) +
                    " vs " + std::to_string(reference_store.dim()) + ")");
    }
    auto q = query_store.vector(query_id);
    std::vector<Neighbor> all;
    all.reserve(reference_store.size());
    for (std::size_t i = 0; i < reference_store.size(); ++i) {
        const auto& id = reference_store.ids()[i];
        if (id == query_id) continue;
        all.push_back({id, cosine(q, reference_store.row(i))});
    }
    auto better = [](const Neighbor& a, const Neighbor& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.id < b.id;
    };
    const std::size_t n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + std::ptrdiff_t(n), all.end(), better);
    all.resize(n);
    return all;
}

Report explain(const std::string& test_id, const std::vector<ExplainSpace>& spaces, const Graph& graph,
               const std::map<std::string, std::string>& labels, const ExplainOptions& options) {
    Report r;
    r.test_id = test_id;
    if (auto it = labels.find(test_id); it != labels.end()) r.gold_label = it->second;
    for (const auto& space : spaces) {
        if (!space.query || !space.reference) throw Error("space '" + space.name + "' is missing a store");
        SpaceReport sr;
        sr.name = space.name;
        std::size_t agree = 0;
        std::vector<std::string> iris;
        for (const auto& n : top_k_similar(test_id, *space.query, *space.reference, options.k)) {
            auto it = labels.find(n.id);
            std::string label = it == labels.end() ? std::string() : it->second;
            if (!r.gold_label.empty() && label == r.gold_label) ++agree;
            sr.neighbors.push_back({n.id, n.similarity, label});
            iris.push_back(options.iri_of ? options.iri_of(n.id) : n.id);
        }
        sr.label_agreement = sr.neighbors.empty() ? 0.0 : double(agree) / double(sr.neighbors.size());
        if (!iris.empty()) {
            for (const auto& s : shared_nodes(graph, iris, options.shared)) {
                sr.shared_nodes.push_back({entity_key(s.node), s.count});
            }
        }
        r.spaces.push_back(std::move(sr));
    }
    return r;
}

nlohmann::json to_json(const Report& r) {
    nlohmann::json spaces = nlohmann::json::array();
    for (const auto& s : r.spaces) {
        nlohmann::json neighbors = nlohmann::json::array();
        for (const auto& n : s.neighbors) neighbors.push_back({{"id", n.id}, {"sim", n.sim}, {"label", n.label}});
        nlohmann::json shared = nlohmann::json::array();
        for (const auto& n : s.shared_nodes) shared.push_back({{"iri", n.iri}, {"count", n.count}});
        spaces.push_back({{"name", s.name},
                          {"neighbors", neighbors},
                          {"label_agreement", s.label_agreement},
                          {"shared_nodes", shared}});
    }
    return {{"test_id", r.test_id}, {"gold_label", r.gold_label}, {"spaces", spaces}};
}

Report report_from_json(const nlohmann::json& j) {
    Report r;
    try {
        r.test_id = j.at("test_id").get<std::string>();
        r.gold_label = j.at("gold_label").get<std::string>();
        for (const auto& s : j.at("spaces")) {
            SpaceReport sr;
            sr.name = s.at("name").get<std::string>();
            sr.label_agreement = s.at("label_agreement").get<double>();
            for (const auto& n : s.at("neighbors")) {
                sr.neighbors.push_back(
                    {n.at("id").get<std::string>(), n.at("sim").get<double>(), n.at("label").get<std::string>()});
            }
            for (const auto& n : s.at("shared_nodes")) {
                sr.shared_nodes.push_back({n.at("iri").get<std::string>(), n.at("count").get<std::size_t>()});
            }
            r.spaces.push_back(std::move(sr));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("report: ") + e.what());
    }
    return r;
}

std::string report_to_text(const Report& r) {
    std::string out = "test image " + r.test_id + " (gold: " + (r.gold_label.empty() ? "?" : r.gold_label) + ")\n";
    char buf[64];
    for (const auto& s : r.spaces) {
        std::snprintf(buf, sizeof buf, "%.2f", s.label_agreement);
        out += "\n[" + s.name + "] label agreement " + buf + "\n";
        for (std::size_t i = 0; i < s.neighbors.size(); ++i) {
            const auto& n = s.neighbors[i];
            std::snprintf(buf, sizeof buf, "%+.4f", n.sim);
            out += "  " + std::to_string(i + 1) + ". " + n.id + "  sim " + buf + "  " + n.label + "\n";
        }
        if (!s.shared_nodes.empty()) {
            out += "  shared nodes:\n";
            for (const auto& n : s.shared_nodes) out += "    " + std::to_string(n.count) + "x " + n.iri + "\n";
        }
    }
    return out;
}

}  // namespace artkg
