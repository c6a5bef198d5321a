#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "artkg/graph.hpp"
#include "artkg/store.hpp"

namespace artkg {

struct Neighbor {
    std::string id;
    double similarity = 0.0;

    bool operator==(const Neighbor&) const = default;
};

/// The k reference items closest to the query by cosine, descending, ties by
/// id. The query itself is never returned.
std::vector<Neighbor> top_k_similar(const std::string& query_id, const EmbeddingStore& query_store,
                                    const EmbeddingStore& reference_store, std::size_t k = 5);

struct ExplainSpace {
    std::string name;
    const EmbeddingStore* query = nullptr;
    const EmbeddingStore* reference = nullptr;
};

struct ReportNeighbor {
    std::string id;
    double sim = 0.0;
    std::string label;

    bool operator==(const ReportNeighbor&) const = default;
};

struct ReportSharedNode {
    std::string iri;
    std::size_t count = 0;

    bool operator==(const ReportSharedNode&) const = default;
};

struct SpaceReport {
    std::string name;
    std::vector<ReportNeighbor> neighbors;
    double label_agreement = 0.0;
    std::vector<ReportSharedNode> shared_nodes;

    bool operator==(const SpaceReport&) const = default;
};

struct Report {
    std::string test_id;
    std::string gold_label;
    std::vector<SpaceReport> spaces;

    bool operator==(const Report&) const = default;
};

struct ExplainOptions {
    std::size_t k = 5;
    SharedNodeOptions shared;
    std::function<std::string(std::string_view)> iri_of;  // image id -> graph IRI
};

/// Nearest neighbours per space with label agreement and the graph nodes the
/// neighbour set shares. Spaces are reported independently.
Report explain(const std::string& test_id, const std::vector<ExplainSpace>& spaces, const Graph& graph,
               const std::map<std::string, std::string>& labels, const ExplainOptions& options);

nlohmann::json to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);
std::string report_to_text(const Report& r);

}  // namespace artkg
