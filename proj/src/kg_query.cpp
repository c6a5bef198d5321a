#include <algorithm>
#include <map>
#include <queue>

#include "artkg/error.hpp"
#include "artkg/graph.hpp"
#include "artkg/util.hpp"
#include "artkg/vocab.hpp"

namespace artkg {

const std::vector<std::string>& ac_labels() {
    static const std::vector<std::string> labels{"comfort", "danger", "death", "fitness",
                                                 "freedom", "power",  "safety"};
    return labels;
}

bool mentions_any(const Term& t, const std::vector<std::string>& lowered_labels) {
    std::string name = to_lower_ascii(t.local_name());
    return std::any_of(lowered_labels.begin(), lowered_labels.end(),
                       [&](const std::string& l) { return name.find(l) != std::string::npos; });
}

LeakageResult filter_leakage(const Graph& g, const std::vector<std::string>& forbidden) {
    std::vector<std::string> lowered;
    for (const auto& f : forbidden) {
        if (!f.empty()) lowered.push_back(to_lower_ascii(f));
    }
    if (lowered.empty()) throw Error("leakage filter needs at least one label");

    LeakageResult result;
    for (const auto& t : g) {
        if (mentions_any(t.subject, lowered) || mentions_any(t.object, lowered)) {
            ++result.removed;
            continue;
        }
        result.graph.add(t);
    }
    return result;
}

namespace {

bool is_annotation_node(const Graph& g, const Term& node) {
    static const Term type = Term::iri(std::string(vocab::kRdfType));
    static const Term annotation = Term::iri(vocab::kAnnotation);
    return g.contains(Triple{node, type, annotation});
}

}  // namespace

std::set<Term> reachable_nodes(const Graph& g, const Term& image, const SharedNodeOptions& options) {
    const Term is_annotation_of = Term::iri(vocab::kIsAnnotationOf);
    std::set<Term> seen{image};
    std::set<Term> found;
    std::queue<std::pair<Term, std::size_t>> frontier;
    frontier.emplace(image, 0);
    while (!frontier.empty()) {
        auto [node, depth] = frontier.front();
        frontier.pop();
        if (depth == options.max_hops) continue;
        auto visit = [&](const Term& next, bool via_annotation_edge) {
            if (!seen.insert(next).second) return;
            if (!via_annotation_edge && next.is_iri() && !is_annotation_node(g, next)) found.insert(next);
            if (!via_annotation_edge && next.is_literal()) found.insert(next);
            if (next.is_iri()) frontier.emplace(next, depth + 1);
        };
        // image <- annotation (reverse isAnnotationOf)
        for (const Triple* t : g.by_object(node)) {
            if (t->predicate == is_annotation_of) visit(t->subject, true);
        }
        for (const Triple* t : g.by_subject(node)) {
            if (t->predicate == is_annotation_of) continue;
            if (!options.predicates.empty() && !options.predicates.contains(t->predicate.value)) continue;
            visit(t->object, false);
        }
    }
    return found;
}

std::vector<SharedNode> shared_nodes(const Graph& g, const std::vector<std::string>& image_iris,
                                     const SharedNodeOptions& options) {
    if (image_iris.empty()) throw Error("shared_nodes needs at least one image");
    if (options.max_hops < 1) throw Error("max_hops must be at least 1");

    std::set<Term> images;
    for (const auto& iri : image_iris) {
        Term t = Term::iri(iri);
        if (g.by_subject(t).empty() && g.by_object(t).empty()) throw Error("unknown image: " + iri);
        images.insert(std::move(t));
    }

    std::map<Term, std::size_t> counts;
    for (const auto& image : images) {
        for (const auto& node : reachable_nodes(g, image, options)) {
            if (!images.contains(node)) ++counts[node];
        }
    }

    std::vector<SharedNode> ranked;
    for (auto& [node, count] : counts) {
        if (count >= 2) ranked.push_back({node, count});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const SharedNode& a, const SharedNode& b) { return a.count > b.count; });
    if (ranked.size() > options.k) ranked.resize(options.k);
    return ranked;
}

}  // namespace artkg
