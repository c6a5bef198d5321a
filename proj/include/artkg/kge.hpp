#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "artkg/graph.hpp"
#include "artkg/store.hpp"
#include "artkg/util.hpp"

namespace artkg {

enum class Norm : std::uint8_t { L1 = 1, L2 = 2 };

struct KgeConfig {
    std::size_t dim = 128;
    double margin = 1.0;
    Norm norm = Norm::L2;
    double learning_rate = 0.01;
    std::size_t epochs = 100;
    std::size_t batch_size = 256;
    std::size_t negatives_per_positive = 1;
    std::uint64_t seed = 0;
    bool entity_norm_constraint = true;

    void validate() const;
};

KgeConfig kge_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KgeConfig& cfg);

struct IdTriple {
    std::uint32_t head = 0;
    std::uint32_t relation = 0;
    std::uint32_t tail = 0;

    bool operator==(const IdTriple&) const = default;
};

struct IdTripleHash {
    std::size_t operator()(const IdTriple& t) const noexcept;
};

using IdTripleSet = std::unordered_set<IdTriple, IdTripleHash>;

/// Entity key: the IRI itself, or the N-Triples form of a literal.
std::string entity_key(const Term& t);

/// Entities and relations of a graph, numbered in sorted key order.
struct GraphIndex {
    std::vector<Term> entities;
    std::vector<std::string> relations;
    std::unordered_map<std::string, std::uint32_t> entity_ids;
    std::unordered_map<std::string, std::uint32_t> relation_ids;
    std::vector<IdTriple> triples;  // canonical N-Triples line order

    std::size_t entity_count() const noexcept { return entities.size(); }
    std::size_t relation_count() const noexcept { return relations.size(); }
};

GraphIndex index_graph(const Graph& g);

/// TransE parameters. Rows are stored row-major.
struct KgeModel {
    KgeConfig config;
    std::vector<std::string> entity_keys;
    std::vector<std::string> relation_keys;
    std::unordered_map<std::string, std::uint32_t> entity_ids;
    std::unordered_map<std::string, std::uint32_t> relation_ids;
    std::vector<double> entity_vectors;
    std::vector<double> relation_vectors;

    std::size_t dim() const noexcept { return config.dim; }
    std::size_t entity_count() const noexcept { return entity_keys.size(); }
    std::size_t relation_count() const noexcept { return relation_keys.size(); }

    std::span<double> entity(std::size_t i) { return {entity_vectors.data() + i * dim(), dim()}; }
    std::span<const double> entity(std::size_t i) const { return {entity_vectors.data() + i * dim(), dim()}; }
    std::span<double> relation(std::size_t i) { return {relation_vectors.data() + i * dim(), dim()}; }
    std::span<const double> relation(std::size_t i) const { return {relation_vectors.data() + i * dim(), dim()}; }

    std::uint32_t entity_id(const std::string& key) const;
    std::uint32_t relation_id(const std::string& key) const;

    bool operator==(const KgeModel& other) const;
};

/// Uniform entries in [-6/sqrt(dim), 6/sqrt(dim)], relation rows then
/// L2-normalized once.
KgeModel init_model(const KgeConfig& cfg, const GraphIndex& index);

/// Distance ||h + r - t|| under the configured norm.
double score(const KgeModel& m, const IdTriple& t);
double score(const KgeModel& m, const std::string& head, const std::string& relation, const std::string& tail);

/// Replaces head or tail (probability 1/2 each) with a different uniformly
/// drawn entity, redrawing while the result is a known true triple.
IdTriple negative_sample(const IdTriple& t, std::size_t entity_count, Rng& rng, const IdTripleSet* known = nullptr);

/// Dense gradient buffers that remember which rows were touched.
class KgeGradient {
public:
    KgeGradient(std::size_t entities, std::size_t relations, std::size_t dim);

    std::span<double> entity(std::uint32_t i);
    std::span<double> relation(std::uint32_t i);
    std::span<const double> entity_row(std::uint32_t i) const { return {entity_.data() + i * dim_, dim_}; }
    std::span<const double> relation_row(std::uint32_t i) const { return {relation_.data() + i * dim_, dim_}; }

    const std::vector<std::uint32_t>& touched_entities() const noexcept { return touched_entities_; }
    const std::vector<std::uint32_t>& touched_relations() const noexcept { return touched_relations_; }

    void clear();

private:
    std::size_t dim_;
    std::vector<double> entity_;
    std::vector<double> relation_;
    std::vector<char> entity_mark_;
    std::vector<char> relation_mark_;
    std::vector<std::uint32_t> touched_entities_;
    std::vector<std::uint32_t> touched_relations_;
};

/// max(0, margin + d(pos) - d(neg)); adds its gradient into `grad` when the
/// hinge is active.
double hinge_loss(const KgeModel& m, const IdTriple& pos, const IdTriple& neg);
double accumulate_hinge_gradient(const KgeModel& m, const IdTriple& pos, const IdTriple& neg, KgeGradient& grad);

/// Projects every entity row onto the unit L2 ball.
void constrain_entity_norms(KgeModel& m);

/// One pass of minibatch SGD over shuffled triples. Returns the mean hinge loss.
double train_epoch(KgeModel& m, std::span<const IdTriple> triples, Rng& rng, const IdTripleSet& known);

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Indexes the graph, checks it is leakage-free, and trains for cfg.epochs.
KgeModel train_kge(const Graph& g, const KgeConfig& cfg, const EpochCallback& on_epoch = {},
                   const std::vector<std::string>& forbidden = ac_labels());

/// Throws when any indexed entity local name contains a forbidden label.
void check_no_leakage(const GraphIndex& index, const std::vector<std::string>& forbidden);

struct LinkPredictionMetrics {
    double hits_at_1 = 0.0;
    double hits_at_10 = 0.0;
    double mean_rank = 0.0;
};

/// Filtered ranking: other known true triples are dropped from the
/// candidate lists. Ties count half. Head and tail ranks are averaged.
LinkPredictionMetrics link_prediction_eval(const KgeModel& m, std::span<const IdTriple> test, const IdTripleSet& known);

/// Entity rows for the given IRIs; store ids come from `ids`.
EmbeddingStore image_embeddings(const KgeModel& m, const std::vector<std::string>& ids,
                                const std::function<std::string(std::string_view)>& iri_of);

// Checkpoint: "ATKG" magic, version, dim, |E|, |R|, norm, seed, float32 rows
// (little endian), then length-prefixed entity and relation keys.
std::string save_checkpoint(const KgeModel& m);
KgeModel load_checkpoint(std::string_view bytes);
void write_checkpoint(const std::string& path, const KgeModel& m);
KgeModel read_checkpoint(const std::string& path);

/// Entity rows as `key TAB f1 ... fd`.
std::string export_entities_tsv(const KgeModel& m);

}  // namespace artkg
