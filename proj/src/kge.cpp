#include "artkg/kge.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "artkg/error.hpp"

namespace artkg {

void KgeConfig::validate() const {
    if (dim < 1) throw Error("kge: dim must be at least 1");
    if (!(margin > 0.0)) throw Error("kge: margin must be positive");
    if (epochs < 1) throw Error("kge: epochs must be at least 1");
    if (batch_size < 1) throw Error("kge: batch_size must be at least 1");
    if (negatives_per_positive < 1) throw Error("kge: negatives_per_positive must be at least 1");
    if (!(learning_rate >= 0.0)) throw Error("kge: learning_rate must be non-negative");
}

KgeConfig kge_config_from_json(const nlohmann::json& j) {
    KgeConfig c;
    try {
        c.dim = j.value("dim", c.dim);
        c.margin = j.value("margin", c.margin);
        std::string norm = j.value("norm", std::string("L2"));
        if (norm == "L1") c.norm = Norm::L1;
        else if (norm == "L2") c.norm = Norm::L2;
        else throw Error("kge: norm must be L1 or L2");
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.negatives_per_positive = j.value("negatives_per_positive", c.negatives_per_positive);
        c.seed = j.value("seed", c.seed);
        c.entity_norm_constraint = j.value("entity_norm_constraint", c.entity_norm_constraint);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("kge config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const KgeConfig& c) {
    return {{"dim", c.dim},
            {"margin", c.margin},
            {"norm", c.norm == Norm::L1 ? "L1" : "L2"},
            {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"negatives_per_positive", c.negatives_per_positive},
            {"seed", c.seed},
            {"entity_norm_constraint", c.entity_norm_constraint}};
}

std::size_t IdTripleHash::operator()(const IdTriple& t) const noexcept {
    std::uint64_t k = (std::uint64_t(t.head) << 32) ^ (std::uint64_t(t.relation) << 16) ^ t.tail;
    return static_cast<std::size_t>(splitmix64(k ^ (std::uint64_t(t.relation) << 48)));
}

std::string entity_key(const Term& t) { return t.is_iri() ? t.value : to_ntriples(t); }

GraphIndex index_graph(const Graph& g) {
    if (g.empty()) throw Error("cannot index an empty graph");
    GraphIndex idx;
    std::map<std::string, Term> entities;
    std::set<std::string> relations;
    for (const auto& t : g) {
        entities.emplace(entity_key(t.subject), t.subject);
        entities.emplace(entity_key(t.object), t.object);
        relations.insert(t.predicate.value);
    }
    for (auto& [key, term] : entities) {
        idx.entity_ids.emplace(key, static_cast<std::uint32_t>(idx.entities.size()));
        idx.entities.push_back(term);
    }
    for (const auto& r : relations) {
        idx.relation_ids.emplace(r, static_cast<std::uint32_t>(idx.relations.size()));
        idx.relations.push_back(r);
    }
    std::vector<std::pair<std::string, IdTriple>> lines;
    lines.reserve(g.size());
    for (const auto& t : g) {
        lines.emplace_back(to_ntriples_line(t), IdTriple{idx.entity_ids.at(entity_key(t.subject)),
                                                         idx.relation_ids.at(t.predicate.value),
                                                         idx.entity_ids.at(entity_key(t.object))});
    }
    std::sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    idx.triples.reserve(lines.size());
    for (auto& l : lines) idx.triples.push_back(l.second);
    return idx;
}

std::uint32_t KgeModel::entity_id(const std::string& key) const {
    auto it = entity_ids.find(key);
    if (it == entity_ids.end()) throw Error("unknown entity: " + key);
    return it->second;
}

std::uint32_t KgeModel::relation_id(const std::string& key) const {
    auto it = relation_ids.find(key);
    if (it == relation_ids.end()) throw Error("unknown relation: " + key);
    return it->second;
}

bool KgeModel::operator==(const KgeModel& o) const {
    return config.dim == o.config.dim && entity_keys == o.entity_keys && relation_keys == o.relation_keys &&
           entity_vectors == o.entity_vectors && relation_vectors == o.relation_vectors;
}

namespace {

void normalize(std::span<double> v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq == 0.0) return;
    double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
}

}  // namespace

KgeModel init_model(const KgeConfig& cfg, const GraphIndex& index) {
    cfg.validate();
    KgeModel m;
    m.config = cfg;
    for (const auto& e : index.entities) m.entity_keys.push_back(entity_key(e));
    m.relation_keys = index.relations;
    m.entity_ids = index.entity_ids;
    m.relation_ids = index.relation_ids;

    Rng rng(cfg.seed);
    const double bound = 6.0 / std::sqrt(static_cast<double>(cfg.dim));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    m.entity_vectors.resize(m.entity_count() * cfg.dim);
    m.relation_vectors.resize(m.relation_count() * cfg.dim);
    for (double& x : m.entity_vectors) x = uniform(rng);
    for (double& x : m.relation_vectors) x = uniform(rng);
    for (std::size_t r = 0; r < m.relation_count(); ++r) normalize(m.relation(r));
    return m;
}

double score(const KgeModel& m, const IdTriple& t) {
    auto h = m.entity(t.head);
    auto r = m.relation(t.relation);
    auto tl = m.entity(t.tail);
    double acc = 0.0;
    if (m.config.norm == Norm::L1) {
        for (std::size_t k = 0; k < m.dim(); ++k) acc += std::abs(h[k] + r[k] - tl[k]);
        return acc;
    }
    for (std::size_t k = 0; k < m.dim(); ++k) {
        double d = h[k] + r[k] - tl[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double score(const KgeModel& m, const std::string& head, const std::string& relation, const std::string& tail) {
    return score(m, IdTriple{m.entity_id(head), m.relation_id(relation), m.entity_id(tail)});
}

IdTriple negative_sample(const IdTriple& t, std::size_t entity_count, Rng& rng, const IdTripleSet* known) {
    if (entity_count < 2) throw Error("negative sampling needs at least two entities");
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<std::uint32_t> other(0, static_cast<std::uint32_t>(entity_count - 2));
    const bool corrupt_head = coin(rng);
    IdTriple out = t;
    // Bounded redraws: in tiny dense graphs every corruption may be a true triple.
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::uint32_t original = corrupt_head ? t.head : t.tail;
        std::uint32_t pick = other(rng);
        if (pick >= original) ++pick;
        out = t;
        (corrupt_head ? out.head : out.tail) = pick;
        if (!known || !known->contains(out)) break;
    }
    return out;
}

KgeGradient::KgeGradient(std::size_t entities, std::size_t relations, std::size_t dim)
    : dim_(dim),
      entity_(entities * dim, 0.0),
      relation_(relations * dim, 0.0),
      entity_mark_(entities, 0),
      relation_mark_(relations, 0) {}

std::span<double> KgeGradient::entity(std::uint32_t i) {
    if (!entity_mark_[i]) {
        entity_mark_[i] = 1;
        touched_entities_.push_back(i);
    }
    return {entity_.data() + std::size_t(i) * dim_, dim_};
}

std::span<double> KgeGradient::relation(std::uint32_t i) {
    if (!relation_mark_[i]) {
        relation_mark_[i] = 1;
        touched_relations_.push_back(i);
    }
    return {relation_.data() + std::size_t(i) * dim_, dim_};
}

void KgeGradient::clear() {
    for (auto i : touched_entities_) {
        std::fill_n(entity_.begin() + std::ptrdiff_t(i * dim_), dim_, 0.0);
        entity_mark_[i] = 0;
    }
    for (auto i : touched_relations_) {
        std::fill_n(relation_.begin() + std::ptrdiff_t(i * dim_), dim_, 0.0);
        relation_mark_[i] = 0;
    }
    touched_entities_.clear();
    touched_relations_.clear();
}

double hinge_loss(const KgeModel& m, const IdTriple& pos, const IdTriple& neg) {
    return std::max(0.0, m.config.margin + score(m, pos) - score(m, neg));
}

namespace {

// Adds sign * d(distance)/d(h, r, t) for one triple.
void add_distance_gradient(const KgeModel& m, const IdTriple& t, double sign, KgeGradient& grad) {
    const std::size_t d = m.dim();
    auto h = m.entity(t.head);
    auto r = m.relation(t.relation);
    auto tl = m.entity(t.tail);
    thread_local std::vector<double> dir;
    dir.resize(d);
    if (m.config.norm == Norm::L1) {
        for (std::size_t k = 0; k < d; ++k) {
            double v = h[k] + r[k] - tl[k];
            dir[k] = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
        }
    } else {
        double sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            dir[k] = h[k] + r[k] - tl[k];
            sq += dir[k] * dir[k];
        }
        double norm = std::sqrt(sq);
        for (double& x : dir) x = norm > 0 ? x / norm : 0.0;
    }
    auto gh = grad.entity(t.head);
    for (std::size_t k = 0; k < d; ++k) gh[k] += sign * dir[k];
    auto gr = grad.relation(t.relation);
    for (std::size_t k = 0; k < d; ++k) gr[k] += sign * dir[k];
    auto gt = grad.entity(t.tail);
    for (std::size_t k = 0; k < d; ++k) gt[k] -= sign * dir[k];
}

}  // namespace

double accumulate_hinge_gradient(const KgeModel& m, const IdTriple& pos, const IdTriple& neg, KgeGradient& grad) {
    double loss = hinge_loss(m, pos, neg);
    if (loss > 0.0) {
        add_distance_gradient(m, pos, 1.0, grad);
        add_distance_gradient(m, neg, -1.0, grad);
    }
    return loss;
}

void constrain_entity_norms(KgeModel& m) {
    for (std::size_t e = 0; e < m.entity_count(); ++e) {
        auto row = m.entity(e);
        double sq = 0.0;
        for (double x : row) sq += x * x;
        if (sq > 1.0) {
            double inv = 1.0 / std::sqrt(sq);
            for (double& x : row) x *= inv;
        }
    }
}

double train_epoch(KgeModel& m, std::span<const IdTriple> triples, Rng& rng, const IdTripleSet& known) {
    const auto& cfg = m.config;
    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    KgeGradient grad(m.entity_count(), m.relation_count(), m.dim());
    double total = 0.0;
    std::size_t terms = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        grad.clear();
        for (std::size_t i = start; i < end; ++i) {
            const IdTriple& pos = triples[order[i]];
            for (std::size_t n = 0; n < cfg.negatives_per_positive; ++n) {
                IdTriple neg = negative_sample(pos, m.entity_count(), rng, &known);
                total += accumulate_hinge_gradient(m, pos, neg, grad);
                ++terms;
            }
        }
        if (cfg.learning_rate == 0.0) continue;
        for (auto e : grad.touched_entities()) {
            auto row = m.entity(e);
            auto g = grad.entity_row(e);
            for (std::size_t k = 0; k < m.dim(); ++k) row[k] -= cfg.learning_rate * g[k];
        }
        for (auto r : grad.touched_relations()) {
            auto row = m.relation(r);
            auto g = grad.relation_row(r);
            for (std::size_t k = 0; k < m.dim(); ++k) row[k] -= cfg.learning_rate * g[k];
        }
    }
    if (cfg.entity_norm_constraint && cfg.learning_rate != 0.0) constrain_entity_norms(m);
    return terms == 0 ? 0.0 : total / static_cast<double>(terms);
}

void check_no_leakage(const GraphIndex& index, const std::vector<std::string>& forbidden) {
    std::vector<std::string> lowered;
    for (const auto& f : forbidden) lowered.push_back(to_lower_ascii(f));
    for (const auto& e : index.entities) {
        if (mentions_any(e, lowered)) {
            throw Error("training graph leaks a target label through entity '" + entity_key(e) +
                        "'; run the leakage filter first");
        }
    }
}

KgeModel train_kge(const Graph& g, const KgeConfig& cfg, const EpochCallback& on_epoch,
                   const std::vector<std::string>& forbidden) {
    cfg.validate();
    GraphIndex index = index_graph(g);
    if (!forbidden.empty()) check_no_leakage(index, forbidden);
    KgeModel m = init_model(cfg, index);
    IdTripleSet known(index.triples.begin(), index.triples.end());
    Rng rng(derive_seed(cfg.seed, "kge-train"));
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss = train_epoch(m, index.triples, rng, known);
        if (on_epoch) on_epoch(epoch, loss);
    }
    return m;
}

namespace {

double filtered_rank(const KgeModel& m, const IdTriple& t, bool corrupt_head, const IdTripleSet& known) {
    const double target = score(m, t);
    std::size_t better = 0;
    std::size_t ties = 0;
    IdTriple candidate = t;
    for (std::uint32_t e = 0; e < m.entity_count(); ++e) {
        if (e == (corrupt_head ? t.head : t.tail)) continue;
        (corrupt_head ? candidate.head : candidate.tail) = e;
        if (known.contains(candidate)) continue;
        double s = score(m, candidate);
        if (s < target) ++better;
        else if (s == target) ++ties;
    }
    return 1.0 + static_cast<double>(better) + 0.5 * static_cast<double>(ties);
}

}  // namespace

LinkPredictionMetrics link_prediction_eval(const KgeModel& m, std::span<const IdTriple> test, const IdTripleSet& known) {
    LinkPredictionMetrics out;
    if (test.empty()) return out;
    std::size_t n = 0;
    for (const auto& t : test) {
        for (bool head : {true, false}) {
            double rank = filtered_rank(m, t, head, known);
            out.mean_rank += rank;
            if (rank <= 1.0) out.hits_at_1 += 1.0;
            if (rank <= 10.0) out.hits_at_10 += 1.0;
            ++n;
        }
    }
    out.mean_rank /= double(n);
    out.hits_at_1 /= double(n);
    out.hits_at_10 /= double(n);
    return out;
}

EmbeddingStore image_embeddings(const KgeModel& m, const std::vector<std::string>& ids,
                                const std::function<std::string(std::string_view)>& iri_of) {
    EmbeddingStore store(m.dim(), Provenance::KgeAbsolute);
    for (const auto& id : ids) {
        std::string iri = iri_of ? iri_of(id) : id;
        auto it = m.entity_ids.find(iri);
        if (it == m.entity_ids.end()) throw Error("image '" + id + "' is not in the embedded graph (" + iri + ")");
        store.add(id, m.entity(it->second));
    }
    return store;
}

// Checkpoint

namespace {

constexpr char kMagic[4] = {'A', 'T', 'K', 'G'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::string& out, T v) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) out += static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
}

void put_f32(std::string& out, double v) {
    put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

class Reader {
public:
    explicit Reader(std::string_view b) : b_(b) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }

    double f32() { return static_cast<double>(std::bit_cast<float>(get<std::uint32_t>())); }

    std::string str() {
        auto n = get<std::uint32_t>();
        need(n);
        std::string s(b_.substr(pos_, n));
        pos_ += n;
        return s;
    }

    std::string_view raw(std::size_t n) {
        need(n);
        auto s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == b_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > b_.size()) throw Error("checkpoint truncated");
    }

    std::string_view b_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string save_checkpoint(const KgeModel& m) {
    std::string out(kMagic, 4);
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.entity_count()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.relation_count()));
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(m.config.norm));
    put_le<std::uint64_t>(out, m.config.seed);
    for (double v : m.entity_vectors) put_f32(out, v);
    for (double v : m.relation_vectors) put_f32(out, v);
    for (const auto& k : m.entity_keys) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(k.size()));
        out += k;
    }
    for (const auto& k : m.relation_keys) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(k.size()));
        out += k;
    }
    return out;
}

KgeModel load_checkpoint(std::string_view bytes) {
    Reader r(bytes);
    if (r.raw(4) != std::string_view(kMagic, 4)) throw Error("not a TransE checkpoint (bad magic)");
    if (auto v = r.get<std::uint32_t>(); v != kVersion) throw Error("unsupported checkpoint version " + std::to_string(v));
    KgeModel m;
    m.config.dim = r.get<std::uint32_t>();
    const std::size_t ne = r.get<std::uint32_t>();
    const std::size_t nr = r.get<std::uint32_t>();
    auto norm = r.get<std::uint8_t>();
    if (norm != 1 && norm != 2) throw Error("checkpoint has bad norm tag");
    m.config.norm = static_cast<Norm>(norm);
    m.config.seed = r.get<std::uint64_t>();
    if (m.config.dim == 0) throw Error("checkpoint has zero dimension");
    m.entity_vectors.resize(ne * m.config.dim);
    m.relation_vectors.resize(nr * m.config.dim);
    for (double& v : m.entity_vectors) v = r.f32();
    for (double& v : m.relation_vectors) v = r.f32();
    for (std::size_t i = 0; i < ne; ++i) {
        m.entity_keys.push_back(r.str());
        if (!m.entity_ids.emplace(m.entity_keys.back(), static_cast<std::uint32_t>(i)).second) {
            throw Error("checkpoint has duplicate entity key");
        }
    }
    for (std::size_t i = 0; i < nr; ++i) {
        m.relation_keys.push_back(r.str());
        if (!m.relation_ids.emplace(m.relation_keys.back(), static_cast<std::uint32_t>(i)).second) {
            throw Error("checkpoint has duplicate relation key");
        }
    }
    if (!r.done()) throw Error("trailing bytes after checkpoint");
    return m;
}

void write_checkpoint(const std::string& path, const KgeModel& m) { write_file_atomic(path, save_checkpoint(m)); }

KgeModel read_checkpoint(const std::string& path) {
    try {
        return load_checkpoint(read_file(path));
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

std::string export_entities_tsv(const KgeModel& m) {
    std::string out;
    for (std::size_t e = 0; e < m.entity_count(); ++e) {
        out += m.entity_keys[e];
        for (double v : m.entity(e)) {
            out += '\t';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace artkg
