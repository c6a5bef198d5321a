#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "artkg/vocab.hpp"

namespace artkg {

struct Term {
    enum class Kind : std::uint8_t { Iri, Literal };

    Kind kind = Kind::Iri;
    std::string value;
    std::string datatype;  // literals only; empty means plain string
    std::string language;  // literals only

    static Term iri(std::string value);
    static Term literal(std::string lexical, std::string datatype = {}, std::string language = {});

    bool is_iri() const noexcept { return kind == Kind::Iri; }
    bool is_literal() const noexcept { return kind == Kind::Literal; }

    /// Text after the last '/' or '#' for IRIs, the lexical form for literals.
    std::string_view local_name() const;

    auto operator<=>(const Term&) const = default;
    bool operator==(const Term&) const = default;
};

struct Triple {
    Term subject;
    Term predicate;
    Term object;

    auto operator<=>(const Triple&) const = default;
    bool operator==(const Triple&) const = default;
};

/// Throws artkg::Error when the triple violates the term invariants.
void validate(const Triple& t);
bool is_valid_iri(std::string_view iri);

/// Set of triples with subject/predicate/object indexes.
///
/// Element addresses inside std::set are stable, so the indexes hold
/// pointers into `triples_`. Copying rebuilds them.
class Graph {
public:
    Graph() = default;
    Graph(const Graph& other);
    Graph& operator=(const Graph& other);
    Graph(Graph&&) noexcept = default;
    Graph& operator=(Graph&&) noexcept = default;

    /// Returns true when the triple was new.
    bool add(Triple t);
    bool add(Term s, Term p, Term o) { return add(Triple{std::move(s), std::move(p), std::move(o)}); }
    void merge(const Graph& other);

    bool contains(const Triple& t) const { return triples_.contains(t); }
    std::size_t size() const noexcept { return triples_.size(); }
    bool empty() const noexcept { return triples_.empty(); }

    const std::set<Triple>& triples() const noexcept { return triples_; }
    auto begin() const { return triples_.begin(); }
    auto end() const { return triples_.end(); }

    /// Triples matching every bound position, in set order.
    std::vector<Triple> match(const std::optional<Term>& s, const std::optional<Term>& p,
                              const std::optional<Term>& o) const;

    std::vector<const Triple*> by_subject(const Term& s) const;
    std::vector<const Triple*> by_object(const Term& o) const;

    bool operator==(const Graph& other) const { return triples_ == other.triples_; }

private:
    using Index = std::map<Term, std::vector<const Triple*>>;

    void index(const Triple& t);

    std::set<Triple> triples_;
    Index by_subject_;
    Index by_predicate_;
    Index by_object_;
};

/// Pattern query; an unset position is a wildcard.
std::vector<Triple> query_pattern(const Graph& g, const std::optional<Term>& s = std::nullopt,
                                  const std::optional<Term>& p = std::nullopt,
                                  const std::optional<Term>& o = std::nullopt);

// N-Triples

std::string to_ntriples(const Term& t);
std::string to_ntriples_line(const Triple& t);

/// Canonical form: one line per triple, lines sorted as raw bytes.
std::string serialize_ntriples(const Graph& g);
Graph parse_ntriples(std::string_view text);

Graph read_ntriples_file(const std::string& path);

// Anti-leakage filtering and shared-node queries

/// The seven abstract-concept labels, alphabetical.
const std::vector<std::string>& ac_labels();

struct LeakageResult {
    Graph graph;
    std::size_t removed = 0;
};

/// Drops triples whose subject or object local name contains any forbidden
/// label, compared case-insensitively. Predicates are not inspected.
LeakageResult filter_leakage(const Graph& g, const std::vector<std::string>& forbidden = ac_labels());

bool mentions_any(const Term& t, const std::vector<std::string>& lowered_labels);

struct SharedNode {
    Term node;
    std::size_t count = 0;

    bool operator==(const SharedNode&) const = default;
};

struct SharedNodeOptions {
    std::size_t max_hops = 2;
    std::size_t k = 10;
    /// Predicates allowed for forward steps; empty allows all. The reverse
    /// step image -> annotation is always allowed.
    std::set<std::string> predicates{vocab::kTypedBy};
};

/// Nodes reachable from at least two of `images`, ranked by the number of
/// distinct images reaching them (descending), then by term order.
std::vector<SharedNode> shared_nodes(const Graph& g, const std::vector<std::string>& image_iris,
                                     const SharedNodeOptions& options = {});

/// Nodes reachable from one image within the traversal rules of shared_nodes.
std::set<Term> reachable_nodes(const Graph& g, const Term& image, const SharedNodeOptions& options);

}  // namespace artkg
