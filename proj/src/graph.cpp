#include "artkg/graph.hpp"

#include <algorithm>

#include "artkg/error.hpp"

namespace artkg {

Term Term::iri(std::string value) {
    Term t;
    t.kind = Kind::Iri;
    t.value = std::move(value);
    return t;
}

Term Term::literal(std::string lexical, std::string datatype, std::string language) {
    Term t;
    t.kind = Kind::Literal;
    t.value = std::move(lexical);
    t.datatype = std::move(datatype);
    t.language = std::move(language);
    return t;
}

std::string_view Term::local_name() const {
    std::string_view v = value;
    if (is_literal()) return v;
    auto pos = v.find_last_of("/#");
    return pos == std::string_view::npos ? v : v.substr(pos + 1);
}

bool is_valid_iri(std::string_view iri) {
    if (iri.empty()) return false;
    for (unsigned char c : iri) {
        if (c <= 0x20) return false;
        switch (c) {
            case '<': case '>': case '"': case '{': case '}':
            case '|': case '^': case '`': case '\\':
                return false;
            default:
                break;
        }
    }
    return true;
}

namespace {

void validate_term(const Term& t, const char* position) {
    if (t.is_iri()) {
        if (!is_valid_iri(t.value)) {
            throw Error(std::string("malformed IRI in ") + position + ": '" + t.value + "'");
        }
        if (!t.datatype.empty() || !t.language.empty()) {
            throw Error(std::string("IRI in ") + position + " carries literal attributes");
        }
        return;
    }
    if (!t.datatype.empty() && !t.language.empty()) {
        throw Error(std::string("literal in ") + position + " has both datatype and language");
    }
    if (!t.datatype.empty() && !is_valid_iri(t.datatype)) {
        throw Error(std::string("malformed datatype IRI in ") + position + ": '" + t.datatype + "'");
    }
    for (char c : t.language) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-';
        if (!ok) throw Error(std::string("malformed language tag in ") + position + ": '" + t.language + "'");
    }
}

}  // namespace

void validate(const Triple& t) {
    if (!t.subject.is_iri()) throw Error("literal in subject position: \"" + t.subject.value + "\"");
    if (!t.predicate.is_iri()) throw Error("literal in predicate position: \"" + t.predicate.value + "\"");
    validate_term(t.subject, "subject");
    validate_term(t.predicate, "predicate");
    validate_term(t.object, "object");
}

Graph::Graph(const Graph& other) : triples_(other.triples_) {
    for (const auto& t : triples_) index(t);
}

Graph& Graph::operator=(const Graph& other) {
    if (this != &other) {
        Graph copy(other);
        *this = std::move(copy);
    }
    return *this;
}

bool Graph::add(Triple t) {
    validate(t);
    auto [it, inserted] = triples_.insert(std::move(t));
    if (inserted) index(*it);
    return inserted;
}

void Graph::merge(const Graph& other) {
    for (const auto& t : other) add(t);
}

void Graph::index(const Triple& t) {
    by_subject_[t.subject].push_back(&t);
    by_predicate_[t.predicate].push_back(&t);
    by_object_[t.object].push_back(&t);
}

std::vector<const Triple*> Graph::by_subject(const Term& s) const {
    auto it = by_subject_.find(s);
    return it == by_subject_.end() ? std::vector<const Triple*>{} : it->second;
}

std::vector<const Triple*> Graph::by_object(const Term& o) const {
    auto it = by_object_.find(o);
    return it == by_object_.end() ? std::vector<const Triple*>{} : it->second;
}

std::vector<Triple> Graph::match(const std::optional<Term>& s, const std::optional<Term>& p,
                                 const std::optional<Term>& o) const {
    if (s && p && o) {
        Triple t{*s, *p, *o};
        if (triples_.contains(t)) return {t};
        return {};
    }
    // Pick the most selective bound index, then check the remaining positions.
    const std::vector<const Triple*>* candidates = nullptr;
    auto consider = [&](const Index& idx, const std::optional<Term>& key) {
        if (!key) return true;
        auto it = idx.find(*key);
        if (it == idx.end()) return false;
        if (!candidates || it->second.size() < candidates->size()) candidates = &it->second;
        return true;
    };
    if (!consider(by_subject_, s) || !consider(by_predicate_, p) || !consider(by_object_, o)) return {};

    auto matches = [&](const Triple& t) {
        return (!s || t.subject == *s) && (!p || t.predicate == *p) && (!o || t.object == *o);
    };
    std::vector<Triple> out;
    if (!candidates) {
        out.assign(triples_.begin(), triples_.end());
        return out;
    }
    for (const Triple* t : *candidates) {
        if (matches(*t)) out.push_back(*t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Triple> query_pattern(const Graph& g, const std::optional<Term>& s, const std::optional<Term>& p,
                                  const std::optional<Term>& o) {
    return g.match(s, p, o);
}

}  // namespace artkg
