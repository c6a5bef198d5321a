#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "artkg/graph.hpp"
#include "artkg/ingest.hpp"
#include "artkg/store.hpp"
#include "artkg/util.hpp"

namespace testing {

inline std::string source_path(const std::string& rel) { return std::string(ARTKG_SOURCE_DIR) + "/" + rel; }

inline const nlohmann::json& oracles() {
    static const nlohmann::json j = nlohmann::json::parse(artkg::read_file(source_path("tests/golden/oracles.json")));
    return j;
}

inline const nlohmann::json& golden_counts() {
    static const nlohmann::json j = nlohmann::json::parse(artkg::read_file(source_path("tests/golden/counts.json")));
    return j;
}

// Random graph over a small vocabulary, including literals with escapes.
inline artkg::Graph random_graph(std::mt19937_64& rng, std::size_t n) {
    static const std::vector<std::string> lits{"plain", "with \"quote\"", "line\nbreak", "back\\slash", "tab\there",
                                               "ünïcödé", "", "0.5"};
    std::uniform_int_distribution<int> pick(0, 11);
    artkg::Graph g;
    while (g.size() < n) {
        auto s = artkg::Term::iri("http://ex.org/s" + std::to_string(pick(rng)));
        auto p = artkg::Term::iri("http://ex.org/p#" + std::to_string(pick(rng) % 4));
        artkg::Term o;
        int k = pick(rng);
        if (k < 6) o = artkg::Term::iri("http://ex.org/o/" + std::to_string(pick(rng)));
        else if (k < 9) o = artkg::Term::literal(lits[pick(rng) % lits.size()]);
        else if (k < 11) o = artkg::Term::literal(std::to_string(pick(rng)), "http://www.w3.org/2001/XMLSchema#integer");
        else o = artkg::Term::literal("hallo", "", "de");
        g.add(s, p, o);
    }
    return g;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(d);
    for (auto& x : v) x = n(rng);
    return v;
}

inline artkg::EmbeddingStore random_store(std::mt19937_64& rng, std::size_t n, std::size_t d,
                                          artkg::Provenance p = artkg::Provenance::CvAbsolute,
                                          const std::string& prefix = "item") {
    artkg::EmbeddingStore s(d, p);
    for (std::size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%04zu", prefix.c_str(), i);
        s.add(buf, random_vector(rng, d));
    }
    return s;
}

// Random orthogonal matrix (row-major d x d) by Gram-Schmidt on a Gaussian matrix.
inline std::vector<double> random_orthogonal(std::mt19937_64& rng, std::size_t d) {
    std::vector<double> q(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        auto v = random_vector(rng, d);
        for (std::size_t j = 0; j < i; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += v[k] * q[j * d + k];
            for (std::size_t k = 0; k < d; ++k) v[k] -= dot * q[j * d + k];
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (std::size_t k = 0; k < d; ++k) q[i * d + k] = v[k] / norm;
    }
    return q;
}

inline std::vector<double> apply(const std::vector<double>& q, std::span<const double> v) {
    std::size_t d = v.size();
    std::vector<double> out(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) out[i] += q[i * d + k] * v[k];
    }
    return out;
}

inline artkg::EmbeddingStore rotate(const artkg::EmbeddingStore& s, const std::vector<double>& q) {
    artkg::EmbeddingStore out(s.dim(), s.provenance());
    for (std::size_t i = 0; i < s.size(); ++i) out.add(s.ids()[i], apply(q, s.row(i)));
    return out;
}

// Compositional toy graph: entities e0..e{n-1} on a line with relations
// next (i -> i+1), skip2 (i -> i+2) and skip3 (i -> i+3). Every `holdout`-th
// skip triple goes to `test`; the rest are returned as the training graph.
struct ToyKg {
    artkg::Graph train;
    artkg::Graph all;
    std::vector<artkg::Triple> test;
};

inline ToyKg chain_kg(std::size_t n, std::size_t holdout = 4) {
    ToyKg kg;
    auto e = [](std::size_t i) { return artkg::Term::iri("http://toy.example/e" + std::to_string(i)); };
    std::size_t k = 0;
    for (std::size_t step = 1; step <= 3; ++step) {
        auto rel = artkg::Term::iri("http://toy.example/r" + std::to_string(step));
        for (std::size_t i = 0; i + step < n; ++i) {
            artkg::Triple t{e(i), rel, e(i + step)};
            kg.all.add(t);
            if (step > 1 && ++k % holdout == 0) kg.test.push_back(t);
            else kg.train.add(t);
        }
    }
    return kg;
}

// Images whose only systematic commonality is one frame, "Planted_concept",
// carried by the first `planted` images. Everything else is drawn from large
// pools, so accidental overlaps stay rare.
inline const std::string kPlantedFrameIri = "https://w3id.org/framester/framenet/abox/frame/Planted_concept";

inline std::vector<artkg::AnnotationDoc> planted_concept_docs(std::size_t n, std::size_t planted, std::uint64_t seed,
                                                             std::size_t pool = 200) {
    std::mt19937_64 rng(seed);
    auto draw = [&](const std::string& prefix, std::size_t pool) {
        return prefix + std::to_string(std::uniform_int_distribution<std::size_t>(0, pool - 1)(rng));
    };
    std::vector<artkg::AnnotationDoc> docs;
    for (std::size_t i = 0; i < n; ++i) {
        artkg::AnnotationDoc d;
        char id[32];
        std::snprintf(id, sizeof id, "pc_%03zu", i);
        d.image_id = id;
        d.ac_label = artkg::ac_labels()[i % 7];
        d.detections.objects.push_back({draw("object_", pool), 0.9});
        d.detections.action = artkg::ScoredLabel{draw("activity_", pool), 0.8};
        d.detections.synsets.push_back(draw("thing_", pool) + ".n.01");
        if (i < planted) d.detections.frames.push_back("Planted_concept");
        else d.detections.frames.push_back(draw("Frame_", pool));
        d.situations["objects"] = {"detr", "", "", "", "", ""};
        d.situations["action"] = {"har", "", "", "", "", ""};
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace testing
