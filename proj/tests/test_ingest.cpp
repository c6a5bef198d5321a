#include <algorithm>
#include <random>

#include <doctest.h>

#include "artkg/error.hpp"
#include "artkg/ingest.hpp"
#include "artkg/synth.hpp"
#include "artkg/vocab.hpp"
#include "support.hpp"

using namespace artkg;

namespace {

std::string fixture(const std::string& name) { return testing::source_path("tests/fixtures/" + name); }
std::string golden(const std::string& name) { return read_file(testing::source_path("tests/golden/" + name)); }

Graph without_tbox(const Graph& g) {
    auto t = tbox();
    Graph out;
    for (const auto& tr : g) {
        if (!t.contains(tr)) out.add(tr);
    }
    return out;
}

}  // namespace

TEST_CASE("load_annotations") {
    CHECK(parse_annotations("[]").empty());
    auto docs = load_annotations(fixture("three_docs.json"));
    REQUIRE(docs.size() == 3);
    CHECK(docs[0].image_id == "a");
    CHECK(docs[1].detections.emotion->label == "sadness");
    CHECK(docs[2].ac_label == "power");
}

TEST_CASE("load_annotations rejects schema violations") {
    CHECK_THROWS_WITH_AS(parse_annotations(R"([{"image_id":"x","ac_label":"joy"}])"),
                         doctest::Contains("comfort, danger, death, fitness, freedom, power, safety"), Error);
    CHECK_THROWS_WITH_AS(parse_annotations(R"([{"image_id":"x","ac_label":"power"},{"ac_label":"power"}])"),
                         doctest::Contains("document 1, field 'image_id'"), Error);
    CHECK_THROWS_WITH_AS(
        parse_annotations(R"([{"image_id":"x","ac_label":"power","detections":{"action":{"label":"run","score":1.5}}}])"),
        doctest::Contains("detections.action.score"), Error);
    CHECK_THROWS_WITH_AS(
        parse_annotations(R"([{"image_id":"x","ac_label":"power","detections":{"colors":[[1,2,300]]}}])"),
        doctest::Contains("detections.colors"), Error);
    CHECK_THROWS_WITH_AS(
        parse_annotations(R"([{"image_id":"x","ac_label":"power","detections":{"objects":[{"score":0.5}]}}])"),
        doctest::Contains("detections.objects.label"), Error);
    CHECK_THROWS_AS(parse_annotations(R"({"image_id":"x"})"), Error);
    CHECK_THROWS_AS(parse_annotations("[{"), Error);
}

TEST_CASE("documents round-trip through JSON") {
    auto docs = gen_annotations(21, 4, 0.7);
    CHECK(parse_annotations(dump_annotations(docs)) == docs);
    auto full = load_annotations(fixture("full_unit.json"));
    CHECK(parse_annotations(dump_annotations(full)) == full);
}

TEST_CASE("nearest_css3_color matches the brute-force oracle") {
    CHECK(Css3ColorTable::builtin().entries().size() == 147);
    for (const auto& c : testing::oracles()["colors"]) {
        Rgb rgb{c["rgb"][0].get<std::uint8_t>(), c["rgb"][1].get<std::uint8_t>(), c["rgb"][2].get<std::uint8_t>()};
        auto got = nearest_css3_color(rgb);
        CAPTURE(c.dump());
        if (c["expected"].is_null()) {
            CHECK_FALSE(got.has_value());
        } else {
            REQUIRE(got.has_value());
            CHECK(got->name == c["expected"]["name"].get<std::string>());
            CHECK(got->distance == doctest::Approx(c["expected"]["distance"].get<double>()).epsilon(1e-15));
        }
    }
}

TEST_CASE("nearest_css3_color never returns a distance of 50 or more") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int i = 0; i < 2000; ++i) {
        Rgb rgb{static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
                static_cast<std::uint8_t>(byte(rng))};
        if (auto m = nearest_css3_color(rgb)) CHECK(m->distance < 50.0);
    }
}

TEST_CASE("color table parsing") {
    auto t = Css3ColorTable::parse_tsv("# name\tr\tg\tb\nb\t0\t0\t10\na\t0\t0\t0\nc\t0\t0\t20\n");
    auto m = nearest_css3_color({0, 0, 5}, t);
    REQUIRE(m);
    CHECK(m->name == "a");  // tie between a and b
    CHECK_THROWS_AS(Css3ColorTable::parse_tsv("a\t0\t0\t0\na\t1\t1\t1\n"), Error);
    CHECK_THROWS_AS(Css3ColorTable::parse_tsv(""), Error);
    CHECK_THROWS_AS(Css3ColorTable::parse_tsv("a\t0\t0\t256\n"), Error);
}

TEST_CASE("snap_colors deduplicates by name") {
    auto names = snap_colors({{0, 0, 0}, {10, 200, 90}, {3, 3, 3}, {255, 255, 255}});
    CHECK(names == std::vector<std::string>{"black", "white"});
}

TEST_CASE("filter_objects") {
    CHECK(filter_objects({}).empty());
    CHECK(filter_objects({{"dog", 0.4}}) == std::vector<ScoredLabel>{{"dog", 0.4}});
    CHECK(filter_objects({{"dog", 0.39}, {"cat", 0.41}}) == std::vector<ScoredLabel>{{"cat", 0.41}});
    CHECK(filter_objects({{"b", 0.9}, {"a", 0.1}, {"c", 0.5}}) == std::vector<ScoredLabel>{{"b", 0.9}, {"c", 0.5}});
}

TEST_CASE("IRI helpers") {
    CHECK(slugify("Hot Air-Balloon") == "hot_air_balloon");
    CHECK(slugify("more than 70") == "more_than_70");
    CHECK(slugify("a/b") == "a%2Fb");
    CHECK(iri_escape("img 1/x") == "img%201%2Fx");
    CHECK(annotation_iri("img-1", "objects", 2) == "https://w3id.org/artkg/annotation/img-1/objects/2");
    CHECK(ConceptAlignment::builtin().concept_iri("objects", "dog") == "http://conceptnet.io/c/en/dog");
    CHECK(ConceptAlignment::builtin().concept_iri("objects", "Zeppelin X") ==
          "https://w3id.org/artkg/unaligned/zeppelin_x");
    SituationInfo a{"m", "b", "d", "t", "l", "x"}, b{"m", "b", "d", "t", "l", "y"};
    CHECK(situation_iri("objects", a) == situation_iri("objects", a));
    CHECK(situation_iri("objects", a) != situation_iri("objects", b));
    CHECK(situation_iri("objects", a) != situation_iri("colors", a));
}

TEST_CASE("alignment table carries no target label") {
    const auto& align = ConceptAlignment::builtin();
    for (const auto& unit : ps_units()) {
        for (const auto& label : align.labels(unit)) {
            CHECK_FALSE(mentions_any(Term::iri(align.concept_iri(unit, label)), ac_labels()));
            CHECK_FALSE(mentions_any(Term::literal(label), ac_labels()));
        }
    }
}

TEST_CASE("caption-only document") {
    auto docs = load_annotations(fixture("minimal_caption.json"));
    auto g = build_image_graph(docs[0]);
    CHECK(serialize_ntriples(g) == golden("minimal_caption.nt"));
    auto image = Term::iri(image_iri("img_0002"));
    for (const auto& t : g) CHECK(t.subject == image);
    CHECK(query_pattern(g, std::nullopt, std::nullopt, Term::iri(vocab::kAnnotation)).empty());
    CHECK(query_pattern(g, image, Term::iri(vocab::kHasCaption)).size() == 1);
    CHECK(query_pattern(g, image, Term::iri(vocab::kTypedBy)).size() == 3);
}

TEST_CASE("single-object document matches its golden file") {
    auto docs = load_annotations(fixture("single_object.json"));
    CHECK(serialize_ntriples(build_image_graph(docs[0])) == golden("single_object.nt"));
}

TEST_CASE("full-unit document matches its golden file and counts") {
    auto docs = load_annotations(fixture("full_unit.json"));
    auto g = build_image_graph(docs[0]);
    CHECK(serialize_ntriples(g) == golden("full_unit.nt"));
    const auto& counts = testing::golden_counts();
    CHECK(g.size() == counts["full_unit_triples"].get<std::size_t>());

    // Counting oracle: 1 action + 1 age + 1 style + 3 colors (5 raw, 1 too far,
    // 1 duplicate) + 1 emotion + 1 presence + 3 objects (4 raw, 1 below 0.4).
    const std::size_t annotations = 1 + 1 + 1 + 3 + 1 + 1 + 3;
    auto ann_nodes = query_pattern(g, std::nullopt, Term::iri(std::string(vocab::kRdfType)), Term::iri(vocab::kAnnotation));
    CHECK(ann_nodes.size() == annotations);
    CHECK(annotations == counts["full_unit_annotations"].get<std::size_t>());
    // Colors carry no strength; every other annotation has one.
    CHECK(query_pattern(g, std::nullopt, Term::iri(vocab::kHasStrength)).size() == annotations - 3);
    const std::size_t annotation_triples = annotations * 6 + (annotations - 3);
    const std::size_t lexical_triples = annotations * 2;  // all labels distinct
    // Situations: type + model name + present literals. The three ViT units,
    // presence, caption and objects have all five literals; colors none;
    // emotion three.
    const std::size_t situation_triples = 6 * 7 + 2 + 5;
    // Image: type, concept, caption, captionGeneratedIn, 3 synsets, 2 frames.
    const std::size_t image_triples = 4 + 3 + 2;
    CHECK(g.size() == annotation_triples + lexical_triples + situation_triples + image_triples);
}

TEST_CASE("annotation invariants") {
    auto g = build_akg(load_annotations(fixture("synth100.json")));
    auto anns = query_pattern(g, std::nullopt, Term::iri(std::string(vocab::kRdfType)), Term::iri(vocab::kAnnotation));
    CHECK(!anns.empty());
    for (const auto& a : anns) {
        CHECK(query_pattern(g, a.subject, Term::iri(vocab::kIsAnnotationOf)).size() == 1);
        CHECK(query_pattern(g, a.subject, Term::iri(vocab::kGeneratedIn)).size() == 1);
        CHECK(query_pattern(g, a.subject, Term::iri(vocab::kTypedBy)).size() == 1);
    }
    for (const auto& t : query_pattern(g, std::nullopt, Term::iri(vocab::kHasStrength))) {
        double v = parse_double(t.object.value);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("missing situation metadata is an error") {
    auto docs = load_annotations(fixture("single_object.json"));
    docs[0].situations.clear();
    CHECK_THROWS_WITH_AS(build_image_graph(docs[0]), doctest::Contains("objects"), Error);
}

TEST_CASE("build_akg") {
    CHECK(build_akg({}) == tbox());
    CHECK(tbox().size() == testing::golden_counts()["tbox_triples"].get<std::size_t>());

    auto docs = load_annotations(fixture("single_object.json"));
    auto second = docs[0];
    second.image_id = "img_0009";
    auto g = build_akg({docs[0], second});
    auto sit = query_pattern(g, std::nullopt, Term::iri(std::string(vocab::kRdfType)), Term::iri(vocab::kImageAnnotationSituation));
    CHECK(sit.size() == 1);
    CHECK(g.size() == tbox().size() + 2 * build_image_graph(docs[0]).size() - 7 /* situation */ - 2 /* lexical entry */);

    CHECK_THROWS_WITH_AS(build_akg({docs[0], docs[0]}), doctest::Contains("img_0001"), Error);
}

TEST_CASE("build_akg on the 100-document corpus matches the counting oracle") {
    auto docs = load_annotations(fixture("synth100.json"));
    REQUIRE(docs.size() == 100);
    auto g = build_akg(docs);
    CHECK(g.size() == testing::golden_counts()["synth100_akg_triples"].get<std::size_t>());
    std::size_t per_image = 0;
    for (const auto& d : docs) per_image += build_image_graph(d).size();
    CHECK(g.size() <= per_image + tbox().size());
}

TEST_CASE("build_akg is independent of document order") {
    auto docs = load_annotations(fixture("synth100.json"));
    auto text = serialize_ntriples(build_akg(docs));
    std::mt19937_64 rng(2);
    std::shuffle(docs.begin(), docs.end(), rng);
    CHECK(serialize_ntriples(build_akg(docs)) == text);
}

TEST_CASE("contaminated fixture plants the expected number of leaking triples") {
    auto g = build_akg(load_annotations(fixture("contaminated.json")));
    const auto& counts = testing::golden_counts();
    CHECK(g.size() == counts["contaminated_triples"].get<std::size_t>());
    CHECK(filter_leakage(g).removed == counts["contaminated_planted"].get<std::size_t>());
    CHECK(without_tbox(g).size() == g.size() - tbox().size());
}
