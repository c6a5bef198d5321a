#include "artkg/ingest.hpp"

#include <cmath>
#include <set>

#include "artkg/error.hpp"
#include "artkg/util.hpp"
#include "artkg/vocab.hpp"

namespace artkg {

namespace data {
extern const std::string_view kCss3ColorsTsv;
extern const std::string_view kConceptAlignmentTsv;
}  // namespace data

using nlohmann::json;

const std::vector<std::string>& ps_units() {
    static const std::vector<std::string> units{"action",  "age_tier",       "art_style", "colors",
                                                "emotion", "human_presence", "caption",   "objects"};
    return units;
}

bool is_ac_label(std::string_view label) {
    const auto& labels = ac_labels();
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

namespace {

[[noreturn]] void schema_error(std::size_t index, const std::string& field, const std::string& what) {
    throw Error("document " + std::to_string(index) + ", field '" + field + "': " + what);
}

std::string get_string(const json& j, std::size_t index, const std::string& field, bool required = true) {
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) {
        if (required) schema_error(index, field, "missing");
        return {};
    }
    if (!it->is_string()) schema_error(index, field, "expected a string");
    return it->get<std::string>();
}

double get_score(const json& j, std::size_t index, const std::string& field) {
    auto it = j.find("score");
    if (it == j.end() || !it->is_number()) schema_error(index, field + ".score", "expected a number");
    double s = it->get<double>();
    if (!(s >= 0.0 && s <= 1.0)) schema_error(index, field + ".score", "score outside [0,1]");
    return s;
}

ScoredLabel get_scored(const json& j, std::size_t index, const std::string& field) {
    if (!j.is_object()) schema_error(index, field, "expected an object with label and score");
    ScoredLabel out;
    auto it = j.find("label");
    if (it == j.end() || !it->is_string()) schema_error(index, field + ".label", "expected a string");
    out.label = it->get<std::string>();
    if (out.label.empty()) schema_error(index, field + ".label", "empty label");
    out.score = get_score(j, index, field);
    return out;
}

std::vector<std::string> get_string_list(const json& d, std::size_t index, const std::string& field) {
    std::vector<std::string> out;
    auto it = d.find(field);
    if (it == d.end() || it->is_null()) return out;
    if (!it->is_array()) schema_error(index, "detections." + field, "expected an array of strings");
    for (const auto& v : *it) {
        if (!v.is_string() || v.get<std::string>().empty()) {
            schema_error(index, "detections." + field, "expected non-empty strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

AnnotationDoc doc_from_json(const json& j, std::size_t index) {
    if (!j.is_object()) schema_error(index, "<document>", "expected an object");
    AnnotationDoc doc;
    doc.image_id = get_string(j, index, "image_id");
    if (doc.image_id.empty()) schema_error(index, "image_id", "empty");
    doc.ac_label = get_string(j, index, "ac_label");
    if (!is_ac_label(doc.ac_label)) {
        std::string valid;
        for (const auto& l : ac_labels()) valid += (valid.empty() ? "" : ", ") + l;
        schema_error(index, "ac_label", "unknown label '" + doc.ac_label + "' (valid: " + valid + ")");
    }

    auto dit = j.find("detections");
    if (dit != j.end() && !dit->is_null()) {
        const json& d = *dit;
        if (!d.is_object()) schema_error(index, "detections", "expected an object");
        auto& det = doc.detections;
        for (const char* unit : {"action", "age_tier", "art_style", "emotion"}) {
            auto it = d.find(unit);
            if (it == d.end() || it->is_null()) continue;
            auto value = get_scored(*it, index, std::string("detections.") + unit);
            std::string u = unit;
            if (u == "action") det.action = value;
            else if (u == "age_tier") det.age_tier = value;
            else if (u == "art_style") det.art_style = value;
            else det.emotion = value;
        }
        if (auto it = d.find("colors"); it != d.end() && !it->is_null()) {
            if (!it->is_array()) schema_error(index, "detections.colors", "expected an array of [r,g,b]");
            for (const auto& c : *it) {
                if (!c.is_array() || c.size() != 3) schema_error(index, "detections.colors", "expected [r,g,b]");
                Rgb rgb{};
                for (std::size_t k = 0; k < 3; ++k) {
                    if (!c[k].is_number_integer()) schema_error(index, "detections.colors", "components must be integers");
                    auto v = c[k].get<long long>();
                    if (v < 0 || v > 255) schema_error(index, "detections.colors", "component outside [0,255]");
                    rgb[k] = static_cast<std::uint8_t>(v);
                }
                det.colors.push_back(rgb);
            }
        }
        if (auto it = d.find("human_presence"); it != d.end() && !it->is_null()) {
            if (!it->is_object()) schema_error(index, "detections.human_presence", "expected an object");
            auto v = it->find("value");
            if (v == it->end() || !v->is_boolean()) {
                schema_error(index, "detections.human_presence.value", "expected a boolean");
            }
            det.human_presence = HumanPresence{v->get<bool>(), get_score(*it, index, "detections.human_presence")};
        }
        if (auto it = d.find("caption"); it != d.end() && !it->is_null()) {
            if (!it->is_string()) schema_error(index, "detections.caption", "expected a string");
            det.caption = it->get<std::string>();
        }
        if (auto it = d.find("objects"); it != d.end() && !it->is_null()) {
            if (!it->is_array()) schema_error(index, "detections.objects", "expected an array");
            for (const auto& o : *it) det.objects.push_back(get_scored(o, index, "detections.objects"));
        }
        det.synsets = get_string_list(d, index, "synsets");
        det.frames = get_string_list(d, index, "frames");
    }

    if (auto sit = j.find("situations"); sit != j.end() && !sit->is_null()) {
        if (!sit->is_object()) schema_error(index, "situations", "expected an object keyed by unit");
        for (const auto& [unit, s] : sit->items()) {
            const auto& units = ps_units();
            if (std::find(units.begin(), units.end(), unit) == units.end()) {
                schema_error(index, "situations." + unit, "unknown unit");
            }
            if (!s.is_object()) schema_error(index, "situations." + unit, "expected an object");
            std::string prefix = "situations." + unit + ".";
            SituationInfo info;
            info.model_name = get_string(s, index, "model_name");
            if (info.model_name.empty()) schema_error(index, prefix + "model_name", "empty");
            info.backbone = get_string(s, index, "backbone", false);
            info.dataset = get_string(s, index, "dataset", false);
            info.timestamp = get_string(s, index, "timestamp", false);
            info.location = get_string(s, index, "location", false);
            info.annotator_id = get_string(s, index, "annotator_id", false);
            doc.situations.emplace(unit, std::move(info));
        }
    }
    return doc;
}

json doc_to_json(const AnnotationDoc& doc) {
    json d = json::object();
    const auto& det = doc.detections;
    auto scored = [](const ScoredLabel& s) { return json{{"label", s.label}, {"score", s.score}}; };
    if (det.action) d["action"] = scored(*det.action);
    if (det.age_tier) d["age_tier"] = scored(*det.age_tier);
    if (det.art_style) d["art_style"] = scored(*det.art_style);
    if (!det.colors.empty()) {
        json colors = json::array();
        for (const auto& c : det.colors) colors.push_back({c[0], c[1], c[2]});
        d["colors"] = colors;
    }
    if (det.emotion) d["emotion"] = scored(*det.emotion);
    if (det.human_presence) d["human_presence"] = {{"value", det.human_presence->present}, {"score", det.human_presence->score}};
    if (det.caption) d["caption"] = *det.caption;
    if (!det.objects.empty()) {
        json objects = json::array();
        for (const auto& o : det.objects) objects.push_back(scored(o));
        d["objects"] = objects;
    }
    if (!det.synsets.empty()) d["synsets"] = det.synsets;
    if (!det.frames.empty()) d["frames"] = det.frames;

    json sits = json::object();
    for (const auto& [unit, s] : doc.situations) {
        sits[unit] = {{"model_name", s.model_name}, {"backbone", s.backbone}, {"dataset", s.dataset},
                      {"timestamp", s.timestamp},   {"location", s.location}, {"annotator_id", s.annotator_id}};
    }
    return json{{"image_id", doc.image_id}, {"ac_label", doc.ac_label}, {"detections", d}, {"situations", sits}};
}

std::vector<AnnotationDoc> parse_annotations(std::string_view json_text, const std::string& source) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(source + ": invalid JSON: " + e.what());
    }
    if (!j.is_array()) throw Error(source + ": expected a JSON array of annotation documents");
    std::vector<AnnotationDoc> docs;
    docs.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            docs.push_back(doc_from_json(j[i], i));
        } catch (const json::exception& e) {
            throw Error(source + ": document " + std::to_string(i) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(source + ": " + e.what());
        }
    }
    return docs;
}

std::vector<AnnotationDoc> load_annotations(const std::string& path) {
    return parse_annotations(read_file(path), path);
}

std::string dump_annotations(const std::vector<AnnotationDoc>& docs) {
    json arr = json::array();
    for (const auto& d : docs) arr.push_back(doc_to_json(d));
    return arr.dump(1) + "\n";
}

// Colors and object thresholding

namespace {

std::vector<std::vector<std::string_view>> split_tsv(std::string_view text) {
    std::vector<std::vector<std::string_view>> rows;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string_view> cols;
        std::size_t c = 0;
        while (true) {
            std::size_t tab = line.find('\t', c);
            cols.push_back(line.substr(c, tab == std::string_view::npos ? std::string_view::npos : tab - c));
            if (tab == std::string_view::npos) break;
            c = tab + 1;
        }
        rows.push_back(std::move(cols));
    }
    return rows;
}

}  // namespace

Css3ColorTable::Css3ColorTable(std::vector<NamedColor> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw Error("color table is empty");
    std::set<std::string> names;
    for (const auto& e : entries_) {
        if (!names.insert(e.name).second) throw Error("duplicate color name: " + e.name);
    }
}

Css3ColorTable Css3ColorTable::parse_tsv(std::string_view text) {
    std::vector<NamedColor> entries;
    for (const auto& cols : split_tsv(text)) {
        if (cols.size() != 4) throw Error("color table rows need name, r, g, b");
        NamedColor c;
        c.name = std::string(cols[0]);
        for (std::size_t k = 0; k < 3; ++k) {
            double v = parse_double(cols[k + 1]);
            if (v < 0 || v > 255 || v != std::floor(v)) throw Error("bad color component for " + c.name);
            c.rgb[k] = static_cast<std::uint8_t>(v);
        }
        entries.push_back(std::move(c));
    }
    return Css3ColorTable(std::move(entries));
}

const Css3ColorTable& Css3ColorTable::builtin() {
    static const Css3ColorTable table = parse_tsv(data::kCss3ColorsTsv);
    return table;
}

std::optional<ColorMatch> nearest_css3_color(const Rgb& rgb, const Css3ColorTable& table) {
    const NamedColor* best = nullptr;
    int best_sq = 0;
    for (const auto& e : table.entries()) {
        int sq = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            int d = int(rgb[k]) - int(e.rgb[k]);
            sq += d * d;
        }
        if (!best || sq < best_sq || (sq == best_sq && e.name < best->name)) {
            best = &e;
            best_sq = sq;
        }
    }
    // Compare squared integers so the boundary is exact.
    if (best_sq >= 2500) return std::nullopt;
    return ColorMatch{best->name, std::sqrt(static_cast<double>(best_sq))};
}

std::vector<ScoredLabel> filter_objects(const std::vector<ScoredLabel>& objects) {
    std::vector<ScoredLabel> out;
    for (const auto& o : objects) {
        if (o.score >= kObjectScoreThreshold) out.push_back(o);
    }
    return out;
}

std::vector<std::string> snap_colors(const std::vector<Rgb>& colors, const Css3ColorTable& table) {
    std::vector<std::string> names;
    for (const auto& c : colors) {
        auto m = nearest_css3_color(c, table);
        if (m && std::find(names.begin(), names.end(), m->name) == names.end()) names.push_back(m->name);
    }
    return names;
}

// Concept alignment

ConceptAlignment ConceptAlignment::parse_tsv(std::string_view text) {
    ConceptAlignment a;
    for (const auto& cols : split_tsv(text)) {
        if (cols.size() != 3) throw Error("alignment rows need unit, label, iri");
        std::string iri(cols[2]);
        if (!is_valid_iri(iri)) throw Error("bad alignment IRI: " + iri);
        a.table_[{std::string(cols[0]), std::string(cols[1])}] = std::move(iri);
    }
    return a;
}

const ConceptAlignment& ConceptAlignment::builtin() {
    static const ConceptAlignment table = parse_tsv(data::kConceptAlignmentTsv);
    return table;
}

std::string ConceptAlignment::concept_iri(const std::string& unit, const std::string& label) const {
    auto it = table_.find({unit, label});
    if (it != table_.end()) return it->second;
    return vocab::base("unaligned/" + slugify(label));
}

bool ConceptAlignment::contains(const std::string& unit, const std::string& label) const {
    return table_.contains({unit, label});
}

std::vector<std::string> ConceptAlignment::labels(const std::string& unit) const {
    std::vector<std::string> out;
    for (const auto& [key, iri] : table_) {
        if (key.first == unit) out.push_back(key.second);
    }
    return out;
}

// IRIs

std::string slugify(std::string_view label) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : label) {
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.') {
            out += static_cast<char>(c);
        } else if (c == ' ' || c == '-') {
            out += '_';
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 0xf];
        }
    }
    return out;
}

std::string iri_escape(std::string_view id) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : id) {
        bool unreserved = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                          c == '.' || c == '-' || c == '~';
        if (unreserved) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 0xf];
        }
    }
    return out;
}

std::string image_iri(std::string_view image_id) { return vocab::base("image/" + iri_escape(image_id)); }

std::string annotation_iri(std::string_view image_id, std::string_view unit, std::size_t ordinal) {
    return vocab::base("annotation/" + iri_escape(image_id) + "/" + std::string(unit) + "/" + std::to_string(ordinal));
}

std::string situation_iri(std::string_view unit, const SituationInfo& info) {
    std::string key;
    for (const auto* f : {&info.model_name, &info.backbone, &info.dataset, &info.timestamp, &info.location,
                          &info.annotator_id}) {
        key += *f;
        key += '\x1f';
    }
    return vocab::base("situation/" + std::string(unit) + "_" + hex64(fnv1a64(key)));
}

std::string lexical_entry_iri(std::string_view label) { return vocab::base("lexical_entry/" + slugify(label)); }
std::string role_iri(std::string_view unit) { return vocab::base("role/" + std::string(unit)); }
std::string ac_iri(std::string_view label) { return vocab::base("ac/" + slugify(label)); }
std::string synset_iri(std::string_view synset_id) { return std::string(vocab::kWordNet) + iri_escape(synset_id); }
std::string frame_iri(std::string_view frame_id) { return std::string(vocab::kFrame) + iri_escape(frame_id); }

// Graph construction

namespace {

Term iri(std::string_view v) { return Term::iri(std::string(v)); }

Term score_literal(double score) { return Term::literal(format_double(score), std::string(vocab::kXsdDouble)); }

class ImageGraphBuilder {
public:
    ImageGraphBuilder(const AnnotationDoc& doc, const ConceptAlignment& alignment, Graph& g)
        : doc_(doc), alignment_(alignment), g_(g), image_(iri(image_iri(doc.image_id))) {}

    void build() {
        g_.add(image_, iri(vocab::kRdfType), iri(vocab::kImage));
        g_.add(image_, iri(vocab::kHasAbstractConcept), iri(ac_iri(doc_.ac_label)));

        const auto& det = doc_.detections;
        if (det.action) annotate("action", 0, det.action->label, det.action->score);
        if (det.age_tier) annotate("age_tier", 0, det.age_tier->label, det.age_tier->score);
        if (det.art_style) annotate("art_style", 0, det.art_style->label, det.art_style->score);
        if (!det.colors.empty()) {
            require_situation("colors");
            auto names = snap_colors(det.colors);
            for (std::size_t i = 0; i < names.size(); ++i) annotate("colors", i, names[i], std::nullopt);
        }
        if (det.emotion) annotate("emotion", 0, det.emotion->label, det.emotion->score);
        if (det.human_presence) {
            annotate("human_presence", 0, det.human_presence->present ? "person" : "no_person",
                     det.human_presence->score);
        }
        if (!det.objects.empty()) {
            require_situation("objects");
            auto kept = filter_objects(det.objects);
            for (std::size_t i = 0; i < kept.size(); ++i) annotate("objects", i, kept[i].label, kept[i].score);
        }
        if (det.caption) {
            g_.add(image_, iri(vocab::kHasCaption), Term::literal(*det.caption));
            if (auto it = doc_.situations.find("caption"); it != doc_.situations.end()) {
                g_.add(image_, iri(vocab::kCaptionGeneratedIn), situation("caption", it->second));
            }
        }
        for (const auto& s : det.synsets) g_.add(image_, iri(vocab::kTypedBy), iri(synset_iri(s)));
        for (const auto& f : det.frames) g_.add(image_, iri(vocab::kTypedBy), iri(frame_iri(f)));
    }

private:
    const SituationInfo& require_situation(const std::string& unit) {
        auto it = doc_.situations.find(unit);
        if (it == doc_.situations.end()) {
            throw Error("image '" + doc_.image_id + "': missing situation metadata for unit '" + unit + "'");
        }
        return it->second;
    }

    Term situation(const std::string& unit, const SituationInfo& info) {
        Term node = iri(situation_iri(unit, info));
        g_.add(node, iri(vocab::kRdfType), iri(vocab::kImageAnnotationSituation));
        g_.add(node, iri(vocab::kModelName), Term::literal(info.model_name));
        auto literal = [&](const std::string& pred, const std::string& value) {
            if (!value.empty()) g_.add(node, iri(pred), Term::literal(value));
        };
        literal(vocab::kBackbone, info.backbone);
        literal(vocab::kDataset, info.dataset);
        literal(vocab::kTimestamp, info.timestamp);
        literal(vocab::kLocation, info.location);
        literal(vocab::kAnnotator, info.annotator_id);
        return node;
    }

    void annotate(const std::string& unit, std::size_t ordinal, const std::string& label,
                  std::optional<double> strength) {
        Term sit = situation(unit, require_situation(unit));
        Term ann = iri(annotation_iri(doc_.image_id, unit, ordinal));
        Term lex = iri(lexical_entry_iri(label));
        g_.add(ann, iri(vocab::kRdfType), iri(vocab::kAnnotation));
        g_.add(ann, iri(vocab::kIsAnnotationOf), image_);
        g_.add(ann, iri(vocab::kGeneratedIn), sit);
        g_.add(ann, iri(vocab::kUsesLexicalEntry), lex);
        if (strength) g_.add(ann, iri(vocab::kHasStrength), score_literal(*strength));
        g_.add(ann, iri(vocab::kHasRole), iri(role_iri(unit)));
        g_.add(ann, iri(vocab::kTypedBy), iri(alignment_.concept_iri(unit, label)));
        g_.add(lex, iri(vocab::kRdfType), iri(vocab::kLexicalEntry));
        g_.add(lex, iri(vocab::kRdfsLabel), Term::literal(label));
    }

    const AnnotationDoc& doc_;
    const ConceptAlignment& alignment_;
    Graph& g_;
    Term image_;
};

}  // namespace

Graph tbox() {
    Graph g;
    const Term type = iri(vocab::kRdfType);
    for (const auto* cls : {&vocab::kAnnotation, &vocab::kImage, &vocab::kAnnotationSituation,
                            &vocab::kImageAnnotationSituation, &vocab::kLexicalEntry, &vocab::kAnnotationRole}) {
        g.add(iri(*cls), type, iri(vocab::kOwlClass));
    }
    g.add(iri(vocab::kImageAnnotationSituation), iri(vocab::kRdfsSubClassOf), iri(vocab::kAnnotationSituation));
    for (const auto* p : {&vocab::kIsAnnotationOf, &vocab::kGeneratedIn, &vocab::kUsesLexicalEntry, &vocab::kHasRole,
                          &vocab::kTypedBy, &vocab::kCaptionGeneratedIn}) {
        g.add(iri(*p), type, iri(vocab::kOwlObjectProperty));
    }
    for (const auto* p : {&vocab::kHasStrength, &vocab::kHasCaption, &vocab::kModelName, &vocab::kBackbone,
                          &vocab::kDataset, &vocab::kTimestamp, &vocab::kLocation, &vocab::kAnnotator}) {
        g.add(iri(*p), type, iri(vocab::kOwlDatatypeProperty));
    }
    for (const auto& unit : ps_units()) {
        if (unit == "caption") continue;
        g.add(iri(role_iri(unit)), type, iri(vocab::kAnnotationRole));
        g.add(iri(role_iri(unit)), iri(vocab::kRdfsLabel), Term::literal(unit));
    }
    return g;
}

Graph build_image_graph(const AnnotationDoc& doc, const ConceptAlignment& alignment) {
    Graph g;
    ImageGraphBuilder(doc, alignment, g).build();
    return g;
}

Graph build_akg(const std::vector<AnnotationDoc>& docs, const ConceptAlignment& alignment) {
    std::set<std::string> seen;
    for (const auto& d : docs) {
        if (!seen.insert(d.image_id).second) throw Error("duplicate image_id: " + d.image_id);
    }
    Graph g = tbox();
    for (const auto& d : docs) g.merge(build_image_graph(d, alignment));
    return g;
}

}  // namespace artkg
