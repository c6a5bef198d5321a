#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "artkg/graph.hpp"

namespace artkg {

using Rgb = std::array<std::uint8_t, 3>;

struct ScoredLabel {
    std::string label;
    double score = 0.0;

    bool operator==(const ScoredLabel&) const = default;
};

struct HumanPresence {
    bool present = false;
    double score = 0.0;

    bool operator==(const HumanPresence&) const = default;
};

/// Context of one detector run: who or what produced a unit's labels.
struct SituationInfo {
    std::string model_name;
    std::string backbone;
    std::string dataset;
    std::string timestamp;
    std::string location;
    std::string annotator_id;

    bool operator==(const SituationInfo&) const = default;
};

struct Detections {
    std::optional<ScoredLabel> action;
    std::optional<ScoredLabel> age_tier;
    std::optional<ScoredLabel> art_style;
    std::vector<Rgb> colors;
    std::optional<ScoredLabel> emotion;
    std::optional<HumanPresence> human_presence;
    std::optional<std::string> caption;
    std::vector<ScoredLabel> objects;
    std::vector<std::string> synsets;
    std::vector<std::string> frames;

    bool operator==(const Detections&) const = default;
};

/// One image's detector output, the ingestion contract.
struct AnnotationDoc {
    std::string image_id;
    std::string ac_label;
    Detections detections;
    std::map<std::string, SituationInfo> situations;  // keyed by unit name

    bool operator==(const AnnotationDoc&) const = default;
};

/// Unit names in document order.
const std::vector<std::string>& ps_units();

bool is_ac_label(std::string_view label);

/// Validates and converts a JSON document; `index` is used in error text.
AnnotationDoc doc_from_json(const nlohmann::json& j, std::size_t index = 0);
nlohmann::json doc_to_json(const AnnotationDoc& doc);

std::vector<AnnotationDoc> parse_annotations(std::string_view json_text, const std::string& source = "<input>");
std::vector<AnnotationDoc> load_annotations(const std::string& path);
std::string dump_annotations(const std::vector<AnnotationDoc>& docs);

struct NamedColor {
    std::string name;
    Rgb rgb{};
};

class Css3ColorTable {
public:
    explicit Css3ColorTable(std::vector<NamedColor> entries);

    /// The 147 extended CSS3 color names shipped with the library.
    static const Css3ColorTable& builtin();
    static Css3ColorTable parse_tsv(std::string_view text);

    const std::vector<NamedColor>& entries() const noexcept { return entries_; }

private:
    std::vector<NamedColor> entries_;
};

struct ColorMatch {
    std::string name;
    double distance = 0.0;
};

inline constexpr double kColorDiscardDistance = 50.0;
inline constexpr double kObjectScoreThreshold = 0.4;

/// Closest table color by Euclidean RGB distance, or nothing when that
/// distance is 50 or more. Ties go to the lexicographically smaller name.
std::optional<ColorMatch> nearest_css3_color(const Rgb& rgb, const Css3ColorTable& table = Css3ColorTable::builtin());

/// Keeps objects scoring at least 0.4, in input order.
std::vector<ScoredLabel> filter_objects(const std::vector<ScoredLabel>& objects);

/// Snapped color names, first occurrence wins when several snap to one name.
std::vector<std::string> snap_colors(const std::vector<Rgb>& colors, const Css3ColorTable& table = Css3ColorTable::builtin());

/// Label -> ConceptNet IRI table per detector unit.
class ConceptAlignment {
public:
    static const ConceptAlignment& builtin();
    static ConceptAlignment parse_tsv(std::string_view text);

    /// Aligned IRI, or `{base}/unaligned/{label}` when the label is unknown.
    std::string concept_iri(const std::string& unit, const std::string& label) const;
    bool contains(const std::string& unit, const std::string& label) const;
    std::vector<std::string> labels(const std::string& unit) const;

private:
    std::map<std::pair<std::string, std::string>, std::string> table_;
};

/// Lowercases, maps spaces and '-' to '_', percent-encodes anything outside [a-z0-9_.].
std::string slugify(std::string_view label);

/// Percent-encodes everything outside the RFC 3986 unreserved set; case is kept.
std::string iri_escape(std::string_view id);

std::string image_iri(std::string_view image_id);
std::string annotation_iri(std::string_view image_id, std::string_view unit, std::size_t ordinal);
std::string situation_iri(std::string_view unit, const SituationInfo& info);
std::string lexical_entry_iri(std::string_view label);
std::string role_iri(std::string_view unit);
std::string ac_iri(std::string_view label);
std::string synset_iri(std::string_view synset_id);
std::string frame_iri(std::string_view frame_id);

/// Classes, properties and role nodes shared by every image.
Graph tbox();

/// Reifies one document. Colors are snapped and objects thresholded here,
/// so callers pass raw detector output.
Graph build_image_graph(const AnnotationDoc& doc, const ConceptAlignment& alignment = ConceptAlignment::builtin());

/// T-Box plus the union of every image graph. Rejects duplicate image ids.
Graph build_akg(const std::vector<AnnotationDoc>& docs, const ConceptAlignment& alignment = ConceptAlignment::builtin());

}  // namespace artkg
