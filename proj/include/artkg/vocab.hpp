#pragma once

#include <string>
#include <string_view>

// IRIs used by the generated graph.
namespace artkg::vocab {

inline constexpr std::string_view kBase = "https://w3id.org/artkg";
inline constexpr std::string_view kSituAnnotate = "https://w3id.org/situannotate#";
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";
inline constexpr std::string_view kRdfsSubClassOf = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
inline constexpr std::string_view kOwlClass = "http://www.w3.org/2002/07/owl#Class";
inline constexpr std::string_view kOwlObjectProperty = "http://www.w3.org/2002/07/owl#ObjectProperty";
inline constexpr std::string_view kOwlDatatypeProperty = "http://www.w3.org/2002/07/owl#DatatypeProperty";
inline constexpr std::string_view kXsdDouble = "http://www.w3.org/2001/XMLSchema#double";
inline constexpr std::string_view kXsdString = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr std::string_view kWordNet = "https://w3id.org/framester/wn/wn30/instances/synset-";
inline constexpr std::string_view kFrame = "https://w3id.org/framester/framenet/abox/frame/";

inline std::string sa(std::string_view local) { return std::string(kSituAnnotate) + std::string(local); }
inline std::string base(std::string_view path) { return std::string(kBase) + "/" + std::string(path); }

// Classes
inline const std::string kAnnotation = sa("Annotation");
inline const std::string kImage = sa("Image");
inline const std::string kAnnotationSituation = sa("AnnotationSituation");
inline const std::string kImageAnnotationSituation = sa("ImageAnnotationSituation");
inline const std::string kLexicalEntry = sa("LexicalEntry");
inline const std::string kAnnotationRole = sa("AnnotationRole");

// Annotation edges
inline const std::string kIsAnnotationOf = sa("isAnnotationOf");
inline const std::string kGeneratedIn = sa("generatedIn");
inline const std::string kUsesLexicalEntry = sa("usesLexicalEntry");
inline const std::string kHasStrength = sa("hasStrength");
inline const std::string kHasRole = sa("hasRole");
inline const std::string kTypedBy = sa("typedBy");

// Image and situation edges
inline const std::string kHasCaption = sa("hasCaption");
inline const std::string kCaptionGeneratedIn = sa("captionGeneratedIn");
inline const std::string kHasAbstractConcept = base("vocab/hasAbstractConcept");
inline const std::string kModelName = sa("hasModelName");
inline const std::string kBackbone = sa("hasBackbone");
inline const std::string kDataset = sa("hasDataset");
inline const std::string kTimestamp = sa("atTime");
inline const std::string kLocation = sa("atLocation");
inline const std::string kAnnotator = sa("hasAnnotator");

}  // namespace artkg::vocab
