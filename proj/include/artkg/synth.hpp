#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "artkg/ingest.hpp"
#include "artkg/store.hpp"

namespace artkg {

/// Planted perceptual concepts for one class.
struct ClassSignature {
    std::string action;
    std::string art_style;
    std::string emotion;
    std::vector<std::string> objects;
    std::string color;
    std::string synset;
    std::string frame;
};

/// Signatures for the seven classes, in class order. Disjoint across classes.
const std::vector<ClassSignature>& class_signatures();

struct SynthDocOptions {
    std::size_t n_images = 700;
    std::uint64_t seed = 0;
    /// Probability that a unit carries its class signature instead of noise.
    double class_signal = 1.0;
    /// Class indices (0-based, alphabetical) that receive signal; empty means all.
    std::set<std::size_t> signal_classes;
};

/// Balanced corpus: image i gets class i mod 7.
std::vector<AnnotationDoc> gen_annotations(const SynthDocOptions& options);
std::vector<AnnotationDoc> gen_annotations(std::size_t n_images, std::uint64_t seed, double class_signal);

struct SynthCvOptions {
    std::size_t dim = 64;
    std::uint64_t seed = 0;
    /// Weight of the class centroid against unit Gaussian noise.
    double modality_signal = 0.5;
    std::set<std::size_t> signal_classes;
};

/// Unit vectors s * e_class + (1 - s) * noise, with orthogonal centroids e_class.
EmbeddingStore gen_cv_store(const std::vector<AnnotationDoc>& docs, const SynthCvOptions& options);
EmbeddingStore gen_cv_store(const std::vector<AnnotationDoc>& docs, std::size_t dim, std::uint64_t seed,
                            double modality_signal);

std::map<std::string, std::string> labels_of(const std::vector<AnnotationDoc>& docs);

}  // namespace artkg
