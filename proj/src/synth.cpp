#include "artkg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "artkg/error.hpp"
#include "artkg/util.hpp"

namespace artkg {

namespace {

const std::vector<std::string> kActions{"calling", "clapping", "cycling", "dancing", "drinking", "eating",
                                        "fighting", "hugging", "laughing", "listening_to_music", "running",
                                        "sitting", "sleeping", "texting", "using_laptop", "swimming", "reading",
                                        "walking"};
const std::vector<std::string> kAgeTiers{"0-2", "3-9", "10-19", "20-29", "30-39", "40-49", "50-59", "60-69",
                                         "more than 70"};
const std::vector<std::string> kArtStyles{"art_nouveau", "baroque",     "expressionism", "impressionism",
                                          "post_impressionism", "realism", "renaissance", "romanticism",
                                          "surrealism", "ukiyo_e"};
const std::vector<std::string> kEmotions{"amusement", "awe",     "contentment", "excitement",
                                         "anger",     "disgust", "fear",        "sadness"};
const std::vector<std::string> kObjects{
    "bicycle", "car", "boat", "bench", "bird", "cat", "dog", "horse", "sheep", "cow", "elephant", "bear",
    "umbrella", "kite", "bottle", "wine_glass", "cup", "bowl", "banana", "apple", "cake", "chair", "couch",
    "potted_plant", "bed", "dining_table", "tv", "laptop", "book", "clock", "vase", "teddy_bear", "grass",
    "tree", "flag", "statue", "field", "sky", "water", "knife", "train", "truck", "airplane", "surfboard"};
const std::vector<std::string> kFrames{"Ingestion", "Self_motion", "Hostile_encounter", "Leadership", "Attaching",
                                       "Protecting", "Residence", "Education_teaching", "Competition",
                                       "Travel", "Cause_harm", "Sleep"};
const std::vector<std::string> kColorNames{"black", "white", "red", "green", "blue", "yellow", "orange",
                                           "purple", "gray", "brown", "pink", "navy", "olive", "teal"};

const std::string kTimestamp = "2023-06-01T00:00:00Z";

std::map<std::string, SituationInfo> standard_situations() {
    auto s = [](std::string model, std::string backbone, std::string dataset) {
        return SituationInfo{std::move(model), std::move(backbone), std::move(dataset), kTimestamp, "desk", "synthkit"};
    };
    return {{"action", s("har-vit", "ViT", "HAR")},
            {"age_tier", s("age-vit", "ViT", "FairFace")},
            {"art_style", s("artstyle-vit", "ViT", "ArtBench-10")},
            {"colors", s("colorthief", "ColorThief", "none")},
            {"emotion", s("artemis-clf", "ResNet", "ArtEmis")},
            {"human_presence", s("presence-vit", "ViT", "DeepFashion")},
            {"caption", s("blip-large", "BLIP", "COCO")},
            {"objects", s("detr-resnet-50", "DETR", "COCO")}};
}

Rgb color_rgb(const std::string& name) {
    for (const auto& e : Css3ColorTable::builtin().entries()) {
        if (e.name == name) return e.rgb;
    }
    throw Error("no CSS3 color named " + name);
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
    std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
    return v[d(rng)];
}

}  // namespace

const std::vector<ClassSignature>& class_signatures() {
    static const std::vector<ClassSignature> sigs = [] {
        std::vector<ClassSignature> out;
        for (std::size_t c = 0; c < 7; ++c) {
            ClassSignature s;
            s.action = kActions[c * 2];
            s.art_style = kArtStyles[c];
            s.emotion = kEmotions[c];
            s.objects = {kObjects[c * 3], kObjects[c * 3 + 1]};
            s.color = kColorNames[c];
            s.synset = kObjects[c * 3 + 2] + ".n.01";
            s.frame = kFrames[c];
            out.push_back(std::move(s));
        }
        return out;
    }();
    return sigs;
}

std::vector<AnnotationDoc> gen_annotations(const SynthDocOptions& o) {
    if (o.n_images < 7) throw Error("synthetic corpus needs at least 7 images");
    if (!(o.class_signal >= 0.0 && o.class_signal <= 1.0)) throw Error("class_signal must lie in [0,1]");
    const auto& classes = ac_labels();
    const auto& sigs = class_signatures();
    const auto situations = standard_situations();
    Rng rng(derive_seed(o.seed, "synth-docs"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<AnnotationDoc> docs;
    docs.reserve(o.n_images);
    for (std::size_t i = 0; i < o.n_images; ++i) {
        const std::size_t c = i % classes.size();
        const bool has_signal = o.signal_classes.empty() || o.signal_classes.contains(c);
        const auto& sig = sigs[c];
        auto planted = [&] { return has_signal && unit(rng) < o.class_signal; };
        auto score = [&](double lo) { return lo + (1.0 - lo) * unit(rng); };

        AnnotationDoc d;
        char id[32];
        std::snprintf(id, sizeof id, "img_%05zu", i);
        d.image_id = id;
        d.ac_label = classes[c];
        auto& det = d.detections;
        det.action = ScoredLabel{planted() ? sig.action : pick(kActions, rng), score(0.3)};
        det.age_tier = ScoredLabel{pick(kAgeTiers, rng), score(0.3)};
        det.art_style = ScoredLabel{planted() ? sig.art_style : pick(kArtStyles, rng), score(0.3)};
        det.emotion = ScoredLabel{planted() ? sig.emotion : pick(kEmotions, rng), score(0.3)};
        det.human_presence = HumanPresence{unit(rng) < 0.5, score(0.5)};

        // Planted objects always clear the 0.4 threshold; noise objects may not.
        for (const auto& obj : sig.objects) {
            if (planted()) det.objects.push_back({obj, score(0.5)});
            else det.objects.push_back({pick(kObjects, rng), score(0.2)});
        }
        det.objects.push_back({pick(kObjects, rng), score(0.2)});

        std::uniform_int_distribution<int> jitter(-6, 6);
        auto jittered = [&](const std::string& name) {
            Rgb base = color_rgb(name), out = base;
            for (auto& ch : out) ch = static_cast<std::uint8_t>(std::clamp(int(ch) + jitter(rng), 0, 255));
            auto snapped = nearest_css3_color(out);
            return snapped && snapped->name == name ? out : base;
        };
        det.colors.push_back(jittered(planted() ? sig.color : pick(kColorNames, rng)));
        std::uniform_int_distribution<int> byte(0, 255);
        det.colors.push_back(Rgb{std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))});

        // Captions mention every detected object and the action; their
        // synsets stand in for what a frame extractor would return.
        std::string caption = "a " + det.art_style->label + " picture of";
        for (std::size_t k = 0; k < det.objects.size(); ++k) {
            caption += (k == 0 ? " a " : (k + 1 == det.objects.size() ? " and a " : ", a ")) + det.objects[k].label;
            det.synsets.push_back(det.objects[k].label + ".n.01");
        }
        caption += ", " + det.action->label;
        det.caption = caption;
        det.synsets.push_back(det.action->label + ".v.01");
        det.synsets.push_back(planted() ? sig.synset : pick(kObjects, rng) + ".n.01");
        det.frames.push_back(planted() ? sig.frame : pick(kFrames, rng));
        d.situations = situations;
        docs.push_back(std::move(d));
    }
    return docs;
}

std::vector<AnnotationDoc> gen_annotations(std::size_t n_images, std::uint64_t seed, double class_signal) {
    return gen_annotations(SynthDocOptions{n_images, seed, class_signal, {}});
}

EmbeddingStore gen_cv_store(const std::vector<AnnotationDoc>& docs, const SynthCvOptions& o) {
    if (o.dim < 7) throw Error("synthetic CV vectors need dim >= 7");
    if (!(o.modality_signal >= 0.0 && o.modality_signal <= 1.0)) throw Error("modality_signal must lie in [0,1]");
    const auto& classes = ac_labels();
    Rng rng(derive_seed(o.seed, "synth-cv"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    EmbeddingStore store(o.dim, Provenance::CvAbsolute);
    std::vector<double> noise(o.dim), v(o.dim);
    for (const auto& d : docs) {
        auto it = std::find(classes.begin(), classes.end(), d.ac_label);
        const auto c = static_cast<std::size_t>(it - classes.begin());
        const bool has_signal = o.signal_classes.empty() || o.signal_classes.contains(c);
        const double s = has_signal ? o.modality_signal : 0.0;
        double sq = 0.0;
        for (double& x : noise) {
            x = gauss(rng);
            sq += x * x;
        }
        const double inv = 1.0 / std::sqrt(sq);
        for (std::size_t k = 0; k < o.dim; ++k) v[k] = (1.0 - s) * noise[k] * inv + (k == c ? s : 0.0);
        double vn = 0.0;
        for (double x : v) vn += x * x;
        vn = std::sqrt(vn);
        for (double& x : v) x /= vn;
        store.add(d.image_id, v);
    }
    return store;
}

EmbeddingStore gen_cv_store(const std::vector<AnnotationDoc>& docs, std::size_t dim, std::uint64_t seed,
                            double modality_signal) {
    return gen_cv_store(docs, SynthCvOptions{dim, seed, modality_signal, {}});
}

std::map<std::string, std::string> labels_of(const std::vector<AnnotationDoc>& docs) {
    std::map<std::string, std::string> out;
    for (const auto& d : docs) out[d.image_id] = d.ac_label;
    return out;
}

}  // namespace artkg
