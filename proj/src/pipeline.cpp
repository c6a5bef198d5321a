#include "artkg/pipeline.hpp"

#include "artkg/error.hpp"
#include "artkg/fusion.hpp"
#include "artkg/ingest.hpp"
#include "artkg/relative.hpp"
#include "artkg/synth.hpp"

namespace artkg {

AblationConfig ablation_config_from_json(const nlohmann::json& j) {
    AblationConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.n_images = j.value("n_images", c.n_images);
        c.class_signal = j.value("class_signal", c.class_signal);
        c.modality_signal = j.value("modality_signal", c.modality_signal);
        c.kg_signal_classes = j.value("kg_signal_classes", c.kg_signal_classes);
        c.cv_signal_classes = j.value("cv_signal_classes", c.cv_signal_classes);
        c.cv_dim = j.value("cv_dim", c.cv_dim);
        c.anchors_per_class = j.value("anchors_per_class", c.anchors_per_class);
        c.threads = j.value("threads", c.threads);
        if (j.contains("kge")) c.kge = kge_config_from_json(j["kge"]);
        if (j.contains("mlp")) c.mlp = mlp_config_from_json(j["mlp"]);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("ablation config: ") + e.what());
    }
    return c;
}

nlohmann::json to_json(const AblationConfig& c) {
    return {{"seed", c.seed},
            {"n_images", c.n_images},
            {"class_signal", c.class_signal},
            {"modality_signal", c.modality_signal},
            {"kg_signal_classes", c.kg_signal_classes},
            {"cv_signal_classes", c.cv_signal_classes},
            {"cv_dim", c.cv_dim},
            {"anchors_per_class", c.anchors_per_class},
            {"threads", c.threads},
            {"kge", to_json(c.kge)},
            {"mlp", to_json(c.mlp)}};
}

std::vector<AblationRow> run_ablation(const AblationConfig& cfg, const LogSink& log) {
    auto note = [&](const std::string& s) {
        if (log) log(s);
    };
    const auto& classes = ac_labels();

    auto docs = gen_annotations(
        SynthDocOptions{cfg.n_images, derive_seed(cfg.seed, "synth"), cfg.class_signal, cfg.kg_signal_classes});
    auto labels = labels_of(docs);
    auto split = stratified_split(labels, derive_seed(cfg.seed, "split"));

    auto filtered = filter_leakage(build_akg(docs));
    note("graph: " + std::to_string(filtered.graph.size()) + " triples after removing " +
         std::to_string(filtered.removed) + " leaking triples");

    KgeConfig kcfg = cfg.kge;
    kcfg.seed = derive_seed(cfg.seed, "kge");
    auto model = train_kge(filtered.graph, kcfg, [&](std::size_t epoch, double loss) {
        if ((epoch + 1) % 25 == 0) note("kge epoch " + std::to_string(epoch + 1) + " loss " + format_double(loss));
    });

    std::vector<std::string> ids;
    for (const auto& d : docs) ids.push_back(d.image_id);
    auto kge_abs = image_embeddings(model, ids, image_iri);
    auto cv_abs = gen_cv_store(docs, SynthCvOptions{cfg.cv_dim, derive_seed(cfg.seed, "cv"), cfg.modality_signal,
                                                    cfg.cv_signal_classes});

    std::vector<std::string> train_ids;
    for (const auto& [id, s] : split) {
        if (s == Split::Train) train_ids.push_back(id);
    }
    auto anchors = select_anchors(train_ids, labels, cfg.anchors_per_class, derive_seed(cfg.seed, "anchors"), classes);
    auto kge_rel = relativize(kge_abs, anchors, kge_abs, cfg.threads);
    auto cv_rel = relativize(cv_abs, anchors, cv_abs, cfg.threads);

    struct Variant {
        std::string name;
        std::string paradigm;
        EmbeddingStore store;
    };
    std::vector<Variant> variants;
    variants.push_back({"Absolute KGE", "SPK", kge_abs});
    variants.push_back({"Absolute CV", "DL", cv_abs});
    variants.push_back({"Absolute KGE || Absolute CV", "Hybrid", fuse(kge_abs, cv_abs, FusionKind::Concat)});
    variants.push_back({"Relative KGE", "SPK", kge_rel});
    variants.push_back({"Relative CV", "DL", cv_rel});
    variants.push_back({"Relative KGE ⊙ Relative CV", "Hybrid", fuse(kge_rel, cv_rel, FusionKind::Hadamard)});
    variants.push_back({"Relative KGE || Relative CV", "Hybrid", fuse(kge_rel, cv_rel, FusionKind::Concat)});

    std::vector<AblationRow> rows;
    for (auto& v : variants) {
        LabeledDataset ds{std::move(v.store), labels, split};
        MlpConfig mcfg = cfg.mlp;
        mcfg.in_dim = ds.store.dim();
        mcfg.seed = derive_seed(cfg.seed, "mlp");
        auto trained = train_classifier(ds, mcfg, classes);
        auto test_ids = ds.ids(Split::Test);
        std::map<std::string, std::string> preds, golds;
        for (auto& p : predict(trained.params, ds.store, test_ids, classes)) preds[p.id] = p.label;
        for (const auto& id : test_ids) golds[id] = labels.at(id);
        double f1 = macro_f1(preds, golds, classes);
        note(v.name + ": macro F1 " + format_double(f1));
        rows.push_back({v.name, f1, v.paradigm});
    }
    return rows;
}

std::string ablation_to_csv(const std::vector<AblationRow>& rows) {
    std::string out = "input_embedding,macro_f1,paradigm\n";
    for (const auto& r : rows) out += "\"" + r.input_embedding + "\"," + format_double(r.macro_f1) + "," + r.paradigm + "\n";
    return out;
}

}  // namespace artkg
