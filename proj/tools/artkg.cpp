#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "artkg/classifier.hpp"
#include "artkg/error.hpp"
#include "artkg/fusion.hpp"
#include "artkg/graph.hpp"
#include "artkg/ingest.hpp"
#include "artkg/interpret.hpp"
#include "artkg/kge.hpp"
#include "artkg/pipeline.hpp"
#include "artkg/relative.hpp"
#include "artkg/store.hpp"
#include "artkg/synth.hpp"
#include "artkg/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace artkg;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    bool deterministic = false;
    std::size_t threads = 1;

    std::size_t worker_count() const { return deterministic ? 1 : std::max<std::size_t>(threads, 1); }
};

std::string content_hash(const std::string& path) { return hex64(fnv1a64(read_file(path))); }

/// Sidecar contents: command, seed, effective config and its hash, input hashes.
json run_meta(const std::string& command, const Globals& g, const json& config, const json& inputs) {
    return {{"command", command},
            {"seed", g.seed},
            {"config", config},
            {"config_hash", hex64(fnv1a64(config.dump()))},
            {"inputs", inputs}};
}

void write_artifact(const std::string& path, std::string_view contents, const json& meta) {
    write_file_atomic(path, contents);
    json side = meta;
    side["content_hash"] = hex64(fnv1a64(contents));
    write_file_atomic(sidecar_path(path), side.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(path + ": " + e.what());
    }
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::vector<std::string> out;
    std::stringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] != '#') out.push_back(line);
    }
    return out;
}

std::vector<std::string> train_ids_of(const std::map<std::string, Split>& split) {
    std::vector<std::string> ids;
    for (const auto& [id, s] : split) {
        if (s == Split::Train) ids.push_back(id);
    }
    return ids;
}

std::string resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? p : (base / path).string();
}

void print_scores(const std::vector<ClassScores>& scores, double macro) {
    std::printf("macro_f1 %s\n", format_double(macro).c_str());
    std::printf("%-10s %9s %9s %9s %8s\n", "label", "precision", "recall", "f1", "support");
    for (const auto& c : scores) {
        std::printf("%-10s %9.4f %9.4f %9.4f %8zu\n", c.label.c_str(), c.precision, c.recall, c.f1, c.support);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Abstract-concept image classification over a perceptual knowledge graph"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Global seed; every stage derives its own from it");
    app.add_flag("--deterministic", g.deterministic, "Single worker, bit-exact outputs");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

    std::function<void()> action;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Build the knowledge graph from annotation documents");
    std::string ingest_in, ingest_out;
    ingest->add_option("--in", ingest_in, "Annotation JSON array")->required();
    ingest->add_option("--out", ingest_out, "N-Triples output")->required();
    ingest->callback([&] {
        action = [&] {
            auto docs = load_annotations(ingest_in);
            auto graph = build_akg(docs);
            write_artifact(ingest_out, serialize_ntriples(graph),
                           run_meta("ingest", g, json::object(), {{"in", content_hash(ingest_in)}}));
            std::printf("documents %zu\ntriples %zu\n", docs.size(), graph.size());
        };
    });

    // filter
    auto* filter = app.add_subcommand("filter", "Remove triples mentioning target labels");
    std::string filter_in, filter_out, filter_labels;
    filter->add_option("--in", filter_in)->required();
    filter->add_option("--out", filter_out)->required();
    filter->add_option("--labels", filter_labels, "Comma-separated labels (default: the seven AC labels)");
    filter->callback([&] {
        action = [&] {
            auto labels = filter_labels.empty() ? ac_labels() : split_csv(filter_labels);
            if (labels.empty()) throw Error("filter: no labels given");
            auto result = filter_leakage(read_ntriples_file(filter_in), labels);
            write_artifact(filter_out, serialize_ntriples(result.graph),
                           run_meta("filter", g, {{"labels", labels}}, {{"in", content_hash(filter_in)}}));
            std::printf("removed_count %zu\n", result.removed);
        };
    });

    // train-kge
    auto* train_kge_cmd = app.add_subcommand("train-kge", "Train TransE embeddings");
    std::string kge_graph, kge_config, kge_out;
    train_kge_cmd->add_option("--graph", kge_graph)->required();
    train_kge_cmd->add_option("--config", kge_config, "KGE JSON config");
    train_kge_cmd->add_option("--out", kge_out)->required();
    train_kge_cmd->callback([&] {
        action = [&] {
            json raw = kge_config.empty() ? json::object() : read_json_file(kge_config);
            KgeConfig cfg = kge_config_from_json(raw);
            if (!raw.contains("seed")) cfg.seed = derive_seed(g.seed, "kge");
            auto graph = read_ntriples_file(kge_graph);
            auto model = train_kge(graph, cfg, [](std::size_t epoch, double loss) {
                std::printf("epoch %zu loss %s\n", epoch + 1, format_double(loss).c_str());
                std::fflush(stdout);
            });
            write_artifact(kge_out, save_checkpoint(model),
                           run_meta("train-kge", g, to_json(cfg), {{"graph", content_hash(kge_graph)}}));
        };
    });

    // encode
    auto* encode = app.add_subcommand("encode", "Export image vectors from a KGE checkpoint");
    std::string enc_model, enc_images, enc_out;
    encode->add_option("--model", enc_model)->required();
    encode->add_option("--images", enc_images, "One image id per line")->required();
    encode->add_option("--out", enc_out)->required();
    encode->callback([&] {
        action = [&] {
            auto model = read_checkpoint(enc_model);
            auto store = image_embeddings(model, read_lines(enc_images), image_iri);
            write_store(enc_out, store,
                        run_meta("encode", g, json::object(),
                                 {{"model", content_hash(enc_model)}, {"images", content_hash(enc_images)}}));
        };
    });

    // anchors
    auto* anchors_cmd = app.add_subcommand("anchors", "Select class-stratified anchors from the training split");
    std::string anc_labels, anc_split, anc_out;
    std::size_t anc_per_class = 100;
    anchors_cmd->add_option("--labels", anc_labels)->required();
    anchors_cmd->add_option("--split", anc_split)->required();
    anchors_cmd->add_option("--per-class", anc_per_class)->check(CLI::PositiveNumber);
    anchors_cmd->add_option("--out", anc_out)->required();
    anchors_cmd->callback([&] {
        action = [&] {
            auto labels = parse_labels_tsv(read_file(anc_labels), anc_labels);
            auto split = parse_split_tsv(read_file(anc_split), anc_split);
            auto anchors = select_anchors(train_ids_of(split), labels, anc_per_class, derive_seed(g.seed, "anchors"),
                                          ac_labels(), [](const std::string& w) {
                                              std::fprintf(stderr, "warning: %s\n", w.c_str());
                                          });
            write_artifact(anc_out, to_json(anchors).dump(2) + "\n",
                           run_meta("anchors", g, {{"per_class", anc_per_class}},
                                    {{"labels", content_hash(anc_labels)}, {"split", content_hash(anc_split)}}));
            std::printf("anchors %zu\n", anchors.size());
        };
    });

    // relativize
    auto* rel = app.add_subcommand("relativize", "Re-encode a store as cosines to the anchors");
    std::string rel_store, rel_anchors, rel_anchor_store, rel_out;
    rel->add_option("--store", rel_store)->required();
    rel->add_option("--anchors", rel_anchors)->required();
    rel->add_option("--anchor-store", rel_anchor_store, "Store holding anchor vectors (default: --store)");
    rel->add_option("--out", rel_out)->required();
    rel->callback([&] {
        action = [&] {
            auto store = read_store(rel_store);
            auto anchor_store = rel_anchor_store.empty() ? store : read_store(rel_anchor_store);
            auto anchors = anchor_set_from_json(read_json_file(rel_anchors));
            auto out = relativize(store, anchors, anchor_store, g.worker_count());
            json meta = run_meta("relativize", g, json::object(),
                                 {{"store", content_hash(rel_store)},
                                  {"anchors", content_hash(rel_anchors)},
                                  {"anchor_store", content_hash(rel_anchor_store.empty() ? rel_store : rel_anchor_store)}});
            meta["anchor_set_hash"] = anchors.hash();
            write_store(rel_out, out, meta);
        };
    });

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "Combine two stores");
    std::string fuse_a, fuse_b, fuse_kind = "concat", fuse_out;
    fuse_cmd->add_option("--a", fuse_a)->required();
    fuse_cmd->add_option("--b", fuse_b)->required();
    fuse_cmd->add_option("--kind", fuse_kind)->check(CLI::IsMember({"concat", "hadamard"}));
    fuse_cmd->add_option("--out", fuse_out)->required();
    fuse_cmd->callback([&] {
        action = [&] {
            auto out = fuse(read_store(fuse_a), read_store(fuse_b), fusion_kind_from_string(fuse_kind));
            write_store(fuse_out, out,
                        run_meta("fuse", g, {{"kind", fuse_kind}},
                                 {{"a", content_hash(fuse_a)}, {"b", content_hash(fuse_b)}}));
        };
    });

    // train-clf
    auto* train_clf = app.add_subcommand("train-clf", "Train the MLP classifier");
    std::string clf_store, clf_labels, clf_split, clf_config, clf_out, clf_history;
    train_clf->add_option("--store", clf_store)->required();
    train_clf->add_option("--labels", clf_labels)->required();
    train_clf->add_option("--split", clf_split)->required();
    train_clf->add_option("--config", clf_config, "MLP JSON config");
    train_clf->add_option("--out", clf_out)->required();
    train_clf->add_option("--history", clf_history, "Per-epoch CSV");
    train_clf->callback([&] {
        action = [&] {
            json raw = clf_config.empty() ? json::object() : read_json_file(clf_config);
            MlpConfig cfg = mlp_config_from_json(raw);
            if (!raw.contains("seed")) cfg.seed = derive_seed(g.seed, "mlp");
            LabeledDataset ds{read_store(clf_store), parse_labels_tsv(read_file(clf_labels), clf_labels),
                              parse_split_tsv(read_file(clf_split), clf_split)};
            cfg.in_dim = ds.store.dim();
            auto result = train_classifier(ds, cfg, ac_labels());
            for (const auto& e : result.history) {
                std::printf("epoch %zu loss %s val_macro_f1 %s\n", e.epoch, format_double(e.train_loss).c_str(),
                            format_double(e.val_macro_f1).c_str());
            }
            json meta = run_meta("train-clf", g, to_json(cfg),
                                 {{"store", content_hash(clf_store)},
                                  {"labels", content_hash(clf_labels)},
                                  {"split", content_hash(clf_split)}});
            write_artifact(clf_out, save_mlp(result.params, cfg.seed), meta);
            if (!clf_history.empty()) write_artifact(clf_history, history_to_csv(result.history), meta);
        };
    });

    // eval
    auto* eval = app.add_subcommand("eval", "Macro F1 and per-class scores on one split");
    std::string ev_clf, ev_store, ev_labels, ev_split_file, ev_split = "test", ev_predictions;
    eval->add_option("--clf", ev_clf)->required();
    eval->add_option("--store", ev_store)->required();
    eval->add_option("--labels", ev_labels)->required();
    eval->add_option("--split", ev_split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
    eval->add_option("--split-file", ev_split_file, "Split manifest (default: every store id)");
    eval->add_option("--predictions", ev_predictions, "Prediction TSV output");
    eval->callback([&] {
        action = [&] {
            auto params = load_mlp(read_file(ev_clf));
            auto store = read_store(ev_store);
            auto labels = parse_labels_tsv(read_file(ev_labels), ev_labels);
            std::vector<std::string> ids;
            if (ev_split_file.empty()) {
                ids = store.ids();
            } else {
                LabeledDataset ds{store, labels, parse_split_tsv(read_file(ev_split_file), ev_split_file)};
                ids = ds.ids(split_from_string(ev_split));
            }
            auto preds = predict(params, store, ids, ac_labels());
            std::map<std::string, std::string> pred_map, golds;
            for (const auto& p : preds) {
                pred_map[p.id] = p.label;
                auto it = labels.find(p.id);
                if (it == labels.end()) throw Error("eval: no label for " + p.id);
                golds[p.id] = it->second;
            }
            print_scores(per_class_scores(pred_map, golds, ac_labels()), macro_f1(pred_map, golds, ac_labels()));
            if (!ev_predictions.empty()) {
                write_artifact(ev_predictions, predictions_to_tsv(preds),
                               run_meta("eval", g, {{"split", ev_split}},
                                        {{"clf", content_hash(ev_clf)}, {"store", content_hash(ev_store)}}));
            }
        };
    });

    // explain
    auto* explain_cmd = app.add_subcommand("explain", "Nearest-neighbour report for one test image");
    std::string ex_id, ex_spaces, ex_graph, ex_out, ex_predicates;
    std::size_t ex_k = 5, ex_hops = 2, ex_nodes = 10;
    explain_cmd->add_option("--test-id", ex_id)->required();
    explain_cmd->add_option("--spaces", ex_spaces, "JSON: labels, split, anchors and the named spaces")->required();
    explain_cmd->add_option("--graph", ex_graph)->required();
    explain_cmd->add_option("--k", ex_k)->check(CLI::PositiveNumber);
    explain_cmd->add_option("--max-hops", ex_hops)->check(CLI::PositiveNumber);
    explain_cmd->add_option("--shared-k", ex_nodes)->check(CLI::PositiveNumber);
    explain_cmd->add_option("--predicates", ex_predicates, "Comma-separated predicate IRIs, or 'all'");
    explain_cmd->add_option("--out", ex_out)->required();
    explain_cmd->callback([&] {
        action = [&] {
            json layout = read_json_file(ex_spaces);
            fs::path base = fs::path(ex_spaces).parent_path();
            std::vector<EmbeddingStore> stores;
            std::vector<std::pair<std::string, std::size_t>> named;  // name, index of query store
            std::map<std::string, std::string> labels;
            std::map<std::string, Split> split;
            std::optional<AnchorSet> anchors;
            json inputs = {{"graph", content_hash(ex_graph)}, {"spaces", content_hash(ex_spaces)}};
            try {
                auto labels_path = resolve(base, layout.at("labels").get<std::string>());
                labels = parse_labels_tsv(read_file(labels_path), labels_path);
                if (layout.contains("split")) {
                    auto p = resolve(base, layout["split"].get<std::string>());
                    split = parse_split_tsv(read_file(p), p);
                }
                if (layout.contains("anchors")) {
                    anchors = anchor_set_from_json(read_json_file(resolve(base, layout["anchors"].get<std::string>())));
                }
                const auto& list = layout.at("spaces");
                stores.reserve(2 * list.size());
                for (const auto& s : list) {
                    auto name = s.at("name").get<std::string>();
                    auto query_path = resolve(base, s.at("store").get<std::string>());
                    stores.push_back(read_store(query_path));
                    inputs[name] = content_hash(query_path);
                    const auto& query = stores.back();
                    if (s.contains("reference")) {
                        stores.push_back(read_store(resolve(base, s["reference"].get<std::string>())));
                    } else if (is_relative(query.provenance()) || query.provenance() == Provenance::Hybrid) {
                        if (!anchors) throw Error("explain: space '" + name + "' needs anchors or a reference store");
                        stores.push_back(query.subset(anchors->anchor_ids));
                    } else {
                        if (split.empty()) throw Error("explain: space '" + name + "' needs a split or a reference store");
                        stores.push_back(query.subset(train_ids_of(split)));
                    }
                    named.emplace_back(name, stores.size() - 2);
                }
            } catch (const json::exception& e) {
                throw Error(ex_spaces + ": " + e.what());
            }
            std::vector<ExplainSpace> spaces;
            for (const auto& [name, i] : named) spaces.push_back({name, &stores[i], &stores[i + 1]});

            ExplainOptions opt;
            opt.k = ex_k;
            opt.shared.max_hops = ex_hops;
            opt.shared.k = ex_nodes;
            if (ex_predicates == "all") {
                opt.shared.predicates.clear();
            } else if (!ex_predicates.empty()) {
                auto list = split_csv(ex_predicates);
                opt.shared.predicates = {list.begin(), list.end()};
            }
            opt.iri_of = image_iri;
            auto report = explain(ex_id, spaces, read_ntriples_file(ex_graph), labels, opt);
            write_artifact(ex_out, to_json(report).dump(2) + "\n",
                           run_meta("explain", g, {{"test_id", ex_id}, {"k", ex_k}, {"max_hops", ex_hops}}, inputs));
            std::fputs(report_to_text(report).c_str(), stdout);
        };
    });

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
    SynthDocOptions sd;
    SynthCvOptions sc;
    std::string sy_docs, sy_cv, sy_labels, sy_split, sy_manifest;
    sd.class_signal = 0.8;
    sd.signal_classes = {0, 1, 2, 3};
    sc.signal_classes = {3, 4, 5, 6};
    std::vector<std::size_t> kg_classes, cv_classes;
    synth->add_option("--n", sd.n_images)->check(CLI::Range(7, 10000000));
    synth->add_option("--class-signal", sd.class_signal)->check(CLI::Range(0.0, 1.0));
    synth->add_option("--modality-signal", sc.modality_signal)->check(CLI::Range(0.0, 1.0));
    synth->add_option("--cv-dim", sc.dim)->check(CLI::Range(7, 1000000));
    synth->add_option("--kg-classes", kg_classes, "Class indices carrying graph signal")->delimiter(',');
    synth->add_option("--cv-classes", cv_classes, "Class indices carrying vision signal")->delimiter(',');
    synth->add_option("--out-docs", sy_docs)->required();
    synth->add_option("--out-cv", sy_cv);
    synth->add_option("--out-labels", sy_labels);
    synth->add_option("--out-split", sy_split);
    synth->add_option("--out-manifest", sy_manifest, "Image ids, one per line");
    synth->callback([&] {
        action = [&] {
            if (!kg_classes.empty()) sd.signal_classes = {kg_classes.begin(), kg_classes.end()};
            if (!cv_classes.empty()) sc.signal_classes = {cv_classes.begin(), cv_classes.end()};
            sd.seed = derive_seed(g.seed, "synth");
            sc.seed = derive_seed(g.seed, "cv");
            json config = {{"n", sd.n_images},
                           {"class_signal", sd.class_signal},
                           {"modality_signal", sc.modality_signal},
                           {"cv_dim", sc.dim},
                           {"kg_classes", sd.signal_classes},
                           {"cv_classes", sc.signal_classes}};
            json meta = run_meta("synth", g, config, json::object());
            auto docs = gen_annotations(sd);
            write_artifact(sy_docs, dump_annotations(docs), meta);
            auto labels = labels_of(docs);
            if (!sy_cv.empty()) write_store(sy_cv, gen_cv_store(docs, sc), meta);
            if (!sy_labels.empty()) write_artifact(sy_labels, labels_to_tsv(labels), meta);
            if (!sy_split.empty()) {
                write_artifact(sy_split, split_to_tsv(stratified_split(labels, derive_seed(g.seed, "split"))), meta);
            }
            if (!sy_manifest.empty()) {
                std::string text;
                for (const auto& d : docs) text += d.image_id + "\n";
                write_artifact(sy_manifest, text, meta);
            }
            std::printf("documents %zu\n", docs.size());
        };
    });

    // ablation
    auto* ablation = app.add_subcommand("ablation", "Run the full embedding comparison grid");
    std::string ab_config, ab_out;
    ablation->add_option("--config", ab_config, "Run JSON config")->required();
    ablation->add_option("--out", ab_out, "CSV output (default: stdout only)");
    ablation->callback([&] {
        action = [&] {
            json raw = read_json_file(ab_config);
            auto cfg = ablation_config_from_json(raw);
            if (!raw.contains("seed")) cfg.seed = g.seed;
            if (!raw.contains("threads")) cfg.threads = g.worker_count();
            auto rows = run_ablation(cfg, [](const std::string& line) {
                std::fprintf(stderr, "%s\n", line.c_str());
            });
            auto csv = ablation_to_csv(rows);
            if (!ab_out.empty()) {
                write_artifact(ab_out, csv, run_meta("ablation", g, to_json(cfg), {{"config", content_hash(ab_config)}}));
            }
            std::fputs(csv.c_str(), stdout);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        auto extra = app.remaining();
        if (!extra.empty() && app.get_subcommands().empty()) std::cerr << "error: unknown subcommand '" << extra.front() << "'\n";
        else std::cerr << "error: " << e.what() << "\n";
        std::cerr << app.help();
        return 2;
    }

    try {
        action();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
