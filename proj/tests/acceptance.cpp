// Acceptance checks, one PASS/FAIL line per criterion.
//   artkg_acceptance [--criterion N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "artkg/classifier.hpp"
#include "artkg/error.hpp"
#include "artkg/fusion.hpp"
#include "artkg/ingest.hpp"
#include "artkg/interpret.hpp"
#include "artkg/kge.hpp"
#include "artkg/pipeline.hpp"
#include "artkg/relative.hpp"
#include "artkg/synth.hpp"
#include "support.hpp"

using namespace artkg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int run(const fs::path& dir, const std::string& args, const std::string& log = "cli.log") {
    std::string cmd = "cd '" + dir.string() + "' && '" + ARTKG_CLI + "' " + args + " >> " + log + " 2>&1";
    int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("artkg_acceptance_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Outcome ablation_ordering() {
    auto cfg = ablation_config_from_json(nlohmann::json::parse(read_file(testing::source_path("data/ablation.json"))));
    std::vector<double> abs_kge, rel_kge, rel_cv, hybrid;
    auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        cfg.seed = seed;
        auto rows = run_ablation(cfg);
        abs_kge.push_back(rows[0].macro_f1);
        rel_kge.push_back(rows[3].macro_f1);
        rel_cv.push_back(rows[4].macro_f1);
        hybrid.push_back(rows[6].macro_f1);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double a = median(abs_kge), r = median(rel_kge), c = median(rel_cv), h = median(hybrid);
    bool ok = r >= a && h - std::max(r, c) >= 0.03 && secs < 300.0;
    return {ok, "median abs-KGE " + fmt("%.4f", a) + ", rel-KGE " + fmt("%.4f", r) + ", rel-CV " + fmt("%.4f", c) +
                    ", rel-KGE||rel-CV " + fmt("%.4f", h) + ", " + fmt("%.0f", secs) + " s for 5 seeds"};
}

Outcome relative_invariance() {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t d = 2 + std::size_t(trial) % 15;
        std::size_t n = 5 + std::size_t(trial * 7) % 40;
        auto s = testing::random_store(rng, n, d);
        std::vector<std::string> ids(s.ids().begin(), s.ids().end());
        std::shuffle(ids.begin(), ids.end(), rng);
        AnchorSet anchors;
        anchors.anchor_ids.assign(ids.begin(), ids.begin() + std::ptrdiff_t(1 + std::size_t(trial) % n));
        auto q = testing::random_orthogonal(rng, d);
        auto rotated = testing::rotate(s, q);
        auto a = relativize(s, anchors, s);
        auto b = relativize(rotated, anchors, rotated);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a.dim(); ++j) worst = std::max(worst, std::abs(a.row(i)[j] - b.row(i)[j]));
    }
    return {worst < 1e-6, "100 random sets, max elementwise deviation " + fmt("%.3g", worst)};
}

std::vector<IdTriple> to_ids(const KgeModel& m, const std::vector<Triple>& ts) {
    std::vector<IdTriple> out;
    for (const auto& t : ts)
        out.push_back({m.entity_id(entity_key(t.subject)), m.relation_id(t.predicate.value), m.entity_id(entity_key(t.object))});
    return out;
}

Outcome transe_sanity() {
    auto kg = testing::chain_kg(20);
    KgeConfig cfg;
    cfg.dim = 32;
    cfg.learning_rate = 0.05;
    cfg.batch_size = 32;
    cfg.epochs = 100;
    cfg.seed = 4;
    std::vector<double> losses;
    auto m = train_kge(kg.train, cfg, [&](std::size_t, double loss) { losses.push_back(loss); });
    auto test = to_ids(m, kg.test);
    auto all = to_ids(m, {kg.all.begin(), kg.all.end()});
    IdTripleSet known(all.begin(), all.end());
    double trained = link_prediction_eval(m, test, known).hits_at_10;

    std::vector<double> shuffled;
    for (std::uint64_t s = 0; s < 20; ++s) {
        KgeModel sh = m;
        std::vector<std::size_t> perm(m.entity_count());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::mt19937_64 rng(s);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            auto src = m.entity(perm[i]);
            std::copy(src.begin(), src.end(), sh.entity(i).begin());
        }
        shuffled.push_back(link_prediction_eval(sh, test, known).hits_at_10);
    }
    double base = std::accumulate(shuffled.begin(), shuffled.end(), 0.0) / double(shuffled.size());
    double first = std::accumulate(losses.begin(), losses.begin() + 5, 0.0) / 5;
    double last = std::accumulate(losses.end() - 5, losses.end(), 0.0) / 5;
    bool hits_ok = trained >= 5.0 * base;
    bool loss_ok = last < first;
    return {hits_ok && loss_ok,
            "hits@10 trained " + fmt("%.3f", trained) + " vs shuffled mean " + fmt("%.3f", base) + " (ratio " +
                fmt("%.2f", base > 0 ? trained / base : INFINITY) + ", needs 5; a 20-entity graph caps it near " +
                fmt("%.1f", base > 0 ? 1.0 / base : INFINITY) + ")" + (hits_ok ? "" : " [unmet]") +
                "; loss first-5 " + fmt("%.4f", first) + " last-5 " + fmt("%.4f", last) + (loss_ok ? "" : " [unmet]")};
}

Outcome gradient_oracles() {
    std::mt19937_64 rng(404);
    const double h = 1e-6;
    auto rel_err = [](double fd, double an) { return std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4}); };

    double mlp_worst = 0.0;
    std::size_t mlp_configs = 0;
    for (int trial = 0; trial < 24; ++trial) {
        std::size_t in = 1 + std::size_t(trial) % 6, hid = 1 + std::size_t(trial * 5) % 11, out = 2 + std::size_t(trial) % 6;
        auto p = MlpParams::zeros(in, hid, out);
        std::normal_distribution<double> nd(0.0, 0.7);
        for (auto b : p.blocks())
            for (double& v : b) v = nd(rng);
        std::vector<std::vector<double>> xs;
        std::vector<Example> batch;
        for (std::size_t i = 0; i < 4; ++i) xs.push_back(testing::random_vector(rng, in));
        for (std::size_t i = 0; i < 4; ++i) batch.push_back({xs[i], (i * 3 + std::size_t(trial)) % out});
        Rng unused(0);
        auto g = loss_and_grad(p, batch, false, 0.0, unused).grad;
        auto pb = p.blocks();
        auto gb = g.blocks();
        for (std::size_t b = 0; b < 4; ++b) {
            for (std::size_t k = 0; k < pb[b].size(); ++k) {
                double keep = pb[b][k];
                pb[b][k] = keep + h;
                double up = loss_and_grad(p, batch, false, 0.0, unused).loss;
                pb[b][k] = keep - h;
                double down = loss_and_grad(p, batch, false, 0.0, unused).loss;
                pb[b][k] = keep;
                mlp_worst = std::max(mlp_worst, rel_err((up - down) / (2 * h), gb[b][k]));
            }
        }
        ++mlp_configs;
    }

    double kge_worst = 0.0;
    std::size_t kge_configs = 0;
    auto kg = testing::chain_kg(15);
    auto index = index_graph(kg.train);
    for (int trial = 0; kge_configs < 24 && trial < 200; ++trial) {
        KgeConfig cfg;
        cfg.dim = 3 + std::size_t(trial) % 8;
        cfg.norm = trial % 2 ? Norm::L1 : Norm::L2;
        cfg.margin = 2.0;
        cfg.seed = std::uint64_t(trial);
        auto m = init_model(cfg, index);
        IdTriple pos = index.triples[std::size_t(trial * 13) % index.triples.size()];
        Rng r{std::uint64_t(trial)};
        IdTriple neg = negative_sample(pos, m.entity_count(), r);
        KgeGradient grad(m.entity_count(), m.relation_count(), m.dim());
        if (accumulate_hinge_gradient(m, pos, neg, grad) <= 1e-3) continue;
        auto check = [&](std::span<double> row, std::span<const double> g) {
            for (std::size_t k = 0; k < row.size(); ++k) {
                double keep = row[k];
                row[k] = keep + h;
                double up = hinge_loss(m, pos, neg);
                row[k] = keep - h;
                double down = hinge_loss(m, pos, neg);
                row[k] = keep;
                kge_worst = std::max(kge_worst, rel_err((up - down) / (2 * h), g[k]));
            }
        };
        for (auto e : std::vector<std::uint32_t>(grad.touched_entities())) check(m.entity(e), grad.entity_row(e));
        for (auto k : std::vector<std::uint32_t>(grad.touched_relations())) check(m.relation(k), grad.relation_row(k));
        ++kge_configs;
    }
    bool ok = mlp_configs >= 20 && kge_configs >= 20 && mlp_worst < 1e-4 && kge_worst < 1e-4;
    return {ok, "MLP " + std::to_string(mlp_configs) + " configs max rel err " + fmt("%.2g", mlp_worst) + "; TransE " +
                    std::to_string(kge_configs) + " configs max rel err " + fmt("%.2g", kge_worst)};
}

Outcome macro_f1_oracle() {
    auto to_map = [](const std::string& digits) {
        std::map<std::string, std::string> out;
        for (std::size_t i = 0; i < digits.size(); ++i) out["x" + std::to_string(i)] = ac_labels()[std::size_t(digits[i] - '0')];
        return out;
    };
    double worst = 0.0;
    std::size_t n = 0;
    for (const auto& c : testing::oracles()["macro_f1_cases"]) {
        double got = macro_f1(to_map(c["pred"]), to_map(c["gold"]), ac_labels());
        worst = std::max(worst, std::abs(got - c["macro_f1"].get<double>()));
        ++n;
    }
    return {n == 50 && worst < 1e-12, std::to_string(n) + " cases, max |diff| " + fmt("%.3g", worst)};
}

Outcome leakage_filter() {
    auto dir = scratch("leak");
    fs::copy_file(testing::source_path("tests/fixtures/contaminated.json"), dir / "docs.json");
    if (run(dir, "ingest --in docs.json --out akg.nt") != 0) return {false, "ingest failed"};
    if (run(dir, "filter --in akg.nt --out clean.nt", "filter.log") != 0) return {false, "filter failed"};
    std::size_t removed = 0;
    {
        std::istringstream in(read_file(dir / "filter.log"));
        std::string line;
        while (std::getline(in, line))
            if (line.starts_with("removed_count ")) removed = std::stoul(line.substr(14));
    }
    auto clean = parse_ntriples(read_file(dir / "clean.nt"));
    std::vector<std::string> lowered;
    for (const auto& l : ac_labels()) lowered.push_back(to_lower_ascii(l));
    std::size_t remaining = 0;
    for (const auto& t : clean) {
        if (mentions_any(t.subject, lowered) || mentions_any(t.object, lowered)) ++remaining;
    }
    auto planted = testing::golden_counts()["contaminated_planted"].get<std::size_t>();
    fs::remove_all(dir);
    return {remaining == 0 && removed == planted,
            "removed_count " + std::to_string(removed) + " (planted " + std::to_string(planted) + "), remaining " +
                std::to_string(remaining)};
}

Outcome ingestion_golden() {
    auto docs = load_annotations(testing::source_path("tests/fixtures/full_unit.json"));
    auto got = serialize_ntriples(build_image_graph(docs.at(0)));
    auto want = read_file(testing::source_path("tests/golden/full_unit.nt"));
    return {got == want, std::to_string(got.size()) + " bytes vs golden " + std::to_string(want.size()) +
                             (got == want ? ", identical" : ", different")};
}

Outcome fusion_contracts() {
    std::mt19937_64 rng(88);
    std::size_t failures = 0, trials = 0;
    for (int t = 0; t < 100; ++t, ++trials) {
        std::size_t n = 1 + std::size_t(t) % 9, da = 1 + std::size_t(t) % 13, db = 1 + std::size_t(t * 7) % 17;
        auto a = testing::random_store(rng, n, da, Provenance::KgeRelative);
        auto b = testing::random_store(rng, n, db, Provenance::CvRelative);
        auto c = fuse(a, b, FusionKind::Concat);
        bool ok = c.dim() == da + db && c.size() == n && c.ids() == a.ids();
        for (std::size_t i = 0; ok && i < n; ++i) {
            ok = std::equal(a.row(i).begin(), a.row(i).end(), c.row(i).begin()) &&
                 std::equal(b.row(i).begin(), b.row(i).end(), c.row(i).begin() + std::ptrdiff_t(da));
        }
        auto b2 = testing::random_store(rng, n, da, Provenance::CvRelative);
        ok = ok && fuse(a, b2, FusionKind::Hadamard) == fuse(b2, a, FusionKind::Hadamard);
        EmbeddingStore ones(da, Provenance::CvRelative);
        for (const auto& id : a.ids()) ones.add(id, std::vector<double>(da, 1.0));
        auto same = fuse(a, ones, FusionKind::Hadamard);
        for (std::size_t i = 0; ok && i < n; ++i) ok = std::equal(a.row(i).begin(), a.row(i).end(), same.row(i).begin());
        if (da != db) {
            try {
                fuse(a, b, FusionKind::Hadamard);
                ok = false;
            } catch (const Error&) {
            }
        }
        failures += !ok;
    }
    return {failures == 0, std::to_string(trials) + " randomized store pairs, " + std::to_string(failures) + " violations"};
}

Outcome determinism() {
    auto base = scratch("det");
    const std::vector<std::string> steps = {
        "synth --n 140 --out-docs docs.json --out-cv cv.tsv --out-labels labels.tsv --out-split split.tsv "
        "--out-manifest images.txt",
        "ingest --in docs.json --out akg.nt",
        "filter --in akg.nt --out clean.nt",
        "train-kge --graph clean.nt --config kge.json --out kge.bin",
        "encode --model kge.bin --images images.txt --out kge_abs.tsv",
        "anchors --labels labels.tsv --split split.tsv --per-class 10 --out anchors.json",
        "relativize --store kge_abs.tsv --anchors anchors.json --out kge_rel.tsv",
        "relativize --store cv.tsv --anchors anchors.json --out cv_rel.tsv",
        "fuse --a kge_rel.tsv --b cv_rel.tsv --kind concat --out hybrid.tsv",
        "train-clf --store hybrid.tsv --labels labels.tsv --split split.tsv --config mlp.json --out clf.bin "
        "--history history.csv",
        "eval --clf clf.bin --store hybrid.tsv --labels labels.tsv --split test --split-file split.tsv "
        "--predictions predictions.tsv",
    };
    std::vector<fs::path> runs{base / "a", base / "b"};
    for (const auto& dir : runs) {
        fs::create_directories(dir);
        write_file_atomic(dir / "kge.json", R"({"dim": 16, "epochs": 20, "learning_rate": 0.05})");
        write_file_atomic(dir / "mlp.json", R"({"hidden_dim": 32, "epochs": 10})");
        write_file_atomic(dir / "spaces.json", R"({"labels": "labels.tsv", "split": "split.tsv", "anchors": "anchors.json",
 "spaces": [{"name": "kge-absolute", "store": "kge_abs.tsv"}, {"name": "kge-relative", "store": "kge_rel.tsv"},
            {"name": "hybrid", "store": "hybrid.tsv"}]})");
        for (const auto& s : steps) {
            if (run(dir, "--seed 11 --deterministic " + s) != 0) return {false, "step failed: " + s};
        }
        std::string test_id;
        for (const auto& [id, sp] : parse_split_tsv(read_file(dir / "split.tsv")))
            if (sp == Split::Test && test_id.empty()) test_id = id;
        if (run(dir, "--seed 11 --deterministic explain --test-id " + test_id +
                         " --spaces spaces.json --graph clean.nt --out report.json") != 0)
            return {false, "explain failed"};
    }
    std::size_t compared = 0;
    std::vector<std::string> differing;
    for (const auto& entry : fs::directory_iterator(runs[0])) {
        auto name = entry.path().filename().string();
        if (!fs::exists(runs[1] / name)) {
            differing.push_back(name + " (missing)");
            continue;
        }
        ++compared;
        if (read_file(entry.path()) != read_file(runs[1] / name)) differing.push_back(name);
    }
    fs::remove_all(base);
    std::string detail = std::to_string(compared) + " files compared (graph, model, stores, predictions, report, "
                                                    "sidecars, logs)";
    for (const auto& d : differing) detail += "; differs: " + d;
    return {differing.empty() && compared >= 20, detail};
}

Outcome interpretability() {
    std::mt19937_64 rng(10);
    std::size_t mismatches = 0, queries = 0;
    for (int trial = 0; trial < 5; ++trial) {
        auto s = testing::random_store(rng, 200, 8 + std::size_t(trial) * 4);
        for (std::size_t qi = 0; qi < 200; qi += 7, ++queries) {
            const auto& q = s.ids()[qi];
            std::vector<Neighbor> all;
            for (const auto& id : s.ids())
                if (id != q) all.push_back({id, cosine(s.vector(q), s.vector(id))});
            std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
                return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
            });
            all.resize(10);
            mismatches += top_k_similar(q, s, s, 10) != all;
        }
    }

    auto docs = testing::planted_concept_docs(56, 14, 3);
    auto graph = filter_leakage(build_akg(docs)).graph;
    KgeConfig cfg;
    cfg.dim = 32;
    cfg.epochs = 200;
    cfg.learning_rate = 0.05;
    cfg.seed = 4;
    auto model = train_kge(graph, cfg);
    std::vector<std::string> ids;
    for (const auto& d : docs) ids.push_back(d.image_id);
    auto iri = [](std::string_view id) { return image_iri(id); };
    auto store = image_embeddings(model, ids, iri);
    ExplainOptions opt;
    opt.iri_of = iri;
    std::vector<ExplainSpace> spaces{{"kge", &store, &store}};
    std::size_t first = 0;
    for (std::size_t q = 0; q < 14; ++q) {
        auto report = explain(ids[q], spaces, graph, labels_of(docs), opt);
        const auto& shared = report.spaces[0].shared_nodes;
        if (!shared.empty() && shared[0].iri == testing::kPlantedFrameIri &&
            (shared.size() == 1 || shared[0].count > shared[1].count))
            ++first;
    }
    return {mismatches == 0 && first == 14,
            std::to_string(queries) + " brute-force top-10 queries, " + std::to_string(mismatches) +
                " mismatches; planted concept ranked first for " + std::to_string(first) + "/14 planted queries"};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "ablation ordering", ablation_ordering},
        {2, "relative orthogonal invariance", relative_invariance},
        {3, "TransE sanity", transe_sanity},
        {4, "gradient oracles", gradient_oracles},
        {5, "macro F1 oracle", macro_f1_oracle},
        {6, "leakage filter", leakage_filter},
        {7, "ingestion golden file", ingestion_golden},
        {8, "fusion contracts", fusion_contracts},
        {9, "determinism", determinism},
        {10, "interpretability oracle", interpretability},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) selected.insert(std::atoi(argv[++i]));
        else {
            std::cerr << "usage: artkg_acceptance [--criterion N]...\n";
            return 2;
        }
    }
    bool all_pass = true;
    for (const auto& c : all) {
        if (!selected.empty() && !selected.contains(c.id)) continue;
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("CRITERION %d %s  %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && o.pass;
    }
    return all_pass ? 0 : 1;
}
