#include "artkg/relative.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "artkg/error.hpp"
#include "artkg/util.hpp"

namespace artkg {

std::string AnchorSet::hash() const {
    std::string key;
    for (const auto& id : anchor_ids) {
        key += id;
        key += '\n';
    }
    return hex64(fnv1a64(key));
}

nlohmann::json to_json(const AnchorSet& a) {
    return {{"anchor_ids", a.anchor_ids}, {"per_class_counts", a.per_class_counts}, {"seed", a.seed}, {"hash", a.hash()}};
}

AnchorSet anchor_set_from_json(const nlohmann::json& j) {
    AnchorSet a;
    try {
        a.anchor_ids = j.at("anchor_ids").get<std::vector<std::string>>();
        a.per_class_counts = j.value("per_class_counts", std::map<std::string, std::size_t>{});
        a.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("anchor set: ") + e.what());
    }
    std::vector<std::string> sorted = a.anchor_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw Error("anchor set has duplicate ids");
    return a;
}

AnchorSet select_anchors(const std::vector<std::string>& train_ids, const std::map<std::string, std::string>& labels,
                         std::size_t per_class, std::uint64_t seed, const std::vector<std::string>& classes,
                         const WarningSink& warn) {
    std::map<std::string, std::vector<std::string>> by_class;
    for (const auto& c : classes) by_class[c];
    std::vector<std::string> ids = train_ids;
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw Error("training ids contain duplicates");
    for (const auto& id : ids) {
        auto it = labels.find(id);
        if (it == labels.end()) throw Error("training id '" + id + "' has no label");
        auto bucket = by_class.find(it->second);
        if (bucket == by_class.end()) throw Error("training id '" + id + "' has unknown label '" + it->second + "'");
        bucket->second.push_back(id);
    }

    AnchorSet out;
    out.seed = seed;
    Rng rng(seed);
    for (auto& [label, members] : by_class) {
        if (members.empty()) throw Error("class '" + label + "' has no training items to draw anchors from");
        const std::size_t take = std::min(per_class, members.size());
        if (take < per_class && warn) {
            warn("class '" + label + "' has only " + std::to_string(members.size()) + " training items; using " +
                 std::to_string(take) + " anchors instead of " + std::to_string(per_class));
        }
        // Partial Fisher-Yates: the first `take` slots are the draw order.
        for (std::size_t i = 0; i < take; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
            std::swap(members[i], members[pick(rng)]);
            out.anchor_ids.push_back(members[i]);
        }
        out.per_class_counts[label] = take;
    }
    return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw Error("cosine of vectors with dimensions " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
    }
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        dot += u[k] * v[k];
        uu += u[k] * u[k];
        vv += v[k] * v[k];
    }
    if (uu == 0.0 || vv == 0.0) throw Error("cosine of a zero vector");
    double c = dot / (std::sqrt(uu) * std::sqrt(vv));
    return std::clamp(c, -1.0, 1.0);
}

namespace {

bool is_kge(Provenance p) { return p == Provenance::KgeAbsolute || p == Provenance::KgeRelative; }

}  // namespace

EmbeddingStore relativize(const EmbeddingStore& store, const AnchorSet& anchors, const EmbeddingStore& anchor_store,
                          std::size_t threads) {
    if (anchors.anchor_ids.empty()) throw Error("anchor set is empty");
    for (auto p : {store.provenance(), anchor_store.provenance()}) {
        if (p != Provenance::KgeAbsolute && p != Provenance::CvAbsolute) {
            throw Error("relativize needs absolute stores, got " + std::string(to_string(p)));
        }
    }
    if (is_kge(store.provenance()) != is_kge(anchor_store.provenance())) {
        throw Error("item store (" + std::string(to_string(store.provenance())) + ") and anchor store (" +
                    std::string(to_string(anchor_store.provenance())) + ") come from different embedding spaces");
    }
    if (store.dim() != anchor_store.dim()) throw Error("item and anchor stores have different dimensions");

    // Normalized anchor rows, in anchor order.
    const std::size_t d = store.dim();
    const std::size_t na = anchors.size();
    std::vector<double> anchor_unit(na * d);
    for (std::size_t j = 0; j < na; ++j) {
        const auto& id = anchors.anchor_ids[j];
        if (!anchor_store.contains(id)) throw Error("anchor '" + id + "' has no vector in the anchor store");
        auto v = anchor_store.vector(id);
        double sq = 0.0;
        for (double x : v) sq += x * x;
        if (sq == 0.0) throw Error("anchor '" + id + "' has a zero vector");
        double inv = 1.0 / std::sqrt(sq);
        for (std::size_t k = 0; k < d; ++k) anchor_unit[j * d + k] = v[k] * inv;
    }

    std::vector<double> out(store.size() * na);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto x = store.row(i);
            double sq = 0.0;
            for (double v : x) sq += v * v;
            if (sq == 0.0) throw Error("item '" + store.ids()[i] + "' has a zero vector");
            double inv = 1.0 / std::sqrt(sq);
            for (std::size_t j = 0; j < na; ++j) {
                const double* a = anchor_unit.data() + j * d;
                double dot = 0.0;
                for (std::size_t k = 0; k < d; ++k) dot += x[k] * a[k];
                out[i * na + j] = std::clamp(dot * inv, -1.0, 1.0);
            }
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, store.size()));
    if (threads == 1) {
        work(0, store.size());
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        const std::size_t chunk = (store.size() + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    work(t * chunk, std::min(store.size(), (t + 1) * chunk));
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    EmbeddingStore result(na, is_kge(store.provenance()) ? Provenance::KgeRelative : Provenance::CvRelative);
    for (std::size_t i = 0; i < store.size(); ++i) {
        result.add(store.ids()[i], std::span<const double>(out.data() + i * na, na));
    }
    return result;
}

}  // namespace artkg
