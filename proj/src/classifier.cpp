#include "artkg/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

#include "artkg/error.hpp"
#include "artkg/ingest.hpp"

namespace artkg {

void MlpConfig::validate() const {
    if (in_dim < 1) throw Error("mlp: in_dim must be positive");
    if (hidden_dim < 1) throw Error("mlp: hidden_dim must be positive");
    if (out_dim < 1) throw Error("mlp: out_dim must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("mlp: dropout must lie in [0,1)");
    if (!(learning_rate >= 0.0)) throw Error("mlp: learning_rate must be non-negative");
    if (batch_size < 1) throw Error("mlp: batch_size must be positive");
}

MlpConfig mlp_config_from_json(const nlohmann::json& j) {
    MlpConfig c;
    try {
        c.in_dim = j.value("in_dim", c.in_dim);
        c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
        c.out_dim = j.value("out_dim", c.out_dim);
        c.dropout = j.value("dropout", c.dropout);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.seed = j.value("seed", c.seed);
        c.standardize_inputs = j.value("standardize_inputs", c.standardize_inputs);
        std::string opt = j.value("optimizer", std::string("adam"));
        if (opt == "sgd") c.optimizer = Optimizer::Sgd;
        else if (opt == "adam") c.optimizer = Optimizer::Adam;
        else throw Error("mlp: optimizer must be sgd or adam");
        if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw Error("mlp: dropout must lie in [0,1)");
        if (!(c.learning_rate >= 0.0)) throw Error("mlp: learning_rate must be non-negative");
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("mlp config: ") + e.what());
    }
    return c;
}

nlohmann::json to_json(const MlpConfig& c) {
    return {{"in_dim", c.in_dim},
            {"hidden_dim", c.hidden_dim},
            {"out_dim", c.out_dim},
            {"dropout", c.dropout},
            {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"seed", c.seed},
            {"optimizer", c.optimizer == Optimizer::Sgd ? "sgd" : "adam"},
            {"standardize_inputs", c.standardize_inputs}};
}

MlpParams MlpParams::zeros(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim) {
    MlpParams p;
    p.in_dim = in_dim;
    p.hidden_dim = hidden_dim;
    p.out_dim = out_dim;
    p.w1.assign(hidden_dim * in_dim, 0.0);
    p.b1.assign(hidden_dim, 0.0);
    p.w2.assign(out_dim * hidden_dim, 0.0);
    p.b2.assign(out_dim, 0.0);
    return p;
}

MlpParams MlpParams::init(const MlpConfig& cfg) {
    cfg.validate();
    MlpParams p = zeros(cfg.in_dim, cfg.hidden_dim, cfg.out_dim);
    Rng rng(derive_seed(cfg.seed, "mlp-init"));
    std::uniform_real_distribution<double> layer1(-1.0 / std::sqrt(double(cfg.in_dim)), 1.0 / std::sqrt(double(cfg.in_dim)));
    std::uniform_real_distribution<double> layer2(-1.0 / std::sqrt(double(cfg.hidden_dim)),
                                                  1.0 / std::sqrt(double(cfg.hidden_dim)));
    for (double& v : p.w1) v = layer1(rng);
    for (double& v : p.b1) v = layer1(rng);
    for (double& v : p.w2) v = layer2(rng);
    for (double& v : p.b2) v = layer2(rng);
    return p;
}

std::array<std::span<double>, 4> MlpParams::blocks() { return {w1, b1, w2, b2}; }
std::array<std::span<const double>, 4> MlpParams::blocks() const { return {w1, b1, w2, b2}; }

ForwardCache forward(const MlpParams& p, std::span<const double> x, bool train_mode, double dropout, Rng& rng) {
    if (x.size() != p.in_dim) {
        throw Error("input has dimension " + std::to_string(x.size()) + ", classifier expects " + std::to_string(p.in_dim));
    }
    ForwardCache c;
    c.pre_activation.resize(p.hidden_dim);
    c.mask.assign(p.hidden_dim, 1.0);
    c.hidden.resize(p.hidden_dim);
    c.logits.resize(p.out_dim);
    const bool drop = train_mode && dropout > 0.0;
    std::bernoulli_distribution keep(1.0 - dropout);
    const double scale = drop ? 1.0 / (1.0 - dropout) : 1.0;
    for (std::size_t h = 0; h < p.hidden_dim; ++h) {
        const double* w = p.w1.data() + h * p.in_dim;
        double z = p.b1[h];
        for (std::size_t k = 0; k < p.in_dim; ++k) z += w[k] * x[k];
        c.pre_activation[h] = z;
        if (drop) c.mask[h] = keep(rng) ? scale : 0.0;
        c.hidden[h] = std::max(0.0, z) * c.mask[h];
    }
    for (std::size_t o = 0; o < p.out_dim; ++o) {
        const double* w = p.w2.data() + o * p.hidden_dim;
        double z = p.b2[o];
        for (std::size_t h = 0; h < p.hidden_dim; ++h) z += w[h] * c.hidden[h];
        c.logits[o] = z;
    }
    return c;
}

std::vector<double> forward_eval(const MlpParams& p, std::span<const double> x) {
    Rng unused(0);
    return forward(p, x, false, 0.0, unused).logits;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

LossAndGrad loss_and_grad(const MlpParams& p, std::span<const Example> batch, bool train_mode, double dropout, Rng& rng) {
    if (batch.empty()) throw Error("loss over an empty batch");
    LossAndGrad out;
    out.grad = MlpParams::zeros(p.in_dim, p.hidden_dim, p.out_dim);
    auto& g = out.grad;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    std::vector<double> d_hidden(p.hidden_dim);
    for (const auto& ex : batch) {
        if (ex.label >= p.out_dim) throw Error("label index out of range");
        ForwardCache c = forward(p, ex.x, train_mode, dropout, rng);
        // log-sum-exp for a stable loss
        const double mx = *std::max_element(c.logits.begin(), c.logits.end());
        double sum = 0.0;
        for (double z : c.logits) sum += std::exp(z - mx);
        out.loss += (mx + std::log(sum) - c.logits[ex.label]) * inv_n;

        // dL/dlogits = softmax - onehot, scaled by 1/n
        std::vector<double> d_logits(p.out_dim);
        for (std::size_t o = 0; o < p.out_dim; ++o) {
            d_logits[o] = (std::exp(c.logits[o] - mx) / sum - (o == ex.label ? 1.0 : 0.0)) * inv_n;
        }
        std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
        for (std::size_t o = 0; o < p.out_dim; ++o) {
            g.b2[o] += d_logits[o];
            double* gw = g.w2.data() + o * p.hidden_dim;
            const double* w = p.w2.data() + o * p.hidden_dim;
            for (std::size_t h = 0; h < p.hidden_dim; ++h) {
                gw[h] += d_logits[o] * c.hidden[h];
                d_hidden[h] += d_logits[o] * w[h];
            }
        }
        for (std::size_t h = 0; h < p.hidden_dim; ++h) {
            if (c.pre_activation[h] <= 0.0 || c.mask[h] == 0.0) continue;
            const double dz = d_hidden[h] * c.mask[h];
            g.b1[h] += dz;
            double* gw = g.w1.data() + h * p.in_dim;
            for (std::size_t k = 0; k < p.in_dim; ++k) gw[k] += dz * ex.x[k];
        }
    }
    return out;
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "train";
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw Error("unknown split '" + std::string(s) + "' (expected train, val or test)");
}

std::vector<std::string> LabeledDataset::ids(Split s) const {
    std::vector<std::string> out;
    for (const auto& id : store.ids()) {
        if (!labels.contains(id)) throw Error("item '" + id + "' has no label");
        auto it = split.find(id);
        if (it == split.end()) throw Error("item '" + id + "' has no split assignment");
        if (it->second == s) out.push_back(id);
    }
    return out;
}

namespace {

std::size_t class_index(const std::vector<std::string>& classes, const std::string& label) {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw Error("unknown label '" + label + "'");
    return static_cast<std::size_t>(it - classes.begin());
}

class AdamState {
public:
    explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

    void step(MlpParams& p, const MlpParams& g, double lr) {
        ++t_;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, double(t_));
        const double c2 = 1.0 - std::pow(b2, double(t_));
        std::size_t off = 0;
        auto pb = p.blocks();
        auto gb = g.blocks();
        for (std::size_t b = 0; b < 4; ++b) {
            for (std::size_t i = 0; i < pb[b].size(); ++i, ++off) {
                m_[off] = b1 * m_[off] + (1 - b1) * gb[b][i];
                v_[off] = b2 * v_[off] + (1 - b2) * gb[b][i] * gb[b][i];
                pb[b][i] -= lr * (m_[off] / c1) / (std::sqrt(v_[off] / c2) + eps);
            }
        }
    }

private:
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t t_ = 0;
};

}  // namespace

InputScaling fit_input_scaling(const EmbeddingStore& store, const std::vector<std::string>& ids) {
    if (ids.empty()) throw Error("cannot fit input scaling on zero items");
    const std::size_t d = store.dim();
    InputScaling s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (const auto& id : ids) {
        auto x = store.vector(id);
        for (std::size_t k = 0; k < d; ++k) s.mean[k] += x[k];
    }
    for (double& m : s.mean) m /= double(ids.size());
    for (const auto& id : ids) {
        auto x = store.vector(id);
        for (std::size_t k = 0; k < d; ++k) s.scale[k] += (x[k] - s.mean[k]) * (x[k] - s.mean[k]);
    }
    for (double& v : s.scale) {
        double sd = std::sqrt(v / double(ids.size()));
        v = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
    return s;
}

void fold_input_scaling(MlpParams& p, const InputScaling& s) {
    if (s.mean.size() != p.in_dim || s.scale.size() != p.in_dim) throw Error("input scaling has the wrong dimension");
    for (std::size_t h = 0; h < p.hidden_dim; ++h) {
        double* w = p.w1.data() + h * p.in_dim;
        double shift = 0.0;
        for (std::size_t k = 0; k < p.in_dim; ++k) {
            w[k] *= s.scale[k];
            shift += w[k] * s.mean[k];
        }
        p.b1[h] -= shift;
    }
}

namespace {

EmbeddingStore apply_scaling(const EmbeddingStore& store, const InputScaling& s) {
    EmbeddingStore out(store.dim(), store.provenance());
    std::vector<double> row(store.dim());
    for (std::size_t i = 0; i < store.size(); ++i) {
        auto x = store.row(i);
        for (std::size_t k = 0; k < store.dim(); ++k) row[k] = (x[k] - s.mean[k]) * s.scale[k];
        out.add(store.ids()[i], row);
    }
    return out;
}

}  // namespace

TrainResult train_classifier(const LabeledDataset& ds, const MlpConfig& cfg_in, const std::vector<std::string>& classes) {
    MlpConfig cfg = cfg_in;
    if (cfg.in_dim == 0) cfg.in_dim = ds.store.dim();
    if (cfg.in_dim != ds.store.dim()) {
        throw Error("classifier in_dim " + std::to_string(cfg.in_dim) + " does not match store dimension " +
                    std::to_string(ds.store.dim()));
    }
    if (cfg.out_dim != classes.size()) throw Error("classifier out_dim must equal the number of classes");
    cfg.validate();

    const auto train_ids = ds.ids(Split::Train);
    const auto val_ids = ds.ids(Split::Val);
    if (train_ids.empty()) throw Error("training split is empty");
    if (val_ids.empty()) throw Error("validation split is empty");

    std::optional<InputScaling> scaling;
    std::optional<EmbeddingStore> scaled;
    if (cfg.standardize_inputs) {
        scaling = fit_input_scaling(ds.store, train_ids);
        scaled = apply_scaling(ds.store, *scaling);
    }
    const EmbeddingStore& inputs = scaled ? *scaled : ds.store;

    std::vector<Example> examples;
    for (const auto& id : train_ids) examples.push_back({inputs.vector(id), class_index(classes, ds.labels.at(id))});
    std::map<std::string, std::string> val_gold;
    for (const auto& id : val_ids) val_gold[id] = ds.labels.at(id);

    TrainResult result{MlpParams::init(cfg), {}};
    MlpParams& p = result.params;
    Rng rng(derive_seed(cfg.seed, "mlp-train"));
    AdamState adam(p.parameter_count());
    std::vector<std::size_t> order(examples.size());
    std::vector<Example> batch;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
            auto lg = loss_and_grad(p, batch, true, cfg.dropout, rng);
            loss_sum += lg.loss * double(batch.size());
            if (cfg.learning_rate == 0.0) continue;
            if (cfg.optimizer == Optimizer::Adam) {
                adam.step(p, lg.grad, cfg.learning_rate);
            } else {
                auto pb = p.blocks();
                auto gb = lg.grad.blocks();
                for (std::size_t b = 0; b < 4; ++b) {
                    for (std::size_t i = 0; i < pb[b].size(); ++i) pb[b][i] -= cfg.learning_rate * gb[b][i];
                }
            }
        }
        std::map<std::string, std::string> val_pred;
        for (auto& pr : predict(p, inputs, val_ids, classes)) val_pred[pr.id] = pr.label;
        result.history.push_back({epoch + 1, loss_sum / double(examples.size()), val_pred.empty() ? 0.0 : macro_f1(val_pred, val_gold, classes)});
    }
    if (scaling) fold_input_scaling(p, *scaling);
    return result;
}

std::vector<Prediction> predict(const MlpParams& p, const EmbeddingStore& store, const std::vector<std::string>& ids,
                                const std::vector<std::string>& classes) {
    if (store.dim() != p.in_dim) throw Error("store dimension does not match the classifier input");
    if (classes.size() != p.out_dim) throw Error("class list does not match the classifier output");
    std::vector<Prediction> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto probs = softmax(forward_eval(p, store.vector(id)));
        // max_element returns the first maximum, i.e. the alphabetically smallest tied class.
        auto best = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
        out.push_back({id, classes[best], std::move(probs)});
    }
    return out;
}

std::vector<ClassScores> per_class_scores(const std::map<std::string, std::string>& preds,
                                          const std::map<std::string, std::string>& golds,
                                          const std::vector<std::string>& classes) {
    if (preds.size() != golds.size()) throw Error("predictions and gold labels cover different items");
    std::map<std::string, std::size_t> tp, fp, fn;
    for (const auto& [id, gold] : golds) {
        auto it = preds.find(id);
        if (it == preds.end()) throw Error("no prediction for item '" + id + "'");
        if (it->second == gold) {
            ++tp[gold];
        } else {
            ++fp[it->second];
            ++fn[gold];
        }
    }
    std::vector<ClassScores> out;
    for (const auto& c : classes) {
        ClassScores s;
        s.label = c;
        double t = double(tp[c]), f_p = double(fp[c]), f_n = double(fn[c]);
        s.support = tp[c] + fn[c];
        s.present = (t + f_p + f_n) > 0;
        s.precision = (t + f_p) > 0 ? t / (t + f_p) : 0.0;
        s.recall = (t + f_n) > 0 ? t / (t + f_n) : 0.0;
        s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
        out.push_back(s);
    }
    return out;
}

double macro_f1(const std::map<std::string, std::string>& preds, const std::map<std::string, std::string>& golds,
                const std::vector<std::string>& classes) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : per_class_scores(preds, golds, classes)) {
        if (!s.present) continue;
        sum += s.f1;
        ++n;
    }
    if (n == 0) throw Error("macro F1 over an empty set of predictions");
    return sum / double(n);
}

std::string history_to_csv(const std::vector<EpochStats>& history) {
    std::string out = "epoch,train_loss,val_macro_f1\n";
    for (const auto& h : history) {
        out += std::to_string(h.epoch) + "," + format_double(h.train_loss) + "," + format_double(h.val_macro_f1) + "\n";
    }
    return out;
}

std::string predictions_to_tsv(const std::vector<Prediction>& preds) {
    std::string out;
    for (const auto& p : preds) {
        out += p.id + "\t" + p.label;
        for (double v : p.probabilities) out += "\t" + format_double(v);
        out += "\n";
    }
    return out;
}

namespace {

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_u64(std::string_view b, std::size_t& pos) {
    if (pos + 8 > b.size()) throw Error("classifier checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(b[pos + std::size_t(i)])) << (8 * i);
    pos += 8;
    return v;
}

}  // namespace

std::string save_mlp(const MlpParams& p, std::uint64_t seed) {
    std::string out = "ATMP";
    put_u64(out, 1);
    put_u64(out, p.in_dim);
    put_u64(out, p.hidden_dim);
    put_u64(out, p.out_dim);
    put_u64(out, seed);
    for (auto block : p.blocks()) {
        for (double v : block) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

MlpParams load_mlp(std::string_view bytes) {
    if (bytes.substr(0, 4) != "ATMP") throw Error("not a classifier checkpoint (bad magic)");
    std::size_t pos = 4;
    if (get_u64(bytes, pos) != 1) throw Error("unsupported classifier checkpoint version");
    auto in = get_u64(bytes, pos), hidden = get_u64(bytes, pos), out_dim = get_u64(bytes, pos);
    get_u64(bytes, pos);  // seed
    if (in == 0 || hidden == 0 || out_dim == 0 || in > (1u << 24) || hidden > (1u << 24) || out_dim > 1024) {
        throw Error("classifier checkpoint has implausible dimensions");
    }
    MlpParams p = MlpParams::zeros(in, hidden, out_dim);
    for (auto block : p.blocks()) {
        for (double& v : block) {
            v = std::bit_cast<double>(get_u64(bytes, pos));
            if (!std::isfinite(v)) throw Error("classifier checkpoint has non-finite weights");
        }
    }
    if (pos != bytes.size()) throw Error("trailing bytes after classifier checkpoint");
    return p;
}

namespace {

template <typename F>
void for_each_tsv_pair(std::string_view text, const std::string& source, F&& f) {
    std::size_t start = 0, line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
            throw Error(source + ":" + std::to_string(line_no) + ": expected 'id<TAB>value'");
        }
        try {
            f(std::string(line.substr(0, tab)), line.substr(tab + 1));
        } catch (const Error& e) {
            throw Error(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

}  // namespace

std::map<std::string, std::string> parse_labels_tsv(std::string_view text, const std::string& source) {
    std::map<std::string, std::string> out;
    for_each_tsv_pair(text, source, [&](std::string id, std::string_view label) {
        if (!is_ac_label(label)) throw Error(source + ": unknown label '" + std::string(label) + "' for " + id);
        if (!out.emplace(std::move(id), std::string(label)).second) throw Error(source + ": duplicate id");
    });
    return out;
}

std::map<std::string, Split> parse_split_tsv(std::string_view text, const std::string& source) {
    std::map<std::string, Split> out;
    for_each_tsv_pair(text, source, [&](std::string id, std::string_view s) {
        if (!out.emplace(std::move(id), split_from_string(s)).second) throw Error("duplicate id");
    });
    return out;
}

std::string labels_to_tsv(const std::map<std::string, std::string>& labels) {
    std::string out;
    for (const auto& [id, l] : labels) out += id + "\t" + l + "\n";
    return out;
}

std::string split_to_tsv(const std::map<std::string, Split>& split) {
    std::string out;
    for (const auto& [id, s] : split) out += id + "\t" + std::string(to_string(s)) + "\n";
    return out;
}

std::map<std::string, Split> stratified_split(const std::map<std::string, std::string>& labels, std::uint64_t seed,
                                              double train_fraction, double val_fraction) {
    if (train_fraction < 0 || val_fraction < 0 || train_fraction + val_fraction > 1.0) {
        throw Error("split fractions must be non-negative and sum to at most 1");
    }
    std::map<std::string, std::vector<std::string>> by_class;
    for (const auto& [id, l] : labels) by_class[l].push_back(id);
    Rng rng(seed);
    std::map<std::string, Split> out;
    for (auto& [label, ids] : by_class) {
        std::shuffle(ids.begin(), ids.end(), rng);
        const auto n = ids.size();
        const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * double(n)));
        const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(val_fraction * double(n))));
        for (std::size_t i = 0; i < n; ++i) {
            out[ids[i]] = i < n_train ? Split::Train : (i < n_train + n_val ? Split::Val : Split::Test);
        }
    }
    return out;
}

}  // namespace artkg
