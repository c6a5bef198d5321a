#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "artkg/store.hpp"
#include "artkg/util.hpp"

namespace artkg {

enum class Optimizer { Sgd, Adam };

struct MlpConfig {
    std::size_t in_dim = 0;
    std::size_t hidden_dim = 256;
    std::size_t out_dim = 7;
    double dropout = 0.3;
    double learning_rate = 0.001;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::Adam;
    /// Z-score inputs with training-split statistics while training; the
    /// affine map is folded into the first layer afterwards.
    bool standardize_inputs = true;

    void validate() const;
};

MlpConfig mlp_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MlpConfig& c);

/// Linear(in, hidden) -> ReLU -> Dropout -> Linear(hidden, out).
struct MlpParams {
    std::size_t in_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> w1;  // hidden x in, row-major
    std::vector<double> b1;
    std::vector<double> w2;  // out x hidden, row-major
    std::vector<double> b2;

    static MlpParams zeros(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim);
    /// Uniform in +-1/sqrt(fan_in) for weights and biases.
    static MlpParams init(const MlpConfig& cfg);

    std::size_t parameter_count() const noexcept { return w1.size() + b1.size() + w2.size() + b2.size(); }
    /// Flat views in the order w1, b1, w2, b2.
    std::array<std::span<double>, 4> blocks();
    std::array<std::span<const double>, 4> blocks() const;

    bool operator==(const MlpParams&) const = default;
};

struct ForwardCache {
    std::vector<double> pre_activation;  // W1 x + b1
    std::vector<double> mask;            // 0 or 1/(1-p) per hidden unit
    std::vector<double> hidden;          // after ReLU and dropout
    std::vector<double> logits;
};

/// Dropout is applied only when `train_mode` is set; inverted scaling keeps
/// eval mode free of rescaling and of any rng use.
ForwardCache forward(const MlpParams& p, std::span<const double> x, bool train_mode, double dropout, Rng& rng);
std::vector<double> forward_eval(const MlpParams& p, std::span<const double> x);

struct Example {
    std::span<const double> x;
    std::size_t label = 0;
};

struct LossAndGrad {
    double loss = 0.0;
    MlpParams grad;
};

/// Mean softmax cross-entropy over the batch with its backprop gradient.
LossAndGrad loss_and_grad(const MlpParams& p, std::span<const Example> batch, bool train_mode, double dropout, Rng& rng);

std::vector<double> softmax(std::span<const double> logits);

enum class Split { Train, Val, Test };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

struct LabeledDataset {
    EmbeddingStore store;
    std::map<std::string, std::string> labels;
    std::map<std::string, Split> split;

    /// Ids of one split, in store order. Throws if any store id is
    /// unlabeled or unassigned.
    std::vector<std::string> ids(Split s) const;
};

struct InputScaling {
    std::vector<double> mean;
    std::vector<double> scale;  // 1 / std, or 1 for constant features
};

InputScaling fit_input_scaling(const EmbeddingStore& store, const std::vector<std::string>& ids);

/// Folds x -> (x - mean) * scale into W1 and b1.
void fold_input_scaling(MlpParams& p, const InputScaling& s);

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_macro_f1 = 0.0;
};

struct TrainResult {
    MlpParams params;
    std::vector<EpochStats> history;
};

/// Shuffled minibatches each epoch from a seeded generator.
TrainResult train_classifier(const LabeledDataset& ds, const MlpConfig& cfg,
                             const std::vector<std::string>& classes);

struct Prediction {
    std::string id;
    std::string label;
    std::vector<double> probabilities;
};

/// Argmax of softmax; ties go to the earliest (alphabetical) class.
std::vector<Prediction> predict(const MlpParams& p, const EmbeddingStore& store, const std::vector<std::string>& ids,
                                const std::vector<std::string>& classes);

struct ClassScores {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    bool present = false;  // predicted or gold at least once
};

/// Per-class P/R/F1; zero denominators count as zero.
std::vector<ClassScores> per_class_scores(const std::map<std::string, std::string>& preds,
                                          const std::map<std::string, std::string>& golds,
                                          const std::vector<std::string>& classes);

/// Unweighted mean F1 over classes that occur in predictions or golds.
double macro_f1(const std::map<std::string, std::string>& preds, const std::map<std::string, std::string>& golds,
                const std::vector<std::string>& classes);

std::string history_to_csv(const std::vector<EpochStats>& history);
std::string predictions_to_tsv(const std::vector<Prediction>& preds);

// Params checkpoint: "ATMP" magic, version, dims, seed, then float64 blocks.
std::string save_mlp(const MlpParams& p, std::uint64_t seed);
MlpParams load_mlp(std::string_view bytes);

std::map<std::string, std::string> parse_labels_tsv(std::string_view text, const std::string& source = "<labels>");
std::map<std::string, Split> parse_split_tsv(std::string_view text, const std::string& source = "<split>");
std::string labels_to_tsv(const std::map<std::string, std::string>& labels);
std::string split_to_tsv(const std::map<std::string, Split>& split);

/// Per class: shuffle with `seed`, then take round(0.8 n) train, round(0.1 n)
/// val and the rest test.
std::map<std::string, Split> stratified_split(const std::map<std::string, std::string>& labels, std::uint64_t seed,
                                              double train_fraction = 0.8, double val_fraction = 0.1);

}  // namespace artkg
