#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "artkg/classifier.hpp"
#include "artkg/kge.hpp"

namespace artkg {

/// Settings for the end-to-end embedding comparison on a synthetic corpus.
struct AblationConfig {
    std::uint64_t seed = 7;
    std::size_t n_images = 700;
    double class_signal = 0.8;
    double modality_signal = 0.5;
    std::set<std::size_t> kg_signal_classes{0, 1, 2, 3};
    std::set<std::size_t> cv_signal_classes{3, 4, 5, 6};
    std::size_t cv_dim = 64;
    std::size_t anchors_per_class = 100;
    KgeConfig kge;
    MlpConfig mlp;
    std::size_t threads = 1;
};

AblationConfig ablation_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AblationConfig& c);

struct AblationRow {
    std::string input_embedding;
    double macro_f1 = 0.0;
    std::string paradigm;
};

using LogSink = std::function<void(const std::string&)>;

/// Rows in the order: absolute KGE, absolute CV, absolute concat, relative
/// KGE, relative CV, relative hadamard, relative concat.
std::vector<AblationRow> run_ablation(const AblationConfig& cfg, const LogSink& log = {});

std::string ablation_to_csv(const std::vector<AblationRow>& rows);

}  // namespace artkg
