#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vinecens/margins.hpp"
#include "vinecens/simulation.hpp"
#include "vinecens/vine.hpp"

namespace vinecens {

// Plain-text key-value model description. Keys:
//   dimension = 4
//   order = 1,3,4,2                      (1-based variable indices)
//   edge.<label> = <family>[, theta=<v>] (one line per canonical edge)
//   margin.<j> = km | weibull-mle | weibull, alpha=<a>, lambda=<l>
//   censor = weibull, alpha=<a>, lambda=<l>      (study configs)
//   study.n / study.replicates / study.margin-method
//   quad.nodes / optimizer.max-evals / seed
// Unknown keys are rejected.
struct ModelConfig {
    int d = 0;
    std::vector<int> order;                       // 0-based
    std::vector<Family> families;                 // canonical edge order
    std::vector<std::optional<double>> thetas;    // per edge, optional
    MarginMethod margin_method = MarginMethod::KME;
    std::vector<WeibullMargin> known_margins;     // used when margin_method == Known
    int quad_nodes = 21;
    int max_evals = 2000;
    std::uint64_t seed = 0;

    std::optional<WeibullMargin> censor;
    std::optional<int> study_n;
    std::optional<int> study_replicates;

    // template with defaulted parameters where unset (usable as a fit start)
    DVineModel template_model() const;
    // requires every theta to be present
    DVineModel full_model() const;
};

ModelConfig parse_model_config(const std::string& text);
ModelConfig load_model_config(const std::string& path);
std::string write_model_config(const ModelConfig& cfg);

StudyConfig to_study_config(const ModelConfig& cfg);

}  // namespace vinecens
