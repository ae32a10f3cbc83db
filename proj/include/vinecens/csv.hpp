#pragma once

#include <string>
#include <vector>

#include "vinecens/estimation.hpp"
#include "vinecens/simulation.hpp"
#include "vinecens/types.hpp"

namespace vinecens {

// CSV with header id,y1..yd,d1..dd; d inferred from the header.
std::vector<ObservedCluster> load_clusters(const std::string& path);
std::vector<ObservedCluster> parse_clusters(const std::string& text, const std::string& origin);

std::string fit_result_csv(const FitResult& r);
std::string fit_result_summary(const FitResult& r, std::size_t n_clusters);
std::string study_result_csv(const DVineModel& model, const StudyResult& r);

struct CompareRow {
    std::string label;
    double loglik = 0.0;
    int k = 0;  // free parameters
    double aic = 0.0;
    double bic = 0.0;
};

std::string compare_table_csv(const std::vector<CompareRow>& rows);
std::string compare_table_text(const std::vector<CompareRow>& rows);

}  // namespace vinecens
