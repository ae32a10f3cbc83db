#include "vinecens/csv.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "vinecens/errors.hpp"

namespace vinecens {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

std::vector<ObservedCluster> parse_clusters(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError(origin + ": no clusters");
    const std::vector<std::string> header = split_csv(line);
    if (header.empty() || header.front() != "id")
        throw DataError(origin + ": header must start with 'id'");
    const std::size_t cols = header.size();
    if (cols < 3 || (cols - 1) % 2 != 0)
        throw DataError(origin + ": header must be id,y1..yd,d1..dd");
    const std::size_t d = (cols - 1) / 2;
    for (std::size_t j = 0; j < d; ++j) {
        if (header[1 + j] != "y" + std::to_string(j + 1) ||
            header[1 + d + j] != "d" + std::to_string(j + 1))
            throw DataError(origin + ": header must be id,y1..yd,d1..dd");
    }

    std::vector<ObservedCluster> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv(line);
        const std::string where = origin + " line " + std::to_string(lineno);
        if (cells.size() != cols)
            throw DataError(where + ": expected " + std::to_string(cols) + " fields, got " +
                            std::to_string(cells.size()));
        ObservedCluster cl;
        try {
            cl.id = std::stol(cells[0]);
        } catch (const std::exception&) {
            throw DataError(where + ": bad id '" + cells[0] + "'");
        }
        cl.y.resize(d);
        cl.delta.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            try {
                std::size_t used = 0;
                cl.y[j] = std::stod(cells[1 + j], &used);
                if (used != cells[1 + j].size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw DataError(where + ": bad time '" + cells[1 + j] + "'");
            }
            if (!std::isfinite(cl.y[j]) || cl.y[j] < 0.0)
                throw DataError(where + ": times must be finite and nonnegative");
            const std::string& ds = cells[1 + d + j];
            if (ds == "0") cl.delta[j] = 0;
            else if (ds == "1") cl.delta[j] = 1;
            else throw DataError(where + ": censoring indicator must be 0 or 1, got '" + ds + "'");
        }
        out.push_back(std::move(cl));
    }
    if (out.empty()) throw DataError(origin + ": no clusters");
    return out;
}

std::vector<ObservedCluster> load_clusters(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_clusters(buf.str(), path);
}

std::string fit_result_csv(const FitResult& r) {
    std::ostringstream out;
    out.precision(10);
    out << "edge,family,theta,tau,lower_tail,upper_tail,se_theta,se_tau\n";
    const std::vector<std::string> labels = edge_labels(r.model);
    for (std::size_t e = 0; e < labels.size(); ++e) {
        out << labels[e] << "," << family_name(r.model.edges[e].family) << "," << r.theta_hat[e]
            << "," << r.tau_hat[e] << "," << r.tail_dep[e].lower << "," << r.tail_dep[e].upper;
        if (r.se_theta) out << "," << (*r.se_theta)[e]; else out << ",";
        if (r.se_tau) out << "," << (*r.se_tau)[e]; else out << ",";
        out << "\n";
    }
    return out.str();
}

std::string fit_result_summary(const FitResult& r, std::size_t n_clusters) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "method: " << fit_method_name(r.method) << "\n";
    out << "clusters: " << n_clusters << "\n";
    out << "loglik: " << r.loglik << "\n\n";
    out << std::left << std::setw(10) << "edge" << std::setw(10) << "family" << std::right
        << std::setw(10) << "theta" << std::setw(8) << "tau" << std::setw(10) << "lowerTD"
        << std::setw(10) << "upperTD";
    if (r.se_theta) out << std::setw(12) << "se(theta)" << std::setw(10) << "se(tau)";
    out << "\n";
    const std::vector<std::string> labels = edge_labels(r.model);
    for (std::size_t e = 0; e < labels.size(); ++e) {
        out << std::left << std::setw(10) << labels[e] << std::setw(10)
            << family_name(r.model.edges[e].family) << std::right << std::setw(10) << r.theta_hat[e]
            << std::setw(8) << r.tau_hat[e] << std::setw(10) << r.tail_dep[e].lower << std::setw(10)
            << r.tail_dep[e].upper;
        if (r.se_theta) out << std::setw(12) << (*r.se_theta)[e] << std::setw(10) << (*r.se_tau)[e];
        out << "\n";
    }
    if (r.diagnostics.clamp_count > 0)
        out << "\nnote: " << r.diagnostics.clamp_count
            << " pseudo-observations clamped away from the 0/1 boundary\n";
    if (!r.diagnostics.converged) out << "\nwarning: optimizer hit the evaluation cap\n";
    for (const std::string& w : r.diagnostics.warnings) out << "warning: " << w << "\n";
    return out.str();
}

std::string study_result_csv(const DVineModel& model, const StudyResult& r) {
    std::ostringstream out;
    out.precision(10);
    out << "edge,family,theta,theta_mean,theta_bias,theta_s2,theta_mse,"
           "tau,tau_mean,tau_bias,tau_s2,tau_mse\n";
    const std::vector<std::string> labels = edge_labels(model);
    for (std::size_t e = 0; e < labels.size(); ++e) {
        out << labels[e] << "," << family_name(model.edges[e].family) << "," << r.theta_true[e]
            << "," << r.theta[e].mean << "," << r.theta[e].bias << "," << r.theta[e].s2 << ","
            << r.theta[e].mse << "," << r.tau_true[e] << "," << r.tau[e].mean << ","
            << r.tau[e].bias << "," << r.tau[e].s2 << "," << r.tau[e].mse << "\n";
    }
    return out.str();
}

std::string compare_table_csv(const std::vector<CompareRow>& rows) {
    std::ostringstream out;
    out.precision(10);
    out << "model,loglik,k,aic,bic\n";
    for (const CompareRow& row : rows)
        out << row.label << "," << row.loglik << "," << row.k << "," << row.aic << "," << row.bic
            << "\n";
    return out.str();
}

std::string compare_table_text(const std::vector<CompareRow>& rows) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << std::left << std::setw(32) << "model" << std::right << std::setw(12) << "loglik"
        << std::setw(5) << "k" << std::setw(12) << "AIC" << std::setw(12) << "BIC" << "\n";
    for (const CompareRow& row : rows)
        out << std::left << std::setw(32) << row.label << std::right << std::setw(12) << row.loglik
            << std::setw(5) << row.k << std::setw(12) << row.aic << std::setw(12) << row.bic
            << "\n";
    return out.str();
}

}  // namespace vinecens
