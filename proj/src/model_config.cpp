#include "vinecens/model_config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
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

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(trim(item));
    return parts;
}

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("config: bad numeric value '" + s + "' for " + what);
    }
}

// "<family>[, key=value]..." used by edge, margin and censor lines
struct FamilyLine {
    std::string head;
    std::map<std::string, double> args;
};

FamilyLine parse_family_line(const std::string& value, const std::string& what) {
    FamilyLine out;
    const std::vector<std::string> parts = split(value, ',');
    if (parts.empty() || parts.front().empty()) throw DataError("config: empty value for " + what);
    out.head = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const std::size_t eq = parts[i].find('=');
        if (eq == std::string::npos)
            throw DataError("config: expected key=value in '" + parts[i] + "' for " + what);
        out.args[trim(parts[i].substr(0, eq))] = parse_number(trim(parts[i].substr(eq + 1)), what);
    }
    return out;
}

WeibullMargin parse_weibull(const FamilyLine& line, const std::string& what) {
    if (line.head != "weibull") throw DataError("config: " + what + " must be weibull");
    auto a = line.args.find("alpha");
    auto l = line.args.find("lambda");
    if (a == line.args.end() || l == line.args.end())
        throw DataError("config: " + what + " needs alpha and lambda");
    if (line.args.size() != 2) throw DataError("config: unexpected keys on " + what);
    if (!(a->second > 0.0) || !(l->second > 0.0))
        throw DataError("config: " + what + " parameters must be positive");
    return WeibullMargin{a->second, l->second};
}

double default_theta(Family f) {
    switch (f) {
        case Family::Clayton: return tau_to_theta(Family::Clayton, 0.2);
        case Family::Gumbel: return tau_to_theta(Family::Gumbel, 0.2);
        case Family::Frank: return tau_to_theta(Family::Frank, 0.2);
        case Family::Independence: return 0.0;
    }
    return 0.0;
}

}  // namespace

DVineModel ModelConfig::template_model() const {
    DVineModel m;
    m.d = d;
    m.order = order;
    m.edges.resize(families.size());
    for (std::size_t e = 0; e < families.size(); ++e) {
        m.edges[e].family = families[e];
        m.edges[e].theta = thetas[e] ? *thetas[e] : default_theta(families[e]);
    }
    validate_model(m);
    return m;
}

DVineModel ModelConfig::full_model() const {
    for (std::size_t e = 0; e < thetas.size(); ++e)
        if (!thetas[e] && has_parameter(families[e]))
            throw DataError("config: edge parameters required but missing");
    return template_model();
}

ModelConfig parse_model_config(const std::string& text) {
    ModelConfig cfg;
    std::map<std::string, std::string> edge_lines;
    std::map<int, std::string> margin_lines;
    std::map<std::string, std::string> plain;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.rfind("edge.", 0) == 0) {
            if (!edge_lines.emplace(key.substr(5), value).second)
                throw DataError("config: duplicate " + key);
        } else if (key.rfind("margin.", 0) == 0) {
            const int j = static_cast<int>(parse_number(key.substr(7), "margin index"));
            if (!margin_lines.emplace(j, value).second)
                throw DataError("config: duplicate " + key);
        } else {
            if (!plain.emplace(key, value).second) throw DataError("config: duplicate " + key);
        }
    }

    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = plain.find(key);
        if (it == plain.end()) return std::nullopt;
        std::string v = it->second;
        plain.erase(it);
        return v;
    };

    const std::optional<std::string> dim = take("dimension");
    if (!dim) throw DataError("config: missing dimension");
    cfg.d = static_cast<int>(parse_number(*dim, "dimension"));
    if (cfg.d != 3 && cfg.d != 4) throw DataError("config: dimension must be 3 or 4");

    const std::optional<std::string> order = take("order");
    if (!order) throw DataError("config: missing order");
    for (const std::string& part : split(*order, ','))
        cfg.order.push_back(static_cast<int>(parse_number(part, "order")) - 1);
    if (cfg.order.size() != static_cast<std::size_t>(cfg.d))
        throw DataError("config: order must list each variable once");

    // resolve canonical edge labels from the order
    DVineModel shape;
    shape.d = cfg.d;
    shape.order = cfg.order;
    shape.edges.resize(static_cast<std::size_t>(edge_count(cfg.d)));
    {
        std::vector<bool> seen(static_cast<std::size_t>(cfg.d), false);
        for (int v : cfg.order) {
            if (v < 0 || v >= cfg.d || seen[static_cast<std::size_t>(v)])
                throw DataError("config: order must be a permutation of 1.." + std::to_string(cfg.d));
            seen[static_cast<std::size_t>(v)] = true;
        }
    }
    const std::vector<std::string> labels = edge_labels(shape);

    cfg.families.assign(labels.size(), Family::Independence);
    cfg.thetas.assign(labels.size(), std::nullopt);
    for (std::size_t e = 0; e < labels.size(); ++e) {
        auto it = edge_lines.find(labels[e]);
        if (it == edge_lines.end())
            throw DataError("config: missing edge." + labels[e]);
        const FamilyLine fl = parse_family_line(it->second, "edge." + labels[e]);
        cfg.families[e] = family_from_name(fl.head);
        for (const auto& [k, v] : fl.args) {
            if (k != "theta") throw DataError("config: unknown key '" + k + "' on edge." + labels[e]);
            cfg.thetas[e] = v;
        }
        edge_lines.erase(it);
    }
    if (!edge_lines.empty())
        throw DataError("config: unknown edge label '" + edge_lines.begin()->first +
                        "' (canonical labels follow the order line)");

    if (!margin_lines.empty()) {
        std::string method_seen;
        std::vector<WeibullMargin> margins(static_cast<std::size_t>(cfg.d));
        for (int j = 1; j <= cfg.d; ++j) {
            auto it = margin_lines.find(j);
            if (it == margin_lines.end())
                throw DataError("config: margins must cover every coordinate (missing margin." +
                                std::to_string(j) + ")");
            const FamilyLine fl = parse_family_line(it->second, "margin." + std::to_string(j));
            if (method_seen.empty()) method_seen = fl.head;
            else if (method_seen != fl.head)
                throw DataError("config: all margins must use the same method");
            if (fl.head == "km" || fl.head == "weibull-mle") {
                if (!fl.args.empty())
                    throw DataError("config: margin." + std::to_string(j) + " takes no parameters");
            } else {
                margins[static_cast<std::size_t>(j - 1)] =
                    parse_weibull(fl, "margin." + std::to_string(j));
            }
            margin_lines.erase(it);
        }
        if (!margin_lines.empty()) throw DataError("config: margin index out of range");
        if (method_seen == "km") cfg.margin_method = MarginMethod::KME;
        else if (method_seen == "weibull-mle") cfg.margin_method = MarginMethod::WeibullMLE;
        else if (method_seen == "weibull") {
            cfg.margin_method = MarginMethod::Known;
            cfg.known_margins = margins;
        } else throw DataError("config: unknown margin method '" + method_seen + "'");
    }

    if (const auto v = take("censor")) cfg.censor = parse_weibull(parse_family_line(*v, "censor"), "censor");
    if (const auto v = take("quad.nodes")) {
        cfg.quad_nodes = static_cast<int>(parse_number(*v, "quad.nodes"));
        if (cfg.quad_nodes < 2) throw DataError("config: quad.nodes must be at least 2");
    }
    if (const auto v = take("optimizer.max-evals")) {
        cfg.max_evals = static_cast<int>(parse_number(*v, "optimizer.max-evals"));
        if (cfg.max_evals < 10) throw DataError("config: optimizer.max-evals too small");
    }
    if (const auto v = take("seed")) cfg.seed = static_cast<std::uint64_t>(parse_number(*v, "seed"));
    if (const auto v = take("study.n")) cfg.study_n = static_cast<int>(parse_number(*v, "study.n"));
    if (const auto v = take("study.replicates"))
        cfg.study_replicates = static_cast<int>(parse_number(*v, "study.replicates"));
    if (const auto v = take("study.margin-method")) {
        if (*v == "known") cfg.margin_method = MarginMethod::Known;
        else if (*v == "weibull-mle") cfg.margin_method = MarginMethod::WeibullMLE;
        else if (*v == "km") cfg.margin_method = MarginMethod::KME;
        else throw DataError("config: unknown study.margin-method '" + *v + "'");
    }
    if (!plain.empty()) throw DataError("config: unknown key '" + plain.begin()->first + "'");
    return cfg;
}

ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model_config(buf.str());
}

std::string write_model_config(const ModelConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "dimension = " << cfg.d << "\n";
    out << "order = ";
    for (std::size_t k = 0; k < cfg.order.size(); ++k)
        out << (k ? "," : "") << cfg.order[k] + 1;
    out << "\n";
    DVineModel shape;
    shape.d = cfg.d;
    shape.order = cfg.order;
    shape.edges.resize(cfg.families.size());
    const std::vector<std::string> labels = edge_labels(shape);
    for (std::size_t e = 0; e < labels.size(); ++e) {
        out << "edge." << labels[e] << " = " << family_name(cfg.families[e]);
        if (cfg.thetas[e]) out << ", theta=" << *cfg.thetas[e];
        out << "\n";
    }
    for (int j = 1; j <= cfg.d; ++j) {
        out << "margin." << j << " = ";
        switch (cfg.margin_method) {
            case MarginMethod::KME: out << "km"; break;
            case MarginMethod::WeibullMLE: out << "weibull-mle"; break;
            case MarginMethod::Known:
                out << "weibull, alpha=" << cfg.known_margins[static_cast<std::size_t>(j - 1)].alpha
                    << ", lambda=" << cfg.known_margins[static_cast<std::size_t>(j - 1)].lambda;
                break;
        }
        out << "\n";
    }
    if (cfg.censor)
        out << "censor = weibull, alpha=" << cfg.censor->alpha << ", lambda=" << cfg.censor->lambda
            << "\n";
    if (cfg.study_n) out << "study.n = " << *cfg.study_n << "\n";
    if (cfg.study_replicates) out << "study.replicates = " << *cfg.study_replicates << "\n";
    out << "quad.nodes = " << cfg.quad_nodes << "\n";
    out << "optimizer.max-evals = " << cfg.max_evals << "\n";
    out << "seed = " << cfg.seed << "\n";
    return out.str();
}

StudyConfig to_study_config(const ModelConfig& cfg) {
    StudyConfig sc;
    sc.model = cfg.full_model();
    if (cfg.margin_method == MarginMethod::Known || !cfg.known_margins.empty())
        sc.margins = cfg.known_margins;
    if (sc.margins.empty())
        throw DataError("study config: weibull margins (alpha/lambda) are required to generate data");
    sc.censor = cfg.censor;
    if (!cfg.study_n || !cfg.study_replicates)
        throw DataError("study config: study.n and study.replicates are required");
    sc.n = *cfg.study_n;
    sc.replicates = *cfg.study_replicates;
    sc.margin_method = cfg.margin_method;
    sc.seed = cfg.seed;
    sc.fit.quad_nodes = cfg.quad_nodes;
    sc.fit.max_evals = cfg.max_evals;
    return sc;
}

}  // namespace vinecens
