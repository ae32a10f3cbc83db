#include "vinecens/vine.hpp"

#include <algorithm>
#include <cmath>

#include "vinecens/errors.hpp"
#include "vinecens/quadrature.hpp"
#include "vinecens/rng.hpp"

namespace vinecens {

namespace {

// work point in path coordinates: w[k] belongs to the variable at path
// position k
struct PathPoint {
    std::array<double, 4> w{};
    std::array<bool, 4> event{};
};

PathPoint to_path(const DVineModel& m, std::span<const double> u,
                  const CensoringPattern* pattern) {
    PathPoint p;
    for (int k = 0; k < m.d; ++k) {
        const int var = m.order[static_cast<std::size_t>(k)];
        p.w[static_cast<std::size_t>(k)] = u[static_cast<std::size_t>(var)];
        p.event[static_cast<std::size_t>(k)] =
            pattern ? pattern->uncensored[static_cast<std::size_t>(var)] : true;
    }
    return p;
}

// ---- 3-dimensional catalog ----------------------------------------------
//
// Path 1-2-3 with edges c12, c23 and c13;2. The integrand at a2 (the value of
// the middle coordinate) carries a first-tree density factor per uncensored
// outer coordinate and a second-tree term whose form is the CDF, an
// h-function or the density of c13;2 depending on which outer coordinates are
// uncensored.
double integrand3(const DVineModel& m, double w1, double w3, double a2, bool e1, bool e3) {
    const PairCopula& c12 = m.edges[0];
    const PairCopula& c23 = m.edges[1];
    const PairCopula& c13_2 = m.edges[2];
    const double x = hfunc(c12, w1, a2, HDir::UGivenV);   // h_{1|2}
    const double y = hfunc(c23, a2, w3, HDir::VGivenU);   // h_{3|2}
    double value = 1.0;
    if (e1) value *= copula_pdf(c12, w1, a2);
    if (e3) value *= copula_pdf(c23, a2, w3);
    if (e1 && e3)
        value *= copula_pdf(c13_2, x, y);
    else if (e1)
        value *= hfunc(c13_2, x, y, HDir::VGivenU);       // h_{3|1;2}
    else if (e3)
        value *= hfunc(c13_2, x, y, HDir::UGivenV);       // h_{1|3;2}
    else
        value *= copula_cdf(c13_2, x, y);
    return value;
}

double partial3(const DVineModel& m, const PathPoint& p, int quad_nodes) {
    const bool e1 = p.event[0], e2 = p.event[1], e3 = p.event[2];
    if (e2) return integrand3(m, p.w[0], p.w[2], p.w[1], e1, e3);
    const GaussLegendre& rule = gauss_legendre(quad_nodes);
    const double upper = p.w[1];
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        sum += rule.weights[k] * integrand3(m, p.w[0], p.w[2], upper * rule.nodes[k], e1, e3);
    return sum * upper;
}

// ---- 4-dimensional catalog ----------------------------------------------
//
// Path 1-2-3-4, edges c12, c23, c34, c13;2, c24;3, c14;23. At inner values
// (a2,a3) the integrand is c23(a2,a3) times first/second-tree density factors
// for each uncensored outer coordinate and a third-tree term selected by the
// outer censoring flags:
//   both censored   C_{14;23}(x,y)
//   only 1 observed h_{4|1;23}(y|x)
//   only 4 observed h_{1|4;23}(x|y)
//   both observed   c_{14;23}(x,y)
// with x = C_{1|23}(w1|a2,a3) and y = C_{4|23}(w4|a2,a3).
//
// h12 and the c12 density depend on a2 only, h43 and the c34 density on a3
// only; the grid evaluator hoists them per axis.
double integrand4(const DVineModel& m, double a2, double a3, bool e1, bool e4, double h12,
                  double c12_pdf, double h43, double c34_pdf) {
    const PairCopula& c23 = m.edges[1];
    const PairCopula& c13_2 = m.edges[3];
    const PairCopula& c24_3 = m.edges[4];
    const PairCopula& c14_23 = m.edges[5];

    const double h32 = hfunc(c23, a2, a3, HDir::VGivenU);   // h_{3|2}(a3|a2)
    const double h23 = hfunc(c23, a2, a3, HDir::UGivenV);   // h_{2|3}(a2|a3)
    const double x = hfunc(c13_2, h12, h32, HDir::UGivenV); // C_{1|23}
    const double y = hfunc(c24_3, h23, h43, HDir::VGivenU); // C_{4|23}

    double value = copula_pdf(c23, a2, a3);
    if (e1) value *= c12_pdf * copula_pdf(c13_2, h12, h32);
    if (e4) value *= c34_pdf * copula_pdf(c24_3, h23, h43);
    if (e1 && e4)
        value *= copula_pdf(c14_23, x, y);
    else if (e1)
        value *= hfunc(c14_23, x, y, HDir::VGivenU);        // h_{4|1;23}
    else if (e4)
        value *= hfunc(c14_23, x, y, HDir::UGivenV);        // h_{1|4;23}
    else
        value *= copula_cdf(c14_23, x, y);
    return value;
}

double integrand4_at(const DVineModel& m, double w1, double w4, double a2, double a3, bool e1,
                     bool e4) {
    const PairCopula& c12 = m.edges[0];
    const PairCopula& c34 = m.edges[2];
    const double h12 = hfunc(c12, w1, a2, HDir::UGivenV);
    const double h43 = hfunc(c34, a3, w4, HDir::VGivenU);
    const double c12_pdf = e1 ? copula_pdf(c12, w1, a2) : 1.0;
    const double c34_pdf = e4 ? copula_pdf(c34, a3, w4) : 1.0;
    return integrand4(m, a2, a3, e1, e4, h12, c12_pdf, h43, c34_pdf);
}

double partial4(const DVineModel& m, const PathPoint& p, int quad_nodes) {
    const bool e1 = p.event[0], e2 = p.event[1], e3 = p.event[2], e4 = p.event[3];
    if (e2 && e3) return integrand4_at(m, p.w[0], p.w[3], p.w[1], p.w[2], e1, e4);
    const GaussLegendre& rule = gauss_legendre(quad_nodes);
    if (e2) {  // single integral over the third coordinate
        const double upper = p.w[2];
        double sum = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            sum += rule.weights[k] *
                   integrand4_at(m, p.w[0], p.w[3], p.w[1], upper * rule.nodes[k], e1, e4);
        return sum * upper;
    }
    if (e3) {  // single integral over the second coordinate
        const double upper = p.w[1];
        double sum = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            sum += rule.weights[k] *
                   integrand4_at(m, p.w[0], p.w[3], upper * rule.nodes[k], p.w[2], e1, e4);
        return sum * upper;
    }
    // double integral over both inner coordinates; per-axis factors hoisted
    const double u2 = p.w[1], u3 = p.w[2];
    const PairCopula& c12 = m.edges[0];
    const PairCopula& c34 = m.edges[2];
    const std::size_t n = rule.nodes.size();
    std::array<double, 64> h12_col, c12_col, h43_col, c34_col;
    const std::size_t cap = std::min<std::size_t>(n, h12_col.size());
    std::vector<double> h12_dyn, c12_dyn, h43_dyn, c34_dyn;
    double* h12v = h12_col.data();
    double* c12v = c12_col.data();
    double* h43v = h43_col.data();
    double* c34v = c34_col.data();
    if (n > cap) {
        h12_dyn.resize(n); c12_dyn.resize(n); h43_dyn.resize(n); c34_dyn.resize(n);
        h12v = h12_dyn.data(); c12v = c12_dyn.data();
        h43v = h43_dyn.data(); c34v = c34_dyn.data();
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double a2 = u2 * rule.nodes[i];
        h12v[i] = hfunc(c12, p.w[0], a2, HDir::UGivenV);
        c12v[i] = e1 ? copula_pdf(c12, p.w[0], a2) : 1.0;
        const double a3 = u3 * rule.nodes[i];
        h43v[i] = hfunc(c34, a3, p.w[3], HDir::VGivenU);
        c34v[i] = e4 ? copula_pdf(c34, a3, p.w[3]) : 1.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a2 = u2 * rule.nodes[i];
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            inner += rule.weights[j] * integrand4(m, a2, u3 * rule.nodes[j], e1, e4, h12v[i],
                                                  c12v[i], h43v[j], c34v[j]);
        sum += rule.weights[i] * inner;
    }
    return sum * u2 * u3;
}

}  // namespace

int edge_count(int d) { return d * (d - 1) / 2; }

void validate_model(const DVineModel& m) {
    if (m.d != 3 && m.d != 4) throw StructureError("D-vine dimension must be 3 or 4");
    if (m.order.size() != static_cast<std::size_t>(m.d))
        throw StructureError("order length must equal dimension");
    std::vector<bool> seen(static_cast<std::size_t>(m.d), false);
    for (int v : m.order) {
        if (v < 0 || v >= m.d || seen[static_cast<std::size_t>(v)])
            throw StructureError("order must be a permutation of the variable indices");
        seen[static_cast<std::size_t>(v)] = true;
    }
    if (m.edges.size() != static_cast<std::size_t>(edge_count(m.d)))
        throw StructureError("edge count must be d(d-1)/2");
    for (const PairCopula& e : m.edges) validate_copula(e);
}

std::vector<std::string> edge_labels(const DVineModel& m) {
    auto v = [&](int k) { return std::to_string(m.order[static_cast<std::size_t>(k)] + 1); };
    std::vector<std::string> labels;
    for (int k = 0; k + 1 < m.d; ++k) labels.push_back(v(k) + v(k + 1));
    for (int k = 0; k + 2 < m.d; ++k) labels.push_back(v(k) + v(k + 2) + ";" + v(k + 1));
    if (m.d == 4) labels.push_back(v(0) + v(3) + ";" + v(1) + v(2));
    return labels;
}

CensoringPattern censoring_pattern(std::span<const int> delta) {
    if (delta.size() != 3 && delta.size() != 4)
        throw StructureError("censoring pattern needs 3 or 4 indicators");
    CensoringPattern p;
    p.d = static_cast<int>(delta.size());
    for (std::size_t j = 0; j < delta.size(); ++j) {
        if (delta[j] != 0 && delta[j] != 1)
            throw DataError("censoring indicators must be 0 or 1");
        p.uncensored[j] = delta[j] == 1;
    }
    return p;
}

std::string pattern_label(const CensoringPattern& p) {
    std::string inner;
    for (int j = 0; j < p.d; ++j) {
        if (!p.uncensored[static_cast<std::size_t>(j)]) continue;
        if (!inner.empty()) inner += ",";
        inner += std::to_string(j + 1);
    }
    return "D(" + inner + ")";
}

double vine_density(const DVineModel& m, std::span<const double> u) {
    if (u.size() != static_cast<std::size_t>(m.d))
        throw StructureError("point dimension must match the model");
    CensoringPattern all;
    all.d = m.d;
    all.uncensored.fill(true);
    const PathPoint p = to_path(m, u, &all);
    return m.d == 3 ? partial3(m, p, 1) : partial4(m, p, 1);
}

double vine_partial_derivative(const DVineModel& m, const CensoringPattern& pattern,
                               std::span<const double> u, int quad_nodes) {
    if (pattern.d != m.d) throw StructureError("pattern dimension must match the model");
    if (u.size() != static_cast<std::size_t>(m.d))
        throw StructureError("point dimension must match the model");
    if (quad_nodes < 2) throw NumericalError("quadrature needs at least 2 nodes");
    const PathPoint p = to_path(m, u, &pattern);
    const double value = m.d == 3 ? partial3(m, p, quad_nodes) : partial4(m, p, quad_nodes);
    if (!std::isfinite(value))
        throw NumericalError("partial derivative evaluation produced a non-finite value");
    return value;
}

double vine_conditional_cdf(const DVineModel& m, int target, std::span<const int> given,
                            std::span<const double> u) {
    validate_model(m);
    if (u.size() != static_cast<std::size_t>(m.d))
        throw StructureError("point dimension must match the model");
    std::vector<int> pos(static_cast<std::size_t>(m.d));
    for (int k = 0; k < m.d; ++k) pos[static_cast<std::size_t>(m.order[static_cast<std::size_t>(k)])] = k;
    auto wval = [&](int k) { return u[static_cast<std::size_t>(m.order[static_cast<std::size_t>(k)])]; };

    if (target < 0 || target >= m.d) throw StructureError("conditional_cdf: bad target");
    const int tp = pos[static_cast<std::size_t>(target)];

    if (given.size() == 1) {
        const int gp = pos[static_cast<std::size_t>(given[0])];
        if (std::abs(tp - gp) != 1)
            throw StructureError("conditional_cdf: conditioning variable must be a first-tree neighbour");
        const int k = std::min(tp, gp);  // first-tree edge index
        const PairCopula& edge = m.edges[static_cast<std::size_t>(k)];
        // edge arguments are (w_k, w_{k+1}); differentiate in the conditioning one
        return tp < gp ? hfunc(edge, wval(tp), wval(gp), HDir::UGivenV)
                       : hfunc(edge, wval(gp), wval(tp), HDir::VGivenU);
    }
    if (given.size() == 2) {
        const int g1 = pos[static_cast<std::size_t>(given[0])];
        const int g2 = pos[static_cast<std::size_t>(given[1])];
        const int lo = std::min({tp, g1, g2});
        const int hi = std::max({tp, g1, g2});
        const bool contiguous = hi - lo == 2 && tp + g1 + g2 == lo + lo + 1 + lo + 2;
        if (!contiguous || (tp != lo && tp != hi))
            throw StructureError("conditional_cdf: conditioning set must be contiguous with the target at an end");
        const PairCopula& left = m.edges[static_cast<std::size_t>(lo)];
        const PairCopula& right = m.edges[static_cast<std::size_t>(lo + 1)];
        const PairCopula& t2 = m.edges[static_cast<std::size_t>(m.d - 1 + lo)];
        // second-tree edge arguments: (C_{lo|mid}, C_{hi|mid})
        const double x = hfunc(left, wval(lo), wval(lo + 1), HDir::UGivenV);
        const double y = hfunc(right, wval(lo + 1), wval(lo + 2), HDir::VGivenU);
        return tp == lo ? hfunc(t2, x, y, HDir::UGivenV) : hfunc(t2, x, y, HDir::VGivenU);
    }
    throw StructureError("conditional_cdf: conditioning sets of size 1 or 2 only");
}

std::vector<std::vector<double>> sample_vine(const DVineModel& m, std::size_t n,
                                             std::uint64_t seed) {
    validate_model(m);
    UniformRng rng(seed);
    std::vector<std::vector<double>> out(n);
    const PairCopula& c12 = m.edges[0];
    const PairCopula& c23 = m.edges[1];
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, 4> w{};
        w[0] = rng.next();
        w[1] = hinv(c12, rng.next(), w[0], HDir::VGivenU);
        {
            // invert C_{3|12} = h_{3|1;2}( h_{3|2} | h_{1|2} )
            const PairCopula& c13_2 = m.edges[static_cast<std::size_t>(m.d - 1)];
            const double h12 = hfunc(c12, w[0], w[1], HDir::UGivenV);
            const double inner = hinv(c13_2, rng.next(), h12, HDir::VGivenU);
            w[2] = hinv(c23, inner, w[1], HDir::VGivenU);
        }
        if (m.d == 4) {
            // invert C_{4|123} = h_{4|1;23}( C_{4|23} | C_{1|23} ) layer by layer
            const PairCopula& c34 = m.edges[2];
            const PairCopula& c13_2 = m.edges[3];
            const PairCopula& c24_3 = m.edges[4];
            const PairCopula& c14_23 = m.edges[5];
            const double h12 = hfunc(c12, w[0], w[1], HDir::UGivenV);
            const double h32 = hfunc(c23, w[1], w[2], HDir::VGivenU);
            const double h23 = hfunc(c23, w[1], w[2], HDir::UGivenV);
            const double x = hfunc(c13_2, h12, h32, HDir::UGivenV);  // C_{1|23}
            const double z = hinv(c14_23, rng.next(), x, HDir::VGivenU);
            const double y = hinv(c24_3, z, h23, HDir::VGivenU);
            w[3] = hinv(c34, y, w[2], HDir::VGivenU);
        }
        std::vector<double> point(static_cast<std::size_t>(m.d));
        for (int k = 0; k < m.d; ++k)
            point[static_cast<std::size_t>(m.order[static_cast<std::size_t>(k)])] =
                w[static_cast<std::size_t>(k)];
        out[i] = std::move(point);
    }
    return out;
}

}  // namespace vinecens
