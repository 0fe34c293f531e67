#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace motlab {

enum class MotilityFamily { constant, exp_decay, rational, polynomial };

/// Signal-dependent motility phi(xi) on xi >= 0, guaranteed strictly positive
/// on the certified range at construction time.
///
/// Parameter layouts:
///   constant    {c}          phi = c
///   exp_decay   {a, b}       phi = a e^{-xi} + b
///   rational    {a, b, k}    phi = a (1 + xi)^{-k} + b
///   polynomial  {c0..cm}     phi = sum ci xi^i   (ascending powers)
struct MotilitySpec {
    MotilityFamily family = MotilityFamily::constant;
    std::vector<double> parameters;

    double value(double xi) const;
    double derivative(double xi) const;
    double operator()(double xi) const { return value(xi); }
};

/// Bounds c1 <= phi <= c2 and |phi'| <= c3 valid on [0, sup_v], certified by
/// dense sampling with a 1% safety margin.
struct MotilityBounds {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double sup_v = 0.0;
};

/// Validates the family parameters and certifies positivity of phi on the
/// relevant range (closed-form criteria for constant/exp_decay/rational,
/// dense sampling on [0, 10] plus leading-coefficient sign for polynomial).
/// Throws std::invalid_argument on any violation.
MotilitySpec make_motility(MotilityFamily family, std::span<const double> parameters);
MotilitySpec make_motility(const std::string& family, std::span<const double> parameters);

inline MotilitySpec make_motility(MotilityFamily family, std::initializer_list<double> params) {
    return make_motility(family, std::span<const double>(params.begin(), params.size()));
}
inline MotilitySpec make_motility(const std::string& family,
                                  std::initializer_list<double> params) {
    return make_motility(family, std::span<const double>(params.begin(), params.size()));
}

const char* motility_family_name(MotilityFamily family);

/// Samples phi and phi' on [0, sup_v] (>= 4096 points) and returns margined
/// bounds: c1 = 0.99 min, c2 = 1.01 max, c3 = 1.01 max|phi'|.  Enlarging
/// sup_v never tightens any bound.
MotilityBounds certify_bounds(const MotilitySpec& phi, double sup_v);

}  // namespace motlab
