#include "motlab/motility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace motlab {

namespace {

constexpr double kPolynomialCheckRange = 10.0;
constexpr int kSampleCount = 4096;

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument("make_motility: " + message);
}

void require_finite(std::span<const double> parameters) {
    for (double p : parameters) {
        require(std::isfinite(p), "parameters must be finite");
    }
}

}  // namespace

double MotilitySpec::value(double xi) const {
    switch (family) {
        case MotilityFamily::constant:
            return parameters[0];
        case MotilityFamily::exp_decay:
            return parameters[0] * std::exp(-xi) + parameters[1];
        case MotilityFamily::rational:
            return parameters[0] * std::pow(1.0 + xi, -parameters[2]) + parameters[1];
        case MotilityFamily::polynomial: {
            double acc = 0.0;
            for (std::size_t i = parameters.size(); i-- > 0;) acc = acc * xi + parameters[i];
            return acc;
        }
    }
    throw std::logic_error("MotilitySpec: unknown family");
}

double MotilitySpec::derivative(double xi) const {
    switch (family) {
        case MotilityFamily::constant:
            return 0.0;
        case MotilityFamily::exp_decay:
            return -parameters[0] * std::exp(-xi);
        case MotilityFamily::rational:
            return -parameters[0] * parameters[2] * std::pow(1.0 + xi, -parameters[2] - 1.0);
        case MotilityFamily::polynomial: {
            double acc = 0.0;
            for (std::size_t i = parameters.size(); i-- > 1;) {
                acc = acc * xi + static_cast<double>(i) * parameters[i];
            }
            return acc;
        }
    }
    throw std::logic_error("MotilitySpec: unknown family");
}

MotilitySpec make_motility(MotilityFamily family, std::span<const double> parameters) {
    require_finite(parameters);
    MotilitySpec spec;
    spec.family = family;
    spec.parameters.assign(parameters.begin(), parameters.end());
    switch (family) {
        case MotilityFamily::constant:
            require(parameters.size() == 1, "constant takes one parameter {c}");
            require(parameters[0] > 0.0, "constant motility must be positive");
            break;
        case MotilityFamily::exp_decay:
            // phi = a e^{-xi} + b decreases to b (a >= 0) or increases from
            // a + b (a < 0); positivity on [0, inf) is b >= 0 and a + b > 0.
            require(parameters.size() == 2, "exp_decay takes two parameters {a, b}");
            require(parameters[1] >= 0.0, "exp_decay tail value b must be >= 0");
            require(parameters[0] + parameters[1] > 0.0, "exp_decay needs a + b > 0");
            break;
        case MotilityFamily::rational:
            require(parameters.size() == 3, "rational takes three parameters {a, b, k}");
            require(parameters[2] >= 0.0, "rational exponent k must be >= 0");
            require(parameters[1] >= 0.0, "rational tail value b must be >= 0");
            require(parameters[0] + parameters[1] > 0.0, "rational needs a + b > 0");
            break;
        case MotilityFamily::polynomial: {
            require(!parameters.empty(), "polynomial needs at least one coefficient");
            std::size_t degree = parameters.size();
            while (degree > 1 && parameters[degree - 1] == 0.0) --degree;
            require(parameters[degree - 1] > 0.0,
                    "polynomial leading coefficient must be positive");
            for (int i = 0; i < kSampleCount; ++i) {
                const double xi = kPolynomialCheckRange * i / (kSampleCount - 1);
                require(spec.value(xi) > 0.0,
                        "polynomial is not positive at xi = " + std::to_string(xi));
            }
            break;
        }
    }
    return spec;
}

MotilitySpec make_motility(const std::string& family, std::span<const double> parameters) {
    if (family == "constant") return make_motility(MotilityFamily::constant, parameters);
    if (family == "exp_decay") return make_motility(MotilityFamily::exp_decay, parameters);
    if (family == "rational") return make_motility(MotilityFamily::rational, parameters);
    if (family == "polynomial") return make_motility(MotilityFamily::polynomial, parameters);
    throw std::invalid_argument("make_motility: unknown family '" + family + "'");
}

const char* motility_family_name(MotilityFamily family) {
    switch (family) {
        case MotilityFamily::constant: return "constant";
        case MotilityFamily::exp_decay: return "exp_decay";
        case MotilityFamily::rational: return "rational";
        case MotilityFamily::polynomial: return "polynomial";
    }
    throw std::logic_error("motility_family_name: unknown family");
}

MotilityBounds certify_bounds(const MotilitySpec& phi, double sup_v) {
    if (!(sup_v >= 0.0) || !std::isfinite(sup_v)) {
        throw std::invalid_argument("certify_bounds: sup_v must be finite and >= 0");
    }
    double lo = phi.value(0.0), hi = lo, slope = std::abs(phi.derivative(0.0));
    if (sup_v > 0.0) {
        for (int i = 1; i < kSampleCount; ++i) {
            const double xi = sup_v * i / (kSampleCount - 1);
            const double v = phi.value(xi);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            slope = std::max(slope, std::abs(phi.derivative(xi)));
        }
    }
    if (!(lo > 0.0)) {
        throw std::invalid_argument(
            "certify_bounds: motility is not positive on [0, " + std::to_string(sup_v) + "]");
    }
    MotilityBounds bounds;
    bounds.c1 = 0.99 * lo;
    bounds.c2 = 1.01 * hi;
    bounds.c3 = 1.01 * slope;
    bounds.sup_v = sup_v;
    return bounds;
}

}  // namespace motlab
