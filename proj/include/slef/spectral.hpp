#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slef/geometry.hpp"

namespace slef {

// Spherical domain over which a cone is built: an arc of angle theta (n=2) or an
// axisymmetric cap of polar angle alpha (n=3).
struct ConeSpec {
    int dimension = 2;
    double aperture = 0.0;  // theta or alpha
    double lambda = 0.0;
    double phi = 0.0;
    // E sampled on a uniform grid of [0, aperture], max = 1
    std::vector<double> nodes;
    std::vector<double> eigenfunction;
    // cap only: residual of the discrete eigenpair and the shooting cross-check
    double residual = 0.0;
    std::optional<double> shooting_lambda;
};

ConeSpec sector_frequency(double theta, int samples = 513);
ConeSpec cap_frequency(double alpha, int nodes);
// first Dirichlet eigenvalue of -(sin s E')' = lambda sin s E on (0, alpha) by shooting
double cap_shooting_eigenvalue(double alpha, double tol = 1e-12);

enum class Criticality { subcritical, critical, supercritical };
const char* criticality_name(Criticality c);

struct CriticalityClass {
    Criticality cls;
    double margin;  // 2/(1+gamma) - phi
};

inline constexpr double kCriticalBand = 1e-9;

CriticalityClass classify(const ConeSpec& cone, double gamma, double tol = kCriticalBand);
CriticalityClass classify_phi(double phi, double gamma, double tol = kCriticalBand);

// r^phi E(angle); nullopt outside the closed cone or at the vertex
std::optional<double> h_sigma_eval(const ConeSpec& cone, Point2 x);
std::optional<double> h_sigma_eval(const ConeSpec& cone, Point3 x);
// E at an angle in [0, aperture]
double eigenfunction_at(const ConeSpec& cone, double angle);

}  // namespace slef
