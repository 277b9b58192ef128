#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dfls/core.hpp"

/// \file problems.hpp
/// Built-in benchmark problems with analytic gradients, certified gradient
/// smoothness constants, known stationary points and degeneracy flags.
/// Every problem is fully determined by (name, n, seed).

namespace dfls {

struct SuiteProblem {
    std::string name;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    Problem problem;       ///< fully populated, including metadata
    bool degenerate = false;
    double f_min_over_box = 0.0;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::mt19937_64 suite_rng(std::string_view name, std::size_t n, std::uint64_t seed) {
    return std::mt19937_64(splitmix64(fnv1a(name) ^ splitmix64(seed) ^ splitmix64(0x51ed ^ n)));
}

struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> a; // row-major

    explicit DenseMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    Vector multiply(const Vector& x) const {
        Vector y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += at(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
};

/// A = Q diag(spectrum) Q^T with Q a product of seeded plane rotations, so
/// the spectrum (hence the spectral norm and condition number) is prescribed.
inline DenseMatrix seeded_spd(const Vector& spectrum, std::mt19937_64& rng) {
    const std::size_t n = spectrum.size();
    DenseMatrix A(n);
    for (std::size_t i = 0; i < n; ++i) A.at(i, i) = spectrum[i];
    if (n < 2) return A;
    std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double phi = angle(rng);
                const double cs = std::cos(phi), sn = std::sin(phi);
                for (std::size_t j = 0; j < n; ++j) { // rows
                    const double rp = A.at(p, j), rq = A.at(q, j);
                    A.at(p, j) = cs * rp - sn * rq;
                    A.at(q, j) = sn * rp + cs * rq;
                }
                for (std::size_t i = 0; i < n; ++i) { // columns
                    const double cp = A.at(i, p), cq = A.at(i, q);
                    A.at(i, p) = cs * cp - sn * cq;
                    A.at(i, q) = sn * cp + cs * cq;
                }
            }
        }
    }
    // symmetrize away the rotation rounding
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (A.at(i, j) + A.at(j, i));
            A.at(i, j) = v;
            A.at(j, i) = v;
        }
    return A;
}

// Tiny relative headroom certifying declared constants against the rounding
// of the constructions they come from.
inline constexpr double kMetadataHeadroom = 1.0 + 1e-10;

/// max ||A x - b|| over the box: exact corner enumeration for n <= 12
/// (the norm is convex, so the max sits at a vertex), a componentwise
/// interval bound otherwise.
inline double max_gradient_norm_over_box(const DenseMatrix& A, const Vector& b, const Bounds& box) {
    const std::size_t n = A.n;
    if (n <= 12) {
        double best = 0.0;
        Vector corner(n);
        for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
            for (std::size_t i = 0; i < n; ++i)
                corner[i] = (mask >> i) & 1 ? box.upper[i] : box.lower[i];
            Vector g = A.multiply(corner);
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double gi = g[i] - b[i];
                s += gi * gi;
            }
            best = std::max(best, s);
        }
        return std::sqrt(best) * kMetadataHeadroom;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double lo = -b[i], hi = -b[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double p = A.at(i, j) * box.lower[j];
            const double q = A.at(i, j) * box.upper[j];
            lo += std::min(p, q);
            hi += std::max(p, q);
        }
        const double m = std::max(std::abs(lo), std::abs(hi));
        sum += m * m;
    }
    return std::sqrt(sum) * kMetadataHeadroom;
}

struct QuadData {
    DenseMatrix A;
    Vector b;
};

/// Assembles a quadratic suite problem f(x) = x'Ax/2 - b'x around a chosen
/// stationary point. Per-coordinate Lipschitz constants are declared as the
/// absolute row sums: valid upper bounds that are trivially certified.
inline SuiteProblem assemble_quadratic(std::string name, std::size_t n, std::uint64_t seed,
                                       DenseMatrix A, Vector b, Bounds box, Vector xstar,
                                       double lambda_max, bool degenerate) {
    auto data = std::make_shared<QuadData>(QuadData{std::move(A), std::move(b)});
    SuiteProblem sp;
    sp.name = std::move(name);
    sp.n = n;
    sp.seed = seed;
    sp.degenerate = degenerate;

    Problem& p = sp.problem;
    p.n = n;
    p.bounds = std::move(box);
    p.objective = [data](const Vector& x) {
        const Vector ax = data->A.multiply(x);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * (0.5 * ax[i] - data->b[i]);
        return s;
    };
    p.gradient = [data](const Vector& x) {
        Vector g = data->A.multiply(x);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= data->b[i];
        return g;
    };

    Vector Li(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::abs(data->A.at(i, j));
        Li[i] = s * kMetadataHeadroom;
    }
    p.lipschitz = LipschitzInfo::from_components(
        lambda_max * kMetadataHeadroom, std::move(Li),
        max_gradient_norm_over_box(data->A, data->b, p.bounds));

    const double f_star = p.objective(xstar);
    // Lowered by a hair so oracle rounding can never dip below it.
    sp.f_min_over_box = f_star - 1e-9 * (1.0 + std::abs(f_star));
    p.f_min = sp.f_min_over_box;
    p.known_solution = std::move(xstar);
    return sp;
}

inline SuiteProblem make_quad_interior(std::size_t n, std::uint64_t seed, bool illconditioned) {
    auto rng = suite_rng(illconditioned ? "illcond-quad" : "quad-interior", n, seed);
    Vector spectrum(n);
    double lambda_max = 0.0;
    if (illconditioned) {
        // log-spaced spectrum from 1e-2 to 1e2: condition number 1e4
        for (std::size_t i = 0; i < n; ++i)
            spectrum[i] = n == 1 ? 1.0 : std::pow(10.0, -2.0 + 4.0 * static_cast<double>(i) / (n - 1));
    } else {
        std::uniform_real_distribution<double> lam(1.0, 10.0);
        for (double& s : spectrum) s = lam(rng);
    }
    for (double s : spectrum) lambda_max = std::max(lambda_max, s);
    DenseMatrix A = seeded_spd(spectrum, rng);

    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> width(illconditioned ? 1.0 : 1.5,
                                                 illconditioned ? 2.0 : 3.0);
    Bounds box;
    box.lower.resize(n);
    box.upper.resize(n);
    Vector xstar(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = (illconditioned ? 0.5 : 1.0) * unit(rng);
        const double w = width(rng);
        box.lower[i] = m - w;
        box.upper[i] = m + w;
        xstar[i] = m + 0.5 * w * unit(rng); // strictly interior
    }
    const Vector b = A.multiply(xstar); // gradient vanishes at xstar bitwise
    return assemble_quadratic(illconditioned ? "illcond-quad" : "quad-interior", n, seed,
                              std::move(A), b, std::move(box), std::move(xstar), lambda_max,
                              /*degenerate=*/false);
}

inline SuiteProblem make_quad_corner(std::size_t n, std::uint64_t seed) {
    auto rng = suite_rng("quad-corner", n, seed);
    Vector spectrum(n);
    std::uniform_real_distribution<double> lam(1.0, 10.0);
    double lambda_max = 0.0;
    for (double& s : spectrum) {
        s = lam(rng);
        lambda_max = std::max(lambda_max, s);
    }
    DenseMatrix A = seeded_spd(spectrum, rng);

    Bounds box = uniform_box(n, 0.0, 1.0);
    Vector xstar(n), gstar(n, 0.0);
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    std::uniform_real_distribution<double> inner(0.3, 0.7);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = i == 0 ? 0.0 : pick(rng); // coordinate 0 always active at the lower bound
        if (r < 0.4) {
            xstar[i] = 0.0;
            gstar[i] = mag(rng); // points into the box: KKT at the lower bound
        } else if (r < 0.7) {
            xstar[i] = 1.0;
            gstar[i] = -mag(rng);
        } else {
            xstar[i] = inner(rng);
        }
    }
    // b = A x* - g* makes x* the constrained minimizer with the prescribed
    // strict complementarity on every active coordinate.
    Vector b = A.multiply(xstar);
    for (std::size_t i = 0; i < n; ++i) b[i] -= gstar[i];
    return assemble_quadratic("quad-corner", n, seed, std::move(A), std::move(b), std::move(box),
                              std::move(xstar), lambda_max, /*degenerate=*/false);
}

inline SuiteProblem make_linear_edge(std::size_t n, std::uint64_t seed) {
    auto rng = suite_rng("linear-edge", n, seed);
    auto cost = std::make_shared<Vector>(n);
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    for (double& ci : *cost) ci = mag(rng);

    SuiteProblem sp;
    sp.name = "linear-edge";
    sp.n = n;
    sp.seed = seed;
    sp.degenerate = false;
    Problem& p = sp.problem;
    p.n = n;
    p.bounds = uniform_box(n, 0.0, 1.0);
    p.objective = [cost](const Vector& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (*cost)[i] * x[i];
        return s;
    };
    p.gradient = [cost](const Vector&) { return *cost; };
    double norm_c = 0.0;
    for (double ci : *cost) norm_c += ci * ci;
    // The gradient is constant; any positive constant is a valid Lipschitz bound.
    p.lipschitz = LipschitzInfo::from_components(1e-8, Vector(n, 1e-8),
                                                 std::sqrt(norm_c) * detail::kMetadataHeadroom);
    p.known_solution = Vector(n, 0.0); // all costs positive: the lower corner
    p.f_min = 0.0;
    sp.f_min_over_box = 0.0;
    return sp;
}

inline SuiteProblem make_degenerate_bound(std::size_t n, std::uint64_t seed) {
    auto rng = suite_rng("degenerate-bound", n, seed);
    auto scale = std::make_shared<Vector>(n);
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    for (double& si : *scale) si = mag(rng);

    SuiteProblem sp;
    sp.name = "degenerate-bound";
    sp.n = n;
    sp.seed = seed;
    sp.degenerate = true; // gradient vanishes on every active bound at x*
    Problem& p = sp.problem;
    p.n = n;
    p.bounds = uniform_box(n, 0.0, 1.0);
    p.objective = [scale](const Vector& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (*scale)[i] * x[i] * x[i];
        return s;
    };
    p.gradient = [scale](const Vector& x) {
        Vector g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * (*scale)[i] * x[i];
        return g;
    };
    double max_s = 0.0, norm_s = 0.0;
    for (double si : *scale) {
        max_s = std::max(max_s, si);
        norm_s += si * si;
    }
    Vector Li(n);
    for (std::size_t i = 0; i < n; ++i) Li[i] = 2.0 * (*scale)[i];
    p.lipschitz = LipschitzInfo::from_components(2.0 * max_s, std::move(Li),
                                                 2.0 * std::sqrt(norm_s) * detail::kMetadataHeadroom);
    p.known_solution = Vector(n, 0.0);
    p.f_min = 0.0;
    sp.f_min_over_box = 0.0;
    return sp;
}

inline SuiteProblem make_rosenbrock_box(std::size_t n, std::uint64_t seed) {
    if (n % 2 != 0 || n == 0)
        throw std::invalid_argument("rosenbrock-box requires even n");
    SuiteProblem sp;
    sp.name = "rosenbrock-box";
    sp.n = n;
    sp.seed = seed;
    sp.degenerate = false;
    Problem& p = sp.problem;
    p.n = n;
    p.bounds = uniform_box(n, -2.0, 2.0);
    p.objective = [](const Vector& x) {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
            const double a = x[i], b = x[i + 1];
            const double t = b - a * a;
            const double u = 1.0 - a;
            s += 100.0 * t * t + u * u;
        }
        return s;
    };
    p.gradient = [](const Vector& x) {
        Vector g(x.size());
        for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
            const double a = x[i], b = x[i + 1];
            const double t = b - a * a;
            g[i] = -400.0 * a * t - 2.0 * (1.0 - a);
            g[i + 1] = 200.0 * t;
        }
        return g;
    };
    // Certified over [-2,2]^n: |d2f/da2| <= 5602, |d2f/dadb| <= 800,
    // |d2f/db2| = 200; |df/da| <= 4806, |df/db| <= 1200.
    Vector Li(n);
    for (std::size_t i = 0; i < n; ++i) Li[i] = i % 2 == 0 ? 5602.0 : 200.0;
    const double pairs = static_cast<double>(n / 2);
    p.lipschitz = LipschitzInfo::from_components(
        6402.0, std::move(Li), std::sqrt(pairs * (4806.0 * 4806.0 + 1200.0 * 1200.0)));
    p.known_solution = Vector(n, 1.0);
    p.f_min = 0.0;
    sp.f_min_over_box = 0.0;
    return sp;
}

} // namespace detail

struct RegistryEntry {
    std::string name;
    std::string summary;
    bool degenerate;
    std::string dims;
};

inline const std::vector<RegistryEntry>& problem_registry() {
    static const std::vector<RegistryEntry> registry = {
        {"quad-interior", "convex quadratic, minimizer strictly inside the box", false, "n >= 1"},
        {"quad-corner", "convex quadratic, constrained minimizer on bounds with strict complementarity", false, "n >= 1"},
        {"linear-edge", "linear objective, every coordinate strict-active at the lower corner", false, "n >= 1"},
        {"degenerate-bound", "separable quadratic whose gradient vanishes on the active bounds", true, "n >= 1"},
        {"rosenbrock-box", "pairwise Rosenbrock on [-2,2]^n", false, "even n >= 2"},
        {"illcond-quad", "convex quadratic with condition number 1e4", false, "n >= 1"},
    };
    return registry;
}

/// Deterministic problem for (name, n, seed). Throws on unknown names and
/// on odd n for rosenbrock-box.
inline SuiteProblem make_problem(const std::string& name, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("make_problem: n must be >= 1");
    if (name == "quad-interior") return detail::make_quad_interior(n, seed, false);
    if (name == "illcond-quad") return detail::make_quad_interior(n, seed, true);
    if (name == "quad-corner") return detail::make_quad_corner(n, seed);
    if (name == "linear-edge") return detail::make_linear_edge(n, seed);
    if (name == "degenerate-bound") return detail::make_degenerate_bound(n, seed);
    if (name == "rosenbrock-box") return detail::make_rosenbrock_box(n, seed);
    throw std::invalid_argument("make_problem: unknown problem name '" + name + "'");
}

} // namespace dfls
