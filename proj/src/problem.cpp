#include "lmcurv/problem.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

namespace lmcurv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double power_part(double a, double theta, double s) {
    // a |s|^{theta-2} s
    if (s == 0.0) return 0.0;
    return a * std::copysign(std::pow(std::fabs(s), theta - 1.0), s);
}

}  // namespace

const char* to_string(Branch b) {
    switch (b) {
        case Branch::positive: return "positive";
        case Branch::negative: return "negative";
        case Branch::full: return "full";
    }
    return "?";
}

Branch branch_from_string(const std::string& s) {
    if (s == "positive") return Branch::positive;
    if (s == "negative") return Branch::negative;
    if (s == "full") return Branch::full;
    throw std::invalid_argument("unknown branch '" + s + "'");
}

double nl_value(const NonlinearitySpec& f, double r, double s) {
    return std::visit(overloaded{
                          [&](const PurePower& p) { return power_part(p.a, p.theta, s); },
                          [&](const AsymmetricPower& p) {
                              return power_part(s >= 0.0 ? p.a_plus : p.a_minus, p.theta, s);
                          },
                          [&](const CustomNonlinearity& c) { return c.f(r, s); },
                      },
                      f);
}

double nl_primitive(const NonlinearitySpec& f, double r, double s) {
    return std::visit(
        overloaded{
            [&](const PurePower& p) { return p.a * std::pow(std::fabs(s), p.theta) / p.theta; },
            [&](const AsymmetricPower& p) {
                const double a = s >= 0.0 ? p.a_plus : p.a_minus;
                return a * std::pow(std::fabs(s), p.theta) / p.theta;
            },
            [&](const CustomNonlinearity& c) {
                if (c.F) return c.F(r, s);
                if (s == 0.0) return 0.0;
                auto integrand = [&](double t) { return c.f(r, t); };
                return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(integrand, 0.0,
                                                                                     s, 8, 1e-13);
            },
        },
        f);
}

double nl_theta(const NonlinearitySpec& f) {
    return std::visit([](const auto& p) { return p.theta; }, f);
}

double nl_a1(const NonlinearitySpec& f) {
    return std::visit(overloaded{
                          [](const PurePower& p) { return p.a / p.theta; },
                          [](const AsymmetricPower& p) {
                              return std::min(p.a_plus, p.a_minus) / p.theta;
                          },
                          [](const CustomNonlinearity& c) { return c.a1; },
                      },
                      f);
}

double nl_a2(const NonlinearitySpec& f) {
    if (auto c = std::get_if<CustomNonlinearity>(&f)) return c->a2;
    return 0.0;
}

const char* nl_family(const NonlinearitySpec& f) {
    return std::visit(overloaded{
                          [](const PurePower&) { return "pure_power"; },
                          [](const AsymmetricPower&) { return "asymmetric_power"; },
                          [](const CustomNonlinearity&) { return "custom"; },
                      },
                      f);
}

double WeightSpec::value(double r, double R) const {
    switch (kind) {
        case Kind::constant: return at_origin;
        case Kind::linear: return at_origin + (at_radius - at_origin) * (r / R);
        case Kind::custom: return fn(r);
    }
    return at_origin;
}

double WeightSpec::lower() const {
    switch (kind) {
        case Kind::constant: return at_origin;
        case Kind::linear: return std::min(at_origin, at_radius);
        case Kind::custom: return declared_lower;
    }
    return at_origin;
}

double WeightSpec::upper() const {
    switch (kind) {
        case Kind::constant: return at_origin;
        case Kind::linear: return std::max(at_origin, at_radius);
        case Kind::custom: return declared_upper;
    }
    return at_origin;
}

double gt_value(const GradientTermSpec& g, double r, double s, double xi) {
    return std::visit(overloaded{
                          [&](const PowerGradient& p) {
                              return power_part(p.a, p.theta, s) * (1.0 + p.eta * xi);
                          },
                          [&](const CustomGradient& c) { return c.g(r, s, xi); },
                      },
                      g);
}

LipschitzPair gt_lipschitz(const GradientTermSpec& g, double R) {
    return std::visit(overloaded{
                          [&](const PowerGradient& p) {
                              const double L1 = (p.theta - 1.0) * p.a * std::pow(R, p.theta - 2.0) *
                                                (1.0 + std::fabs(p.eta));
                              const double L2 = p.a * std::pow(R, p.theta - 1.0) * std::fabs(p.eta);
                              return LipschitzPair{L1, L2};
                          },
                          [&](const CustomGradient& c) { return LipschitzPair{c.L1, c.L2}; },
                      },
                      g);
}

double gt_theta(const GradientTermSpec& g) {
    return std::visit([](const auto& p) { return p.theta; }, g);
}

double gt_a1(const GradientTermSpec& g) {
    return std::visit(overloaded{
                          [](const PowerGradient& p) {
                              return p.a * std::min(1.0, 1.0 + p.eta) / p.theta;
                          },
                          [](const CustomGradient& c) { return c.a1; },
                      },
                      g);
}

void validate(const ProblemSpec& p, bool test_mode) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
    if (p.N < 3) fail("problem.N: must be >= 3");
    if (!(p.R > 0.0) || !std::isfinite(p.R)) fail("problem.R: must be positive");
    if (!(p.q > 1.0 && p.q < 2.0)) fail("problem.q: must lie in (1,2)");
    if (test_mode ? !(p.lambda >= 0.0) : !(p.lambda > 0.0)) fail("problem.lambda: must be positive");
    if (!(p.weight_b.lower() > 0.0) || p.weight_b.lower() > p.weight_b.upper())
        fail("problem.weight_b: bounds must satisfy 0 < b0 <= b1");
    if (!(nl_theta(p.nonlinearity) > 2.0)) fail("problem.nonlinearity.theta: must exceed 2");
    std::visit(overloaded{
                   [&](const PurePower& f) {
                       if (test_mode ? f.a < 0.0 : !(f.a > 0.0))
                           fail("problem.nonlinearity.a: must be positive");
                   },
                   [&](const AsymmetricPower& f) {
                       if (test_mode ? (f.a_plus < 0.0 || f.a_minus < 0.0)
                                     : !(f.a_plus > 0.0 && f.a_minus > 0.0))
                           fail("problem.nonlinearity.a_plus/a_minus: must be positive");
                   },
                   [&](const CustomNonlinearity& f) {
                       if (!f.f) fail("problem.nonlinearity: custom family needs a callable");
                   },
               },
               p.nonlinearity);
    if (p.weight_b.kind == WeightSpec::Kind::custom && p.weight_b.fn) {
        for (int k = 0; k <= 64; ++k) {
            const double r = p.R * k / 64.0;
            const double b = p.weight_b.fn(r);
            if (b < p.weight_b.lower() - 1e-14 || b > p.weight_b.upper() + 1e-14)
                fail("problem.weight_b: sampled value outside declared bounds");
        }
    }
    if (p.gradient_term) {
        if (!(gt_theta(*p.gradient_term) > 2.0)) fail("problem.gradient_term.theta: must exceed 2");
        if (auto g = std::get_if<PowerGradient>(&*p.gradient_term)) {
            if (!(g->a > 0.0)) fail("problem.gradient_term.a: must be positive");
            if (!(std::fabs(g->eta) < 1.0)) fail("problem.gradient_term.eta: need |eta| < 1");
        }
    }
}

NonlinearityCheck check_nonlinearity(const NonlinearitySpec& f, double R, int samples) {
    NonlinearityCheck out{true, true, 0.0};
    for (int k = 1; k <= samples; ++k) {
        const double s = R * k / samples;
        for (double r : {0.0, 0.5 * R, R}) {
            if (!(s * nl_value(f, r, s) > 0.0) || !(-s * nl_value(f, r, -s) > 0.0)) out.sign_ok = false;
        }
    }
    for (int e = 4; e <= 12; ++e) {
        const double s = R * std::pow(10.0, -e);
        for (double sg : {1.0, -1.0}) {
            const double ratio = std::fabs(nl_value(f, 0.5 * R, sg * s) / (sg * s));
            if (e == 12) out.worst_ratio = std::max(out.worst_ratio, ratio);
        }
    }
    out.sublinear_ok = out.worst_ratio < 1e-6;
    return out;
}

GradientTermCheck check_gradient_term(const GradientTermSpec& g, double R, int samples) {
    GradientTermCheck out{true, true, 0.0, 0.0, true, true};
    for (int k = 1; k <= samples; ++k) {
        const double s = R * k / samples;
        for (double xi : {0.0, 0.5, 1.0})
            if (!(s * gt_value(g, 0.5 * R, s, xi) > 0.0) || !(-s * gt_value(g, 0.5 * R, -s, xi) > 0.0))
                out.sign_ok = false;
    }
    const double tiny = 1e-12 * R;
    for (double xi : {0.0, 1.0})
        if (!(std::fabs(gt_value(g, 0.5 * R, tiny, xi) / tiny) < 1e-6)) out.sublinear_ok = false;
    for (int k = 0; k < samples; ++k) {
        const double s0 = -R + 2.0 * R * k / samples;
        const double s1 = -R + 2.0 * R * (k + 1) / samples;
        for (double xi : {0.0, 0.5, 1.0}) {
            const double d = std::fabs(gt_value(g, 0.5 * R, s1, xi) - gt_value(g, 0.5 * R, s0, xi));
            out.sampled_L1 = std::max(out.sampled_L1, d / (s1 - s0));
        }
        const double x0 = static_cast<double>(k) / samples;
        const double x1 = static_cast<double>(k + 1) / samples;
        for (double s : {-R, -0.5 * R, 0.5 * R, R}) {
            const double d = std::fabs(gt_value(g, 0.5 * R, s, x1) - gt_value(g, 0.5 * R, s, x0));
            out.sampled_L2 = std::max(out.sampled_L2, d / (x1 - x0));
        }
    }
    const auto lip = gt_lipschitz(g, R);
    out.declared_L1_ok = out.sampled_L1 <= lip.L1 * (1.0 + 1e-12);
    out.declared_L2_ok = out.sampled_L2 <= lip.L2 * (1.0 + 1e-12);
    return out;
}

bool asymmetry_admissible(const NonlinearitySpec& f) {
    if (auto p = std::get_if<AsymmetricPower>(&f)) return p->a_plus == p->a_minus || p->theta > 4.0;
    return true;
}

std::function<double(double, double)> truncate_branch(const NonlinearitySpec& f, Branch b, double R) {
    return [f, b, R](double r, double s) {
        return truncated_value([&](double t) { return nl_value(f, r, t); }, s, R, b);
    };
}

}  // namespace lmcurv
