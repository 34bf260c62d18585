#pragma once
#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace lmcurv {

enum class Branch { positive, negative, full };

const char* to_string(Branch b);
Branch branch_from_string(const std::string& s);

// f(r,s) = a|s|^{theta-2}s
struct PurePower {
    double a = 0.0;
    double theta = 3.0;
};

// f(r,s) = a+|s|^{theta-2}s^+ - a-|s|^{theta-2}s^-
struct AsymmetricPower {
    double a_plus = 0.0;
    double a_minus = 0.0;
    double theta = 3.0;
};

// User callable. F may be left empty; it is then integrated numerically.
struct CustomNonlinearity {
    std::function<double(double r, double s)> f;
    std::function<double(double r, double s)> F;
    double theta = 3.0;
    double a1 = 0.0;
    double a2 = 0.0;
    std::string name = "custom";
};

using NonlinearitySpec = std::variant<PurePower, AsymmetricPower, CustomNonlinearity>;

double nl_value(const NonlinearitySpec& f, double r, double s);
double nl_primitive(const NonlinearitySpec& f, double r, double s);
double nl_theta(const NonlinearitySpec& f);
// Parameters (a1, a2) entering the superlinearity condition.
double nl_a1(const NonlinearitySpec& f);
double nl_a2(const NonlinearitySpec& f);
const char* nl_family(const NonlinearitySpec& f);

struct WeightSpec {
    enum class Kind { constant, linear, custom };
    Kind kind = Kind::constant;
    double at_origin = 1.0;  // constant value, or b(0) for linear
    double at_radius = 1.0;  // b(R) for linear
    std::function<double(double r)> fn;
    double declared_lower = 0.0;  // custom only
    double declared_upper = 0.0;

    double value(double r, double R) const;
    double lower() const;
    double upper() const;
};

// g(r,s,xi) = a|s|^{theta-2}s (1 + eta xi)
struct PowerGradient {
    double a = 0.0;
    double theta = 3.0;
    double eta = 0.0;
};

struct CustomGradient {
    std::function<double(double r, double s, double xi)> g;
    double L1 = 0.0;
    double L2 = 0.0;
    double theta = 3.0;
    double a1 = 0.0;
    double a2 = 0.0;
};

using GradientTermSpec = std::variant<PowerGradient, CustomGradient>;

double gt_value(const GradientTermSpec& g, double r, double s, double xi);
struct LipschitzPair {
    double L1;
    double L2;
};
// Declared constants: closed form for PowerGradient on |s| <= R, |xi| <= 1.
LipschitzPair gt_lipschitz(const GradientTermSpec& g, double R);
double gt_theta(const GradientTermSpec& g);
double gt_a1(const GradientTermSpec& g);

struct ProblemSpec {
    int N = 3;
    double R = 1.0;
    double lambda = 0.0;
    double q = 1.5;
    WeightSpec weight_b;
    NonlinearitySpec nonlinearity = PurePower{};
    Branch branch = Branch::positive;
    std::optional<GradientTermSpec> gradient_term;
};

// Throws std::invalid_argument naming the offending field.
// test_mode admits lambda = 0 and nonlinearities that vanish.
void validate(const ProblemSpec& p, bool test_mode = false);

struct NonlinearityCheck {
    bool sign_ok;       // s f(r,s) > 0 on sampled 0 < |s| <= R
    bool sublinear_ok;  // f(r,s)/s -> 0 sampled near 0
    double worst_ratio;
};
NonlinearityCheck check_nonlinearity(const NonlinearitySpec& f, double R, int samples = 64);

struct GradientTermCheck {
    bool sign_ok;
    bool sublinear_ok;
    double sampled_L1;  // largest observed difference quotient in s
    double sampled_L2;  // largest observed difference quotient in xi
    bool declared_L1_ok;
    bool declared_L2_ok;
};
GradientTermCheck check_gradient_term(const GradientTermSpec& g, double R, int samples = 48);

// The symmetric-asymmetry requirement for the seventh-solution search on
// the built-in families: a+ != a- needs theta > 4.
bool asymmetry_admissible(const NonlinearitySpec& f);

// Branch truncation of f: f on [0,R] (positive), [-R,0] (negative) or
// [-R,R] (full), linear ramps to zero on R < |s| < R+1, zero beyond and on
// the excluded sign. f(s) is only called with |s| <= R.
template <class Fv>
double truncated_value(Fv&& f, double s, double R, Branch b) {
    if (s > 0.0 && b == Branch::negative) return 0.0;
    if (s < 0.0 && b == Branch::positive) return 0.0;
    if (s >= R + 1.0 || s <= -R - 1.0) return 0.0;
    if (s > R) return -f(R) * (s - R - 1.0);
    if (s < -R) return f(-R) * (s + R + 1.0);
    return f(s);
}

// Primitive (from 0) of the truncated function; F is the untruncated primitive.
template <class Fv, class Pv>
double truncated_primitive(Fv&& f, Pv&& F, double s, double R, Branch b) {
    if (s > 0.0 && b == Branch::negative) return 0.0;
    if (s < 0.0 && b == Branch::positive) return 0.0;
    if (s > R) {
        const double t = std::min(s - R - 1.0, 0.0);
        return F(R) + f(R) * (1.0 - t * t) / 2.0;
    }
    if (s < -R) {
        const double t = std::max(s + R + 1.0, 0.0);
        return F(-R) + f(-R) * (t * t - 1.0) / 2.0;
    }
    return F(s);
}

std::function<double(double r, double s)> truncate_branch(const NonlinearitySpec& f, Branch b,
                                                          double R);

}  // namespace lmcurv
