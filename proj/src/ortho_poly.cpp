#include "ptspectra/ortho_poly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "ptspectra/parallel.hpp"

namespace ptspectra {

BivariatePoly::BivariatePoly(const Rational& c) {
    if (c != 0) terms_.emplace(Monomial{}, c);
}

BivariatePoly BivariatePoly::term(const Rational& c, Monomial m) {
    if (m.x < 0 || m.y < 0 || m.a < 0 || m.b < 0) throw PreconditionError("BivariatePoly: negative exponent");
    BivariatePoly p;
    p.add_term(m, c);
    return p;
}

void BivariatePoly::add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

int BivariatePoly::degree_x() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.x);
    return d;
}

int BivariatePoly::degree_y() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.y);
    return d;
}

int BivariatePoly::total_degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.x + m.y);
    return d;
}

BivariatePoly& BivariatePoly::operator+=(const BivariatePoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

BivariatePoly& BivariatePoly::operator-=(const BivariatePoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

BivariatePoly& BivariatePoly::operator*=(const BivariatePoly& o) {
    BivariatePoly out;
    for (const auto& [m1, c1] : terms_) {
        for (const auto& [m2, c2] : o.terms_) {
            out.add_term({m1.x + m2.x, m1.y + m2.y, m1.a + m2.a, m1.b + m2.b}, c1 * c2);
        }
    }
    return *this = std::move(out);
}

BivariatePoly BivariatePoly::operator-() const {
    BivariatePoly out;
    for (const auto& [m, c] : terms_) out.terms_.emplace(m, -c);
    return out;
}

BivariatePoly BivariatePoly::pow(int k) const {
    if (k < 0) throw PreconditionError("BivariatePoly::pow: negative exponent");
    BivariatePoly out(1);
    for (int i = 0; i < k; ++i) out *= *this;
    return out;
}

BivariatePoly BivariatePoly::dx() const {
    BivariatePoly out;
    for (const auto& [m, c] : terms_) {
        if (m.x > 0) out.add_term({m.x - 1, m.y, m.a, m.b}, c * m.x);
    }
    return out;
}

BivariatePoly BivariatePoly::dy() const {
    BivariatePoly out;
    for (const auto& [m, c] : terms_) {
        if (m.y > 0) out.add_term({m.x, m.y - 1, m.a, m.b}, c * m.y);
    }
    return out;
}

BivariatePoly BivariatePoly::integrate_x() const {
    BivariatePoly out;
    for (const auto& [m, c] : terms_) out.add_term({m.x + 1, m.y, m.a, m.b}, c / (m.x + 1));
    return out;
}

namespace {

Rational rational_pow(const Rational& v, int k) {
    Rational r = 1;
    for (int i = 0; i < k; ++i) r *= v;
    return r;
}

}  // namespace

Rational BivariatePoly::evaluate(const Rational& x, const Rational& y, const Rational& alpha,
                                 const Rational& beta) const {
    Rational sum = 0;
    for (const auto& [m, c] : terms_) {
        sum += c * rational_pow(x, m.x) * rational_pow(y, m.y) * rational_pow(alpha, m.a) * rational_pow(beta, m.b);
    }
    return sum;
}

std::vector<double> BivariatePoly::x_coefficients(double y, double alpha, double beta) const {
    std::vector<double> c(static_cast<std::size_t>(std::max(degree_x(), 0)) + 1, 0.0);
    for (const auto& [m, r] : terms_) {
        c[m.x] += r.convert_to<double>() * std::pow(y, m.y) * std::pow(alpha, m.a) * std::pow(beta, m.b);
    }
    return c;
}

double BivariatePoly::evaluate(double x, double y, double alpha, double beta) const {
    const std::vector<double> c = x_coefficients(y, alpha, beta);
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
    return v;
}

std::string BivariatePoly::to_string() const {
    if (terms_.empty()) return "0";
    std::vector<std::pair<Monomial, Rational>> order(terms_.begin(), terms_.end());
    std::sort(order.begin(), order.end(), [](const auto& l, const auto& r) {
        const Monomial &a = l.first, &b = r.first;
        return std::tie(b.x, b.y, b.a, b.b) < std::tie(a.x, a.y, a.a, a.b);
    });
    std::ostringstream out;
    bool first = true;
    for (const auto& [m, c] : order) {
        const bool negative = c < 0;
        const Rational mag = negative ? Rational(-c) : c;
        if (first) {
            if (negative) out << '-';
        } else {
            out << (negative ? " - " : " + ");
        }
        first = false;
        std::vector<std::string> factors;
        const bool unit = mag == 1;
        const bool constant = m.x == 0 && m.y == 0 && m.a == 0 && m.b == 0;
        if (!unit || constant) factors.push_back(mag.str());
        auto var = [&](char name, int e) {
            if (e == 1) factors.emplace_back(1, name);
            if (e > 1) factors.push_back(std::string(1, name) + "^" + std::to_string(e));
        };
        var('a', m.a);
        var('b', m.b);
        var('x', m.x);
        var('y', m.y);
        for (std::size_t k = 0; k < factors.size(); ++k) out << (k ? "*" : "") << factors[k];
    }
    return out.str();
}

namespace {

class PolyParser {
public:
    explicit PolyParser(std::string_view s) : s_(s) {}

    BivariatePoly parse() {
        BivariatePoly sum;
        skip();
        if (pos_ == s_.size()) fail("empty polynomial");
        bool first = true;
        while (pos_ < s_.size()) {
            int sign = 1;
            if (s_[pos_] == '+' || s_[pos_] == '-') {
                sign = s_[pos_] == '-' ? -1 : 1;
                ++pos_;
                skip();
            } else if (!first) {
                fail("expected '+' or '-'");
            }
            first = false;
            BivariatePoly t = term();
            sum += sign < 0 ? -t : t;
            skip();
        }
        return sum;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream msg;
        msg << "BivariatePoly::parse: " << what << " at position " << pos_ << " in \"" << s_ << "\"";
        throw SchemaError(msg.str());
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    std::string digits() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected digits");
        return std::string(s_.substr(start, pos_ - start));
    }

    BivariatePoly factor() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            Rational r{boost::multiprecision::cpp_int(digits())};
            skip();
            if (pos_ < s_.size() && s_[pos_] == '/') {
                ++pos_;
                skip();
                const boost::multiprecision::cpp_int den(digits());
                if (den == 0) fail("zero denominator");
                r /= Rational(den);
            }
            return r;
        }
        Monomial m;
        int* slot = nullptr;
        switch (c) {
            case 'x': slot = &m.x; break;
            case 'y': slot = &m.y; break;
            case 'a': slot = &m.a; break;
            case 'b': slot = &m.b; break;
            default: fail(std::string("unexpected character '") + c + "'");
        }
        ++pos_;
        skip();
        int e = 1;
        if (pos_ < s_.size() && s_[pos_] == '^') {
            ++pos_;
            skip();
            const std::string d = digits();
            if (d.size() > 6) fail("exponent too large");
            e = std::stoi(d);
        }
        *slot = e;
        return BivariatePoly::term(1, m);
    }

    BivariatePoly term() {
        BivariatePoly t = factor();
        skip();
        while (pos_ < s_.size() && s_[pos_] == '*') {
            ++pos_;
            t *= factor();
            skip();
        }
        return t;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

const BivariatePoly& base() {
    static const BivariatePoly p = BivariatePoly::x().pow(3) - 3 * BivariatePoly::x() * BivariatePoly::y().pow(2) -
                                   BivariatePoly::beta();
    return p;
}

}  // namespace

BivariatePoly BivariatePoly::parse(std::string_view text) { return PolyParser(text).parse(); }

BivariatePoly p_base() { return base(); }

BivariatePoly rule_ii(int m) {
    if (m < 0) throw PreconditionError("rule_ii: m must be nonnegative");
    using P = BivariatePoly;
    const P x = P::x(), y = P::y();
    const P bracket = P::term(Rational(1, m + 5), {m + 5, 0, 0, 0}) - 3 * y.pow(2) * P::term(Rational(1, m + 3), {m + 3, 0, 0, 0}) -
                      P::beta() * P::term(Rational(1, m + 2), {m + 2, 0, 0, 0});
    P out = P(Rational(4, m + 1)) * bracket * base();
    if (m >= 2) out -= P(m * (m - 1)) * x.pow(m - 2);
    out -= 4 * x.pow(m) * (3 * x.pow(2) * y - y.pow(3) + P::alpha());
    out -= P(Rational(12, m + 1)) * y * x.pow(m + 2);
    return out;
}

BivariatePoly rule_iii(const BivariatePoly& p) { return p.dy() + 2 * base() * p.integrate_x(); }

BivariatePoly rule_iv(const BivariatePoly& p) {
    using P = BivariatePoly;
    return p.dx().dx() + p.dy().dy() + 12 * P::x().pow(2) * P::y() * p + 4 * base() * p.dy().integrate_x();
}

std::vector<GeneratedPoly> enumerate_family(int depth, int degree_cap) {
    if (depth < 0) throw PreconditionError("enumerate_family: depth must be nonnegative");
    std::vector<GeneratedPoly> out;
    std::set<std::string> seen;
    auto keep = [&](BivariatePoly p, std::string recipe, int d) {
        if (p.is_zero() || p.total_degree() > degree_cap) return false;
        if (!seen.insert(p.to_string()).second) return false;
        out.push_back({std::move(p), std::move(recipe), d});
        return true;
    };
    keep(p_base(), "base", 0);
    // rule_ii(m) has total degree m + 8.
    for (int m = 0; m + 8 <= degree_cap; ++m) keep(rule_ii(m), "ii(" + std::to_string(m) + ")", 0);
    std::size_t begin = 0;
    for (int d = 1; d <= depth; ++d) {
        const std::size_t end = out.size();
        for (std::size_t k = begin; k < end; ++k) {
            const GeneratedPoly g = out[k];
            keep(rule_iii(g.poly), "iii(" + g.recipe + ")", d);
            keep(rule_iv(g.poly), "iv(" + g.recipe + ")", d);
        }
        begin = end;
    }
    return out;
}

BivariatePoly apply_recipe(std::string_view recipe) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    const std::string_view r = trim(recipe);
    auto bad = [&]() -> BivariatePoly {
        throw SchemaError("apply_recipe: cannot read \"" + std::string(recipe) + "\"");
    };
    if (r == "base" || r == "p3") return p_base();
    const std::size_t open = r.find('(');
    if (open == std::string_view::npos || r.back() != ')') return bad();
    const std::string_view head = trim(r.substr(0, open));
    const std::string_view inner = r.substr(open + 1, r.size() - open - 2);
    if (head == "ii") {
        const std::string_view digits = trim(inner);
        if (digits.empty() || digits.size() > 4 ||
            !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            return bad();
        }
        return rule_ii(std::stoi(std::string(digits)));
    }
    if (head == "iii") return rule_iii(apply_recipe(inner));
    if (head == "iv") return rule_iv(apply_recipe(inner));
    return bad();
}

namespace {

int row_of(const FieldGrid& grid, double y) {
    if (grid.ny() == 1) {
        if (std::abs(y - grid.rect().y_lo) <= 1e-9) return 0;
    } else {
        const double s = (y - grid.rect().y_lo) / grid.dy();
        const long j = std::lround(s);
        if (j >= 0 && j < grid.ny() && std::abs(s - j) <= 1e-6) return static_cast<int>(j);
    }
    std::ostringstream msg;
    msg << "orthogonality_test: y = " << y << " is not a grid row";
    throw PreconditionError(msg.str());
}

/// Upper bound of ∫_X^∞ (1 + x^d)·C₁²e^{−2x^{C₂}} dx by a left Riemann sum
/// once the integrand is decreasing, in units of e^{log_ref}.
double weighted_tail(const DecayEnvelope& env, double X, int d, double log_ref) {
    auto log_f = [&](double x) {
        return 2.0 * env.log_c1 + std::log1p(std::pow(x, d)) - 2.0 * std::pow(x, env.c2) - log_ref;
    };
    // d/dx log f < 0 once 2C₂x^{C₂} > d.
    if (2.0 * env.c2 * std::pow(X, env.c2) <= d) return HUGE_VAL;
    const double h = 0.01;
    const double first = log_f(X);
    double sum = 0.0;
    for (double x = X;; x += h) {
        const double lf = log_f(x);
        sum += std::exp(lf) * h;
        if (lf < first - 50.0 || lf < -745.0) break;
    }
    return sum;
}

}  // namespace

std::vector<OrthogonalityResult> orthogonality_test(const BivariatePoly& p, const FieldGrid& grid,
                                                    const std::vector<double>& y_values, double tail_budget) {
    const cplx lambda = grid.lambda();
    const int deg = std::max(p.degree_x(), 0);
    std::vector<OrthogonalityResult> out;
    for (double y : y_values) {
        const int j = row_of(grid, y);
        const RowDensity d = row_density(grid, j);
        const std::vector<double> c = p.x_coefficients(grid.y(j), lambda.real(), lambda.imag());
        std::vector<double> num(d.abs2.size()), den(d.abs2.size());
        for (std::size_t i = 0; i < d.abs2.size(); ++i) {
            const double x = grid.x(static_cast<int>(i));
            double v = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
            num[i] = v * d.abs2[i];
            den[i] = (1.0 + std::pow(std::abs(x), deg)) * d.abs2[i];
        }
        const double denominator = trapezoid(den, grid.dx());
        OrthogonalityResult r;
        r.y = grid.y(j);
        r.residual = std::abs(trapezoid(num, grid.dx())) / denominator;
        const DecayEnvelope env = decay_envelope(grid, j);
        const double log_ref = std::log(denominator) + d.log_scale;
        r.tail = env.holds ? weighted_tail(env, std::abs(grid.rect().x_lo), deg, log_ref) +
                                 weighted_tail(env, std::abs(grid.rect().x_hi), deg, log_ref)
                           : HUGE_VAL;
        if (!(r.tail <= tail_budget)) {
            std::ostringstream msg;
            msg << "orthogonality_test: weighted decay tail " << r.tail << " at y = " << r.y << " exceeds "
                << tail_budget << "; widen the grid";
            throw PreconditionError(msg.str());
        }
        out.push_back(r);
    }
    return out;
}

std::vector<std::vector<OrthogonalityResult>> orthogonality_batch(const std::vector<BivariatePoly>& polys,
                                                                  const FieldGrid& grid,
                                                                  const std::vector<double>& y_values,
                                                                  double tail_budget) {
    std::vector<std::vector<OrthogonalityResult>> out(polys.size());
    parallel_for(polys.size(), [&](std::size_t k) { out[k] = orthogonality_test(polys[k], grid, y_values, tail_budget); });
    return out;
}

}  // namespace ptspectra
