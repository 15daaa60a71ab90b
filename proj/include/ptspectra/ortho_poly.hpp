#pragma once

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ptspectra/eigenfunction_analysis.hpp"

namespace ptspectra {

using Rational = boost::multiprecision::cpp_rational;

/// x^x·y^y·α^a·β^b.
struct Monomial {
    int x = 0, y = 0, a = 0, b = 0;
    auto operator<=>(const Monomial&) const = default;
};

/// Polynomial in (x, y) whose coefficients are polynomials in (α, β) over ℚ,
/// stored as a sparse map over all four exponents. Zero coefficients are
/// never stored, so equality is coefficient-exact.
class BivariatePoly {
public:
    BivariatePoly() = default;
    BivariatePoly(const Rational& c);  // NOLINT: constants convert implicitly
    BivariatePoly(int c) : BivariatePoly(Rational(c)) {}  // NOLINT

    static BivariatePoly term(const Rational& c, Monomial m);
    static BivariatePoly x() { return term(1, {1, 0, 0, 0}); }
    static BivariatePoly y() { return term(1, {0, 1, 0, 0}); }
    static BivariatePoly alpha() { return term(1, {0, 0, 1, 0}); }
    static BivariatePoly beta() { return term(1, {0, 0, 0, 1}); }

    const std::map<Monomial, Rational>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    /// Degrees in x and y only; α and β count as constants. −1 for zero.
    int degree_x() const;
    int degree_y() const;
    int total_degree() const;

    BivariatePoly& operator+=(const BivariatePoly& o);
    BivariatePoly& operator-=(const BivariatePoly& o);
    BivariatePoly& operator*=(const BivariatePoly& o);
    friend BivariatePoly operator+(BivariatePoly p, const BivariatePoly& q) { return p += q; }
    friend BivariatePoly operator-(BivariatePoly p, const BivariatePoly& q) { return p -= q; }
    friend BivariatePoly operator*(BivariatePoly p, const BivariatePoly& q) { return p *= q; }
    BivariatePoly operator-() const;
    friend bool operator==(const BivariatePoly&, const BivariatePoly&) = default;

    BivariatePoly pow(int k) const;
    BivariatePoly dx() const;
    BivariatePoly dy() const;
    /// ∫₀ˣ p(t, y) dt, term by term.
    BivariatePoly integrate_x() const;

    /// Exact value at rational (x, y, α, β).
    Rational evaluate(const Rational& x, const Rational& y, const Rational& alpha, const Rational& beta) const;
    double evaluate(double x, double y, double alpha, double beta) const;
    /// Coefficients c_k of x^k after substituting y, α and β.
    std::vector<double> x_coefficients(double y, double alpha, double beta) const;

    /// Text form such as "2*x^8 - 16*x^6*y^2 - 7*b*x^5 - 10*a" with a = α
    /// and b = β; terms in descending x, then y, then α, then β exponents.
    std::string to_string() const;
    /// Inverse of to_string; also accepts any order, spacing and repeated
    /// factors. Throws SchemaError with the offending position.
    static BivariatePoly parse(std::string_view text);

private:
    void add_term(const Monomial& m, const Rational& c);
    std::map<Monomial, Rational> terms_;
};

/// x³ − 3xy² − β.
BivariatePoly p_base();
/// The explicit family indexed by m ≥ 0.
BivariatePoly rule_ii(int m);
/// p_y + 2(x³ − 3xy² − β)∫₀ˣ p dt.
BivariatePoly rule_iii(const BivariatePoly& p);
/// p_xx + p_yy + 12x²y·p + 4(x³ − 3xy² − β)∫₀ˣ p_y dt.
BivariatePoly rule_iv(const BivariatePoly& p);

/// A generated family member and the rules that produced it, e.g.
/// "iv(iii(ii(0)))".
struct GeneratedPoly {
    BivariatePoly poly;
    std::string recipe;
    int depth = 0;
};

/// Every nonzero polynomial reachable from p_base and rule_ii(m) by at most
/// `depth` applications of rule_iii and rule_iv, with total degree ≤
/// degree_cap. Duplicates keep the first recipe found.
std::vector<GeneratedPoly> enumerate_family(int depth, int degree_cap);

/// Applies a composition script such as "iii(base)", "iv(ii(2))" or
/// "iii(iii(base))". Throws SchemaError on malformed scripts.
BivariatePoly apply_recipe(std::string_view recipe);

struct OrthogonalityResult {
    double y = 0.0;
    /// |∫p|u|²dx| / ∫(1 + |x|^{deg_x p})|u|²dx.
    double residual = 0.0;
    /// Envelope bound on the weighted tail beyond the row, same units.
    double tail = 0.0;
};

/// Row-quadrature residuals with α, β taken from the grid's eigenvalue.
/// Throws PreconditionError if a y value is not a grid row or if the
/// weighted decay tail exceeds tail_budget.
std::vector<OrthogonalityResult> orthogonality_test(const BivariatePoly& p, const FieldGrid& grid,
                                                    const std::vector<double>& y_values, double tail_budget = 1e-10);

/// orthogonality_test over many polynomials, run concurrently.
std::vector<std::vector<OrthogonalityResult>> orthogonality_batch(const std::vector<BivariatePoly>& polys,
                                                                  const FieldGrid& grid,
                                                                  const std::vector<double>& y_values,
                                                                  double tail_budget = 1e-10);

}  // namespace ptspectra
