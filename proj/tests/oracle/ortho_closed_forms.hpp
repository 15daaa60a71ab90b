#pragma once

// Closed forms of the orthogonal polynomial family, computed independently
// with a computer algebra system (sympy: expand, diff, integrate) directly
// from the generator formulas. p3 and p7–p10 are the printed list; the last
// two have no printed form and were derived the same way.

namespace ptspectra::oracle {

inline constexpr const char* kP3 = "x^3 - 3*x*y^2 - b";
inline constexpr const char* kP7 = "x^7 - 9*x^5*y^2 - 5*b*x^4 + 18*x^3*y^4 + 18*b*x^2*y^2 + 4*b^2*x - 12*x*y";
inline constexpr const char* kP8 =
    "2*x^8 - 16*x^6*y^2 - 7*b*x^5 + 30*x^4*y^4 + 25*b*x^3*y^2 - 60*x^2*y + 5*b^2*x^2 + 10*y^3 - 10*a";
inline constexpr const char* kP9 =
    "2*x^9 - 15*x^7*y^2 - 6*b*x^6 + 27*x^5*y^4 + 4*b^2*x^3 - 108*x^3*y + 24*x*y^3 + 21*b*x^4*y^2 - 24*a*x";
inline constexpr const char* kP10 =
    "20*x^10 - 144*x^8*y^2 - 55*b*x^7 + 252*x^6*y^4 + 189*b*x^5*y^2 - 1680*x^4*y + 35*b^2*x^4 + 420*x^2*y^3"
    " - 420*a*x^2 - 210";

/// rule_iv(p7) = −36y²·p3.
inline constexpr const char* kRuleIvOfP7 = "36*b*y^2 - 36*x^3*y^2 + 108*x*y^4";
/// rule_iii(p8).
inline constexpr const char* kRuleIiiOfP8 =
    "20*a*b*x - 20*a*x^4 + 60*a*x^2*y^2 - 10/3*b^3*x^3 + 17/3*b^2*x^6 - 45/2*b^2*x^4*y^2 - 25/9*b*x^9"
    " + 337/14*b*x^7*y^2 - 99/2*b*x^5*y^4 + 90*b*x^3*y - 20*b*x*y^3 + 4/9*x^12 - 124/21*x^10*y^2"
    " + 180/7*x^8*y^4 - 36*x^6*y^6 - 72*x^6*y + 260*x^4*y^3 - 60*x^2*y^5 - 60*x^2 + 30*y^2";

}  // namespace ptspectra::oracle
