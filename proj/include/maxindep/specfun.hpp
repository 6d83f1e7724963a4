#pragma once

namespace maxindep::specfun {

struct AiryPair {
    double value;
    double derivative;
};

// Ai(x) and Ai'(x). Throws std::domain_error on non-finite input.
AiryPair airy_ai(double x);

// J_nu(x) for real order nu >= 0 and x >= 0.
double bessel_j(double nu, double x);

// d/dnu J_nu(x) by central difference (step 1e-5 in the order).
double bessel_j_order_derivative(double nu, double x);

// [z^k] e^{s(z + 1/z)}, symmetric in k <-> -k.  Equals the standard
// modified Bessel function I_|k|(2s).
double modified_bessel_coeff(long long k, double s);

// Standard normal density and distribution function.
double gaussian_pdf(double x);
double gaussian_cdf(double x);

// m_j(t) = int_{-inf}^t x^j e^{-x^2/2} dx / sqrt(2 pi), via the recurrence
// m_j = (j-1) m_{j-2} - t^{j-1} phi(t), m_0 = Phi(t), m_1 = -phi(t).
double truncated_gaussian_moment(int j, double t);

// int_x^inf Ai(u) du, by quadrature over the decaying tail.
double airy_integral_tail(double x);

// int_x^inf Ai(u)^2 du.
double airy_square_tail(double x);

}  // namespace maxindep::specfun
