#pragma once

namespace stfreq {

/// Modified Bessel function of the second kind K_nu(x), x > 0.
///
/// Temme's series for x < 2 and Steed's continued fraction for x >= 2 give
/// K_mu and K_{mu+1} at |mu| <= 1/2; forward recurrence lifts the order to
/// nu. Negative orders use K_{-nu} = K_nu. Throws DomainError for x <= 0.
double bessel_k(double nu, double x);

}  // namespace stfreq
