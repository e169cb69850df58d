#pragma once

// Published parameter estimates and price tables used as reference points.

#include <array>

namespace reference {

// Detroit, daily data: CARMA(1,0) with Hougaard driver.
inline constexpr double detroit_lambda = 4.54;
inline constexpr double detroit_lambda_ci_lower = 4.06;
inline constexpr double detroit_lambda_ci_upper = 5.25;
inline constexpr double detroit_mu = 4.55;
inline constexpr double detroit_rho = 14.85;
inline constexpr double detroit_kappa = 1.62;
inline constexpr double detroit_bound = 0.042;  // exponential-moment bound as printed

// Heathrow, hourly data: CARMA(2,1).
inline constexpr double heathrow_w1 = 0.92;
inline constexpr double heathrow_lambda1 = 4.79;
inline constexpr double heathrow_lambda2 = 0.31;
inline constexpr double heathrow_mu = 2.15;
inline constexpr double heathrow_rho = 143.01;
inline constexpr double heathrow_kappa = 1.85;

// Percentage of implied zero observations: simulation average and data.
inline constexpr double heathrow_zero_simulated = 90.39;
inline constexpr double heathrow_zero_data = 91.27;
inline constexpr double detroit_zero_simulated = 59.52;
inline constexpr double detroit_zero_data = 48.14;

// Detroit futures valued on 2010-12-31, contract months March..October 2011.
inline constexpr int valuation_year = 2010;
inline constexpr std::array<int, 8> contract_months{3, 4, 5, 6, 7, 8, 9, 10};
// Model prices at theta = 0 and the CME quotes (inches).
inline constexpr std::array<double, 8> price_theta0{1.69, 2.10, 2.57, 2.60, 2.57, 2.39, 2.22, 2.24};
inline constexpr std::array<double, 8> cme_price{4.2, 4.4, 3.2, 5.0, 4.5, 4.3, 4.2, 4.6};
// Mar-11 row of the price table over theta = -0.01 .. 0.04.
inline constexpr std::array<double, 6> price_grid_theta{-0.01, 0.0, 0.01, 0.02, 0.03, 0.04};
inline constexpr std::array<double, 6> march_prices{1.20, 1.69, 2.61, 4.72, 12.12, 153.69};
// Price ratios to theta = 0 for March used by the acceptance check.
inline constexpr std::array<double, 4> ratio_theta{0.01, 0.02, 0.03, 0.04};
inline constexpr std::array<double, 4> ratio_expected{1.544, 2.793, 7.17, 90.9};
// Calibrated constant theta per contract month.
inline constexpr std::array<double, 8> calibrated_theta{0.0183, 0.0156, 0.0054, 0.0142,
                                                        0.0125, 0.0130, 0.01314, 0.0142};

}  // namespace reference
