#pragma once

// Reference values from a 40-digit evaluation of the bound formulas
// (mpmath), rounded to double.

#include <array>

namespace golden {

struct Case {
  double epsilon, delta, n_states, n_actions, gamma, r0_max;
  // eps1, eps2, H, m, beta, R_max, step bound
  std::array<double, 7> thm1, appx_b;
};

inline constexpr std::array<Case, 5> kCases{{
    {0.6, 0.1, 10, 2, 0.9, 1,
     {0.099999999999999996, 9.0909090909090867e-5, 46.051701859880926, 1060450445.5910803,
      73.175712023299228, 535468.48301168206, 720593795012732.13},
     {0.099999999999999996, 9.9999999999999952e-5, 46.051701859880926, 876405326.93477715,
      72.914749935764638, 53165.607581950894, 595532061993993.52}},
    {0.1, 0.05, 5, 3, 0.95, 2,
     {0.016666666666666668, 4.0650406504065114e-6, 155.66448032672058, 2457033748821.5132,
      334.31436989934336, 134119317.50543385, 1.2067245752075542e+20},
     {0.016666666666666668, 8.3333333333333486e-6, 141.80153671552169, 146165005878.73368,
      320.52422886491642, 3082073.4386834794, 3.2696544674538334e+18}},
    {1.0, 0.2, 4, 2, 0.5, 10,
     {0.16666666666666667, 0.00099206349206349206, 9.574983485564092, 749627522.7329645,
      140.90312598220888, 238244.29093869871, 41284571739816.298},
     {0.16666666666666667, 0.010416666666666667, 4.9698132995760006, 67993.426098228073,
      111.38830437396104, 7444.4126107837133, 194361940.35899115}},
    {0.3, 0.01, 20, 4, 0.99, 0.5,
     {0.049999999999999998, 4.9019607843137339e-7, 690.77552789821301, 55637360331725.501,
      454.58893541947875, 413302200.4116297, 3.6843123085847383e+22},
     {0.049999999999999998, 2.5000000000000043e-7, 760.09024595420748, 213907575285372.93,
      461.93565107972849, 8535381.8295381071, 3.117269112913554e+23}},
    {0.05, 0.5, 2, 2, 0.8, 1000,
     {0.0083333333333333338, 1.6663333999866687e-7, 66.523424670991433, 1.9970624654152043e+20,
      49757.395387867842, 1485479037470.7675, 1.3260326003145542e+29},
     {0.0083333333333333338, 0.0001666666666666666, 31.98464827608074, 199626388.0012644,
      33079.107333601331, 131307281.03855008, 63730522815072.539}},
}};

}  // namespace golden
