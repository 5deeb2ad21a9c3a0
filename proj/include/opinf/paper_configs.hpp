#pragma once

#include <string_view>

namespace opinf {

/// Built-in experiment profiles.  The same text is checked in under
/// configs/; a unit test keeps the two copies from drifting apart.

inline constexpr std::string_view kBurgersPaperConfig = R"(# Viscous Burgers, full-scale study profile
problem = burgers
mu = 0.1
dt = 1e-4
T = 1.0
stride = 100
scheme = semi-implicit-euler
r_max = 10
r_list = 2 3 4 5 6 7 8 9 10
method_list = intrusive opinf ep-opinf
ridge = 0.0
derivative_mode = exact-rhs
autocorr_k_max = 50
autocorr_burn_in = 0
output_dir = out/burgers-paper

[grid]
n = 128
L = 1.0

[training_ics]
A = 0.8 0.9 1.0 1.1 1.2
f = 1 2 3
phi = -0.25 -0.125 0.0 0.125 0.25

[test_ics.interpolation]
count = 50
seed = 9001
region = inside
A = 0.8 1.2
f = 1 2 3
phi = -0.25 0.25

[test_ics.extrapolation]
count = 50
seed = 9002
region = outside
A = 0.5 0.8 1.2 1.5
f = 4 5 6
phi = -0.5 -0.25 0.25 0.5
)";

inline constexpr std::string_view kKseDeskConfig = R"(# Kuramoto-Sivashinsky, desk-scale profile (CI-friendly)
problem = kse
mu = 1.0
dt = 1e-3
T = 60.0
stride = 100
scheme = cnab2
r_max = 16
r_list = 9 12 16
method_list = intrusive opinf ep-opinf
ridge = 0.0
derivative_mode = exact-rhs
autocorr_k_max = 400
autocorr_burn_in = 0
output_dir = out/kse-desk

[grid]
n = 256
L = 22.0

[training_ics]
a = 0.8 1.0 1.2
b = 0.2 0.4 0.6

[test_ics.interpolation]
count = 10
seed = 9101
region = inside
a = 0.8 1.2
b = 0.2 0.6

[test_ics.extrapolation]
count = 10
seed = 9102
region = outside
a = 0.0 0.8 1.2 2.0
b = 0.0 0.2 0.6 0.8
)";

inline constexpr std::string_view kKsePaperConfig = R"(# Kuramoto-Sivashinsky, full-scale study profile (long run, opt-in)
problem = kse
mu = 1.0
dt = 1e-3
T = 300.0
stride = 100
scheme = cnab2
r_max = 24
r_list = 9 12 20 24
method_list = intrusive opinf ep-opinf
ridge = 0.0
derivative_mode = exact-rhs
autocorr_k_max = 400
autocorr_burn_in = 0
output_dir = out/kse-paper

[grid]
n = 512
L = 22.0

[training_ics]
a = 0.8 1.0 1.2
b = 0.2 0.4 0.6

[test_ics.interpolation]
count = 50
seed = 9101
region = inside
a = 0.8 1.2
b = 0.2 0.6

[test_ics.extrapolation]
count = 50
seed = 9102
region = outside
a = 0.0 0.8 1.2 2.0
b = 0.0 0.2 0.6 0.8
)";

}  // namespace opinf
