#include "turbdisp/config.hpp"

namespace turbdisp {

namespace {

constexpr const char* kStructure = R"ini([run]
preset = structure
seed = 1
n_modes = 256

[params]
alpha = 1.2
beta = 0.45
dim = 2
e0_amplitude = 1
a_rate = 1
ell0_length = 1
ell1_length = 0.01

[structure]
; tau = 0.125 is one correlation time at the geometric mid-band wavenumber
separations_length = 0.02, 0.1, 0.5, 0.1, 0.5
lags_time = 0, 0, 0, 0.125, 0.125
realizations = 10000
mode_lags_time = 0.05, 0.2, 0.5
probe_modes = 4
)ini";

constexpr const char* kRichardson = R"ini([run]
preset = richardson
seed = 1
model = kraichnan
n_pairs = 10000

[params]
alpha = 1.2
beta = 0.45
dim = 2
; C_{alpha+beta}(2): unit prefactor of the limit structure function
e0_amplitude = 11.731716641402848
a_rate = 1
ell0_length = 1
ell1_length = 0.001
kappa0_diffusivity = 0

[observe]
r0_length = 1
t_min_time = 0.01
t_max_time = 1000
n_times = 200
fit_t_min_time = 30
fit_t_max_time = 300
exponent_tolerance = 0.1
)ini";

constexpr const char* kFourThirds = R"ini([run]
preset = four-thirds
seed = 1
model = kraichnan
n_pairs = 10000

[params]
alpha = 1.2
beta = 0.45
dim = 2
e0_amplitude = 11.731716641402848
a_rate = 1
ell0_length = 1
ell1_length = 0.001
kappa0_diffusivity = 0

[observe]
r0_length = 1
t_min_time = 0.01
t_max_time = 1000
n_times = 200
r_bin_min_length = 0.5
r_bin_max_length = 1077.2173450159418
n_bins = 20
fit_r_min_length = 0.5
fit_r_max_length = 1077.2173450159418
lag_fraction = 0.2
control_kappa_diffusivity = 0.5
exponent_tolerance = 0.1
)ini";

constexpr const char* kKraichnanLimit = R"ini([run]
preset = kraichnan-limit
seed = 1

[params]
alpha = 1.05
beta = 0.7
dim = 2
e0_amplitude = 1
a_rate = 1
ell0_length = 10
ell1_length = 1.25

[observe]
r0_length = 1
t_min_time = 0.1
t_max_time = 50
n_times = 60
fit_t_min_time = 1
fit_t_max_time = 50

[sweep]
epsilons = 0.4, 0.2, 0.1
k_cut_wavenumber = 0.8
k_cut_eps_power = 0
l_outer_length = 10
l_outer_eps_power = 0
kappa_tilde_diffusivity = 0.01
kappa_tilde_eps_power = 0
threshold = 0.1
n_modes = 128
n_pairs = 500
oracle_pairs = 2000
)ini";

constexpr const char* kDissipation = R"ini([run]
preset = dissipation
seed = 1
n_modes = 64

[params]
alpha = 1.2
beta = 0.45
dim = 2
e0_amplitude = 1
a_rate = 1
ell0_length = 1
ell1_length = 0.05

[scalar]
transport = colored
profile = cosine
center_length = 0, 0
width_length = 0.35
grid_half_width_length = 1
grid_cells = 32
times_time = 0.1, 0.3, 0.6
kappa_tilde_diffusivity = 0.02
mc_paths = 32
dt_time = 0.005
epsilon = 1
band_min_wavenumber = 1
band_max_wavenumber = 20
control_pure_transport = true
control_grid_cells = 100
control_time = 0.5
)ini";

constexpr const char* kBoundary = R"ini([run]
preset = boundary
seed = 1
model = colored
n_pairs = 400
n_modes = 64
epsilon = 0.5

[params]
; alpha + 2 beta = 2
alpha = 1.2
beta = 0.4
dim = 2
e0_amplitude = 1
a_rate = 1
ell0_length = 1
ell1_length = 0.01

[observe]
r0_length = 0.01
t_min_time = 0.01
t_max_time = 2
n_times = 40
fit_t_min_time = 0.1
fit_t_max_time = 2
exponent_tolerance = 0
)ini";

}  // namespace

std::string preset_ini(Preset p) {
  switch (p) {
    case Preset::Structure: return kStructure;
    case Preset::Richardson: return kRichardson;
    case Preset::FourThirds: return kFourThirds;
    case Preset::KraichnanLimit: return kKraichnanLimit;
    case Preset::Dissipation: return kDissipation;
    case Preset::Boundary: return kBoundary;
  }
  return {};
}

}  // namespace turbdisp
