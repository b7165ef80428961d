// Blow-up times of single characteristics r0 = 1, F0 = u0 = 0 for a few
// initial density gradients v0, and the same at a tighter tolerance.

#include <cstdio>

#include "eplab/characteristics.hpp"
#include "eplab/phase.hpp"

int main() {
  using namespace eplab;
  const auto tight = ode::IntegrationConfig{}.with_tolerance(1e-12);
  std::printf("%3s %6s %6s %14s %14s %10s\n", "d", "G0", "v0", "t*", "t* (1e-12)", "periods");
  for (int d : {2, 3, 4, 5}) {
    const double G0 = d == 5 ? 0.15 : 0.2;
    const double T = phase::period_through(Dim(d), {G0, 0.0});
    for (double v0 : {0.1, -0.1, -0.3}) {
      const characteristics::CharacteristicInit init{1.0, G0, 0.0, 0.0, v0};
      const auto a = characteristics::track(init, Dim(d), 3000.0);
      const auto b = characteristics::track(init, Dim(d), 3000.0, tight);
      if (a.blowup.blown_up) {
        std::printf("%3d %6.2f %6.2f %14.9f %14.9f %10.2f\n", d, G0, v0, *a.blowup.t_star,
                    b.blowup.t_star.value_or(-1.0), *a.blowup.t_star / T);
      } else {
        std::printf("%3d %6.2f %6.2f %14s %14s %10s  (q_min %.3g)\n", d, G0, v0, "none", "none", "-",
                    a.blowup.q_min);
      }
    }
  }
}
