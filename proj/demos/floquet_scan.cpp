// Floquet multiplier e^{mu T} against G+ for d = 1..5 on the 0.005 grid,
// printed as one CSV block per dimension, together with z(T) - 1 at two
// tolerances so the size of the integration error is visible next to it.

#include <cstdio>

#include "eplab/csv.hpp"
#include "eplab/floquet.hpp"

int main() {
  using namespace eplab;
  floquet::MonodromyOptions fine;
  fine.config = ode::IntegrationConfig{}.with_tolerance(1e-12);
  std::printf("d,g_plus,t,e_mut,zt_minus_1,zt_minus_1_fine\n");
  for (int d = 1; d <= 5; ++d) {
    const auto grid = floquet::scan_grid(Dim(d), 0.005);
    const auto coarse = floquet::floquet_scan(Dim(d), grid);
    const auto refined = floquet::floquet_scan(Dim(d), grid, fine);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!coarse[i].result || !refined[i].result) {
        std::fprintf(stderr, "d=%d g_plus=%s: %s\n", d, csv::format(grid[i]).c_str(),
                     (coarse[i].result ? refined[i].error : coarse[i].error).c_str());
        continue;
      }
      const auto& m = *coarse[i].result;
      std::printf("%d,%s,%s,%s,%s,%s\n", d, csv::format(grid[i]).c_str(), csv::format(m.T).c_str(),
                  csv::format(m.e_muT).c_str(), csv::format(m.zT - 1.0).c_str(),
                  csv::format(refined[i].result->zT - 1.0).c_str());
    }
  }
}
