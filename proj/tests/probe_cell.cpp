#include <chrono>
#include <iostream>

#include "trigf/gf.hpp"

using namespace trigf;

int main() {
  XiModel m(XiConfig{1e-2, true});
  auto t0 = std::chrono::steady_clock::now();
  CellSystemConfig c1;
  c1.x0 = 1.0;
  c1.mass_floor = 4e-3;
  c1.need_extinction = true;
  size_t cells = 0;
  double ext = 0;
  for (uint64_t i = 0; i < 20; ++i) {
    auto r = simulate_cell_system(m, c1, derive_key(31, i));
    cells += r.cell_count;
    ext += r.extinction;
  }
  auto t1 = std::chrono::steady_clock::now();
  std::cout << "20 systems: " << std::chrono::duration<double>(t1 - t0).count()
            << " s, cells avg " << cells / 20 << " mean ext " << ext / 20 << "\n";
  return 0;
}
