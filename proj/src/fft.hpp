#pragma once

#include <complex>
#include <vector>

#include "madelung/grid.hpp"

namespace madelung::detail {

/// Angular wavenumbers 2 pi k / L in FFTW order. The Nyquist entry (even n)
/// is reported with a negative sign.
std::vector<double> wavenumbers(std::size_t n, double length);

/// Unnormalised in-place DFT of every grid line along `axis`.
/// sign = -1 forward, +1 backward.
void transform_axis(std::vector<Complex>& data, const GridSpec& grid, int axis, int sign);

/// Unnormalised in-place DFT over all active axes.
void transform_all(std::vector<Complex>& data, const GridSpec& grid, int sign);

} // namespace madelung::detail
