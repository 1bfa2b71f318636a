#pragma once

#include <complex>
#include <span>
#include <vector>

#include "critmass/grid.hpp"

namespace critmass {

using cplx = std::complex<double>;

/// Unnormalized forward DFT over all axes of the grid.
std::vector<cplx> forward_transform(const Grid& grid, std::span<const cplx> values);
/// Inverse DFT including the 1/n^N factor, so inverse(forward(f)) == f.
std::vector<cplx> inverse_transform(const Grid& grid, std::span<const cplx> spectrum);

/// In-place variants; `data` must have grid.size() entries.
void forward_transform_inplace(const Grid& grid, std::span<cplx> data);
void inverse_transform_inplace(const Grid& grid, std::span<cplx> data);

}  // namespace critmass
