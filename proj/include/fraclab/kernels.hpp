#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fraclab/grid.hpp"

// Data-parallel inner loops.  Each kernel exists twice: `serial` is the
// reference used by the tests, `omp` splits the outer loop across OpenMP
// threads.  Both produce the same result up to summation order; the outer
// index is never reduced across threads, so in practice they agree bitwise.

namespace fraclab::kernels {

namespace serial {

/// out[i] = h * sum_j a[(i - j + N/2) mod N] b[j]; a is sampled with its
/// origin at node N/2.
std::vector<double> circular_convolution(std::span<const double> a, std::span<const double> b,
                                         double h);

/// out[t] = h^n sum_j k(|x_{targets[t]} - x_j|) f[j] over all grid nodes j.
std::vector<double> radial_pair_sum(const GridSpec& grid, std::span<const double> f,
                                    std::span<const std::size_t> targets,
                                    const std::function<double(double)>& k);

}  // namespace serial

namespace omp {

std::vector<double> circular_convolution(std::span<const double> a, std::span<const double> b,
                                         double h);

std::vector<double> radial_pair_sum(const GridSpec& grid, std::span<const double> f,
                                    std::span<const std::size_t> targets,
                                    const std::function<double(double)>& k);

}  // namespace omp

/// Number of threads the omp kernels will use.
int thread_count();
/// Sets the OpenMP thread count; values < 1 restore the runtime default.
void set_thread_count(int threads);

}  // namespace fraclab::kernels
