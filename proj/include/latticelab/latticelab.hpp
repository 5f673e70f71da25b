#ifndef LATTICELAB_LATTICELAB_HPP
#define LATTICELAB_LATTICELAB_HPP

#include "fft.hpp"
#include "functions.hpp"
#include "haar_sphere.hpp"
#include "lattice_periodization.hpp"
#include "numerics.hpp"
#include "oscillatory_kernels.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "rotation.hpp"
#include "shell_analysis.hpp"
#include "sums_of_squares.hpp"
#include "theorem_suite.hpp"

#endif
