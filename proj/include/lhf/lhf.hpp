#pragma once

#include "error.hpp"
#include "gabor_frame.hpp"
#include "hf_solver.hpp"
#include "hs_calculus.hpp"
#include "interaction.hpp"
#include "io.hpp"
#include "jet.hpp"
#include "landau_matrix.hpp"
#include "laguerre.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "radial_algebra.hpp"
#include "random.hpp"
#include "scalar_functions.hpp"
#include "twisted_grid.hpp"
#include "verify.hpp"
