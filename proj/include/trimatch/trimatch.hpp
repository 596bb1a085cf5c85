#pragma once

#include "trimatch/calibration.hpp"
#include "trimatch/distributions.hpp"
#include "trimatch/errors.hpp"
#include "trimatch/glm.hpp"
#include "trimatch/match.hpp"
#include "trimatch/model_io.hpp"
#include "trimatch/quadrature.hpp"
#include "trimatch/rng.hpp"
#include "trimatch/simulator.hpp"
#include "trimatch/special.hpp"
#include "trimatch/stats.hpp"
#include "trimatch/variance_gamma.hpp"
