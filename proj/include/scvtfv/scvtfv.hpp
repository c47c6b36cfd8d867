#pragma once

#include "scvtfv/advection.hpp"
#include "scvtfv/errors.hpp"
#include "scvtfv/experiment.hpp"
#include "scvtfv/geometry.hpp"
#include "scvtfv/grid.hpp"
#include "scvtfv/grid_io.hpp"
#include "scvtfv/limiter.hpp"
#include "scvtfv/metrics.hpp"
#include "scvtfv/quadrature.hpp"
#include "scvtfv/reconstruction.hpp"
#include "scvtfv/testcases.hpp"
#include "scvtfv/timestepping.hpp"
#include "scvtfv/windrecon.hpp"
#include "scvtfv/winds.hpp"
