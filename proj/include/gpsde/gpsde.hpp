#pragma once

#include "gpsde/common.hpp"
#include "gpsde/config.hpp"
#include "gpsde/covariance.hpp"
#include "gpsde/csv.hpp"
#include "gpsde/estimator.hpp"
#include "gpsde/grid.hpp"
#include "gpsde/kernels.hpp"
#include "gpsde/mc.hpp"
#include "gpsde/quadrature.hpp"
#include "gpsde/rng.hpp"
#include "gpsde/sde.hpp"
#include "gpsde/stats.hpp"
#include "gpsde/trend.hpp"
