#pragma once

#include "osgm/error.hpp"
#include "osgm/linalg.hpp"
#include "osgm/rng.hpp"
#include "osgm/problems.hpp"
#include "osgm/scaling.hpp"
#include "osgm/surrogates.hpp"
#include "osgm/learners.hpp"
#include "osgm/oracles.hpp"
#include "osgm/solvers.hpp"
#include "osgm/diagnostics.hpp"
#include "osgm/precondlab.hpp"
#include "osgm/dataio.hpp"
#include "osgm/trace_io.hpp"
#include "osgm/svg_plot.hpp"
