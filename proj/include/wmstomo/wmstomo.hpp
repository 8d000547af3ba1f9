#pragma once

#include "wmstomo/commands.hpp"
#include "wmstomo/csv.hpp"
#include "wmstomo/dli.hpp"
#include "wmstomo/fitting.hpp"
#include "wmstomo/fixed_point.hpp"
#include "wmstomo/linelist.hpp"
#include "wmstomo/model.hpp"
#include "wmstomo/mux.hpp"
#include "wmstomo/noise.hpp"
#include "wmstomo/scenario.hpp"
#include "wmstomo/spectroscopy.hpp"
#include "wmstomo/tomography.hpp"
