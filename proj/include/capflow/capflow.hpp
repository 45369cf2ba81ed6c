#pragma once

#include "capflow/analysis.hpp"
#include "capflow/config.hpp"
#include "capflow/distance.hpp"
#include "capflow/energy.hpp"
#include "capflow/flow.hpp"
#include "capflow/grid.hpp"
#include "capflow/io.hpp"
#include "capflow/maxflow.hpp"
#include "capflow/mincut.hpp"
#include "capflow/oracle.hpp"
#include "capflow/relax.hpp"
#include "capflow/report.hpp"
#include "capflow/stencil.hpp"
#include "capflow/summation.hpp"
