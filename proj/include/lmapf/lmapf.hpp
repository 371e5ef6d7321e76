#pragma once

#include "lmapf/error.hpp"
#include "lmapf/grid.hpp"
#include "lmapf/spacetime_search.hpp"
#include "lmapf/priority.hpp"
#include "lmapf/conflicts.hpp"
#include "lmapf/width_tracker.hpp"
#include "lmapf/pbs.hpp"
#include "lmapf/expbs.hpp"
#include "lmapf/lifelong.hpp"
#include "lmapf/scenario.hpp"
#include "lmapf/harness.hpp"
