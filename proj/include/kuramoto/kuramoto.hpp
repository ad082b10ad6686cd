// Umbrella header.
#pragma once

#include "branch.hpp"
#include "cycle_space.hpp"
#include "exact.hpp"
#include "graph.hpp"
#include "graph_io.hpp"
#include "lp.hpp"
#include "polytope.hpp"
#include "winding_map.hpp"
#include "enumeration.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "stability.hpp"
#include "quadrature.hpp"
#include "measure.hpp"
#include "sweep.hpp"
#include "report.hpp"
