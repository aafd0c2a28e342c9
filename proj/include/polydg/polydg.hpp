#pragma once

#include "agglomerate.hpp"
#include "analysis.hpp"
#include "assembly.hpp"
#include "basis.hpp"
#include "benchmark.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "io/config.hpp"
#include "io/csv.hpp"
#include "io/expression.hpp"
#include "io/run.hpp"
#include "io/snapshot.hpp"
#include "io/vtk.hpp"
#include "mesh.hpp"
#include "mesh_io.hpp"
#include "parallel.hpp"
#include "physics/elastodynamics.hpp"
#include "physics/heat.hpp"
#include "physics/poisson.hpp"
#include "physics/poroacoustic.hpp"
#include "physics/time_integration.hpp"
#include "quadrature.hpp"
#include "sparse.hpp"
#include "voronoi.hpp"
