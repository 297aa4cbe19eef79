#pragma once

#include "convtraj/benson.hpp"
#include "convtraj/census.hpp"
#include "convtraj/error.hpp"
#include "convtraj/io.hpp"
#include "convtraj/lp.hpp"
#include "convtraj/partition.hpp"
#include "convtraj/patches.hpp"
#include "convtraj/pipeline.hpp"
#include "convtraj/poly.hpp"
#include "convtraj/polytope.hpp"
#include "convtraj/presets.hpp"
#include "convtraj/quickhull.hpp"
#include "convtraj/sampler.hpp"
#include "convtraj/systems.hpp"
