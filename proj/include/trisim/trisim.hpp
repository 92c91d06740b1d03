#pragma once

#include "trisim/algebraic.hpp"
#include "trisim/config.hpp"
#include "trisim/conserved.hpp"
#include "trisim/derived.hpp"
#include "trisim/error.hpp"
#include "trisim/geometry.hpp"
#include "trisim/integrate.hpp"
#include "trisim/io.hpp"
#include "trisim/orbit_search.hpp"
#include "trisim/potential.hpp"
#include "trisim/projection.hpp"
#include "trisim/random.hpp"
#include "trisim/scaling.hpp"
#include "trisim/state.hpp"
#include "trisim/syzygy.hpp"
#include "trisim/vec2.hpp"
