#pragma once

#include "richards/errors.hpp"
#include "richards/soil.hpp"
#include "richards/hydraulics.hpp"
#include "richards/mesh.hpp"
#include "richards/assembly.hpp"
#include "richards/solver.hpp"
#include "richards/surface.hpp"
#include "richards/config.hpp"
#include "richards/output.hpp"
#include "richards/simulation.hpp"
