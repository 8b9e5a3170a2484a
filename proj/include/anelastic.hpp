/// @file anelastic.hpp
/// @brief Umbrella header.
#pragma once

#include "anelastic/mesh.hpp"
#include "anelastic/equilibrium.hpp"
#include "anelastic/imex.hpp"
#include "anelastic/spatial.hpp"
#include "anelastic/elliptic.hpp"
#include "anelastic/stepper.hpp"
#include "anelastic/cases.hpp"
#include "anelastic/driver.hpp"
