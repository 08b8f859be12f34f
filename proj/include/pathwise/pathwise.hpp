#pragma once

// Umbrella header.

#include "pathwise/area.hpp"
#include "pathwise/io.hpp"
#include "pathwise/levy.hpp"
#include "pathwise/linalg.hpp"
#include "pathwise/parametrise.hpp"
#include "pathwise/pvar.hpp"
#include "pathwise/rng.hpp"
#include "pathwise/rough.hpp"
#include "pathwise/sample_path.hpp"
#include "pathwise/sidecar.hpp"
#include "pathwise/solver.hpp"
#include "pathwise/vector_field.hpp"
#include "pathwise/young.hpp"
