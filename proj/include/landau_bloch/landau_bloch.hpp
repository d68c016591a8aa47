#pragma once

#include "landau_bloch/errors.hpp"
#include "landau_bloch/lattice.hpp"
#include "landau_bloch/special.hpp"
#include "landau_bloch/potential.hpp"
#include "landau_bloch/landau_fiber.hpp"
#include "landau_bloch/band_structure.hpp"
#include "landau_bloch/criterion.hpp"
#include "landau_bloch/perturber.hpp"
#include "landau_bloch/verify.hpp"
#include "landau_bloch/pipeline.hpp"
