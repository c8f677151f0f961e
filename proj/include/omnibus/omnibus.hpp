#ifndef OMNIBUS_OMNIBUS_HPP
#define OMNIBUS_OMNIBUS_HPP

// Umbrella header for the omnibus non-inferiority testing library.

#include "omnibus/bayes.hpp"
#include "omnibus/beta_inc.hpp"
#include "omnibus/design.hpp"
#include "omnibus/errors.hpp"
#include "omnibus/inference.hpp"
#include "omnibus/model_fit.hpp"
#include "omnibus/ncf.hpp"
#include "omnibus/rng.hpp"
#include "omnibus/sim_config.hpp"
#include "omnibus/sim_io.hpp"
#include "omnibus/simulation.hpp"
#include "omnibus/version.hpp"

#endif  // OMNIBUS_OMNIBUS_HPP
