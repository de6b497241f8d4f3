#ifndef GRQSM_GRQSM_HPP
#define GRQSM_GRQSM_HPP

// Umbrella header for the RIS-GRQSM link-level simulator and phase-design
// library.

#include "grqsm/channel.hpp"
#include "grqsm/config.hpp"
#include "grqsm/index_map.hpp"
#include "grqsm/oracle.hpp"
#include "grqsm/phase_opt.hpp"
#include "grqsm/rng.hpp"
#include "grqsm/sim.hpp"
#include "grqsm/transceiver.hpp"

#endif // GRQSM_GRQSM_HPP
