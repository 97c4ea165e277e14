#ifndef WSKM_WSKM_HPP
#define WSKM_WSKM_HPP

// Umbrella header for the weakly-supervised constrained clustering library.

#include "wskm/error.hpp"
#include "wskm/estep.hpp"
#include "wskm/init.hpp"
#include "wskm/io.hpp"
#include "wskm/matrix.hpp"
#include "wskm/mstep.hpp"
#include "wskm/pipeline.hpp"
#include "wskm/subspace.hpp"
#include "wskm/synth.hpp"
#include "wskm/tags.hpp"

#endif  // WSKM_WSKM_HPP
