#pragma once

// Convenience umbrella: pulls in the whole library.

#include "entsim/types.hpp"
#include "entsim/hilbert.hpp"
#include "entsim/operators.hpp"
#include "entsim/superoperator.hpp"
#include "entsim/unraveling.hpp"
#include "entsim/protocols.hpp"
#include "entsim/purification.hpp"
#include "entsim/sweeps.hpp"
