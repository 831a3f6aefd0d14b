#pragma once

#include "bosegas/errors.hpp"
#include "bosegas/numeric.hpp"
#include "bosegas/trap_spectrum.hpp"
#include "bosegas/canonical.hpp"
#include "bosegas/grand_canonical.hpp"
#include "bosegas/coherence.hpp"
#include "bosegas/sweep.hpp"
