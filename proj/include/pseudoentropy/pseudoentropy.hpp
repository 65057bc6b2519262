#pragma once

#include "attack.hpp"
#include "ballsbins.hpp"
#include "distribution.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "gf2.hpp"
#include "hashing.hpp"
#include "io.hpp"
#include "moments.hpp"
#include "numeric.hpp"
#include "random.hpp"
