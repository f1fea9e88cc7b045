#pragma once

#include "flatlyap/errors.hpp"
#include "flatlyap/rng.hpp"
#include "flatlyap/stats.hpp"
#include "flatlyap/parallel.hpp"
#include "flatlyap/linalg.hpp"
#include "flatlyap/geometry.hpp"
#include "flatlyap/brownian.hpp"
#include "flatlyap/cocycle.hpp"
#include "flatlyap/lyapunov.hpp"
#include "flatlyap/grassmann.hpp"
#include "flatlyap/harmonic.hpp"
#include "flatlyap/catalog.hpp"
#include "flatlyap/config.hpp"
#include "flatlyap/io.hpp"
#include "flatlyap/run.hpp"
