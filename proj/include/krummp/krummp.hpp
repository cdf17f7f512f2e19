#pragma once

#include "krummp/error.hpp"
#include "krummp/rng.hpp"
#include "krummp/metrics.hpp"
#include "krummp/signal.hpp"
#include "krummp/pencil.hpp"
#include "krummp/unmix.hpp"
#include "krummp/theory.hpp"
#include "krummp/matching.hpp"
#include "krummp/bench.hpp"
#include "krummp/io.hpp"
