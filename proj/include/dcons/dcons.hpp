#pragma once

#include "dcons/types.hpp"
#include "dcons/graph.hpp"
#include "dcons/matrix_functions.hpp"
#include "dcons/dynamics.hpp"
#include "dcons/rng.hpp"
#include "dcons/switching.hpp"
#include "dcons/analysis.hpp"
#include "dcons/verify.hpp"
#include "dcons/io.hpp"
#include "dcons/experiment.hpp"
