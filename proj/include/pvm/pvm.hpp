#pragma once

#include "pvm/problem.hpp"
#include "pvm/merit.hpp"
#include "pvm/ldl.hpp"
#include "pvm/kkt.hpp"
#include "pvm/newton.hpp"
#include "pvm/solver.hpp"
#include "pvm/mpc.hpp"
#include "pvm/bench.hpp"
#include "pvm/io.hpp"
