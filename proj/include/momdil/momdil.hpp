#pragma once

#include "errors.hpp"
#include "linalg.hpp"
#include "words.hpp"
#include "rng.hpp"
#include "ncpoly.hpp"
#include "ensemble.hpp"
#include "scenario_io.hpp"
#include "kernel.hpp"
#include "gns.hpp"
#include "fock.hpp"
#include "dilation.hpp"
#include "calculus.hpp"
#include "pipeline.hpp"
