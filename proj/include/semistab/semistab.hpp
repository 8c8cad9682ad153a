#pragma once

#include "semistab/battery.hpp"
#include "semistab/cli.hpp"
#include "semistab/contour.hpp"
#include "semistab/decaylab.hpp"
#include "semistab/errors.hpp"
#include "semistab/fraccalc.hpp"
#include "semistab/linalg.hpp"
#include "semistab/multiplier.hpp"
#include "semistab/numcore.hpp"
#include "semistab/operators.hpp"
#include "semistab/parallel.hpp"
#include "semistab/resolvent.hpp"
