#pragma once
// Umbrella header: joint photocount statistics, non-classicality criteria,
// ordering/noise quantifiers, model generators, scan drivers and file I/O.

#include "qnc/catalog.hpp"
#include "qnc/criteria.hpp"
#include "qnc/errors.hpp"
#include "qnc/generators.hpp"
#include "qnc/io.hpp"
#include "qnc/kernels.hpp"
#include "qnc/parse.hpp"
#include "qnc/pmf.hpp"
#include "qnc/quantifiers.hpp"
#include "qnc/scanners.hpp"
