#pragma once

#include "lptem/assignment.hpp"
#include "lptem/config.hpp"
#include "lptem/csv.hpp"
#include "lptem/dataset.hpp"
#include "lptem/error.hpp"
#include "lptem/image.hpp"
#include "lptem/imaging.hpp"
#include "lptem/parallel.hpp"
#include "lptem/pgm.hpp"
#include "lptem/rng.hpp"
#include "lptem/segmetrics.hpp"
#include "lptem/svg.hpp"
#include "lptem/tracklink.hpp"
#include "lptem/trajectory.hpp"
#include "lptem/trajgen.hpp"
#include "lptem/trajstats.hpp"
