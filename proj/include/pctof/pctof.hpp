#pragma once

#include "pctof/acquisition.hpp"
#include "pctof/analysis.hpp"
#include "pctof/calibration.hpp"
#include "pctof/constants.hpp"
#include "pctof/erf.hpp"
#include "pctof/errors.hpp"
#include "pctof/image_io.hpp"
#include "pctof/json_codec.hpp"
#include "pctof/monotone.hpp"
#include "pctof/parallel.hpp"
#include "pctof/quadrature.hpp"
#include "pctof/reconstruction.hpp"
#include "pctof/rng.hpp"
#include "pctof/scene.hpp"
#include "pctof/signal_model.hpp"
