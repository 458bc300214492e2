#pragma once

#include "maraug/datasetio.hpp"
#include "maraug/detmetrics.hpp"
#include "maraug/error.hpp"
#include "maraug/imageio.hpp"
#include "maraug/pipeline.hpp"
#include "maraug/pixelops.hpp"
#include "maraug/random.hpp"
#include "maraug/reporting.hpp"
#include "maraug/weather_condition.hpp"
#include "maraug/weathersim.hpp"
