#pragma once

#include "csv.hpp"
#include "data.hpp"
#include "error.hpp"
#include "grouping_json.hpp"
#include "json_writer.hpp"
#include "multistage.hpp"
#include "pipelines.hpp"
#include "rng.hpp"
#include "scores.hpp"
#include "stats.hpp"
#include "svg.hpp"
#include "version.hpp"
