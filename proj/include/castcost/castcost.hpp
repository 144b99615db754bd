#pragma once

#include "castcost/error.hpp"
#include "castcost/expr.hpp"
#include "castcost/model.hpp"
#include "castcost/resolve.hpp"
#include "castcost/validate.hpp"
#include "castcost/rollup.hpp"
#include "castcost/model_format.hpp"
#include "castcost/reference.hpp"
#include "castcost/scenario.hpp"
#include "castcost/report.hpp"
#include "castcost/service.hpp"
#include "castcost/cli.hpp"
