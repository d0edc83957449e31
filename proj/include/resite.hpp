#pragma once

#include "resite/cardinality.hpp"
#include "resite/cep.hpp"
#include "resite/cep_io.hpp"
#include "resite/comp_mir.hpp"
#include "resite/criticality.hpp"
#include "resite/csv.hpp"
#include "resite/error.hpp"
#include "resite/hydro.hpp"
#include "resite/local_search.hpp"
#include "resite/lp.hpp"
#include "resite/mps.hpp"
#include "resite/pipeline.hpp"
#include "resite/power_curve.hpp"
#include "resite/residual.hpp"
#include "resite/rng.hpp"
#include "resite/simplex.hpp"
#include "resite/site_catalog.hpp"
#include "resite/siting.hpp"
#include "resite/siting_io.hpp"
#include "resite/synthetic.hpp"
#include "resite/time_series.hpp"
