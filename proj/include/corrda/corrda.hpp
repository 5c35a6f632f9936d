#pragma once

// Umbrella header: correspondence-based domain adaptation toolkit.

#include "corrda/affinity.hpp"
#include "corrda/cg.hpp"
#include "corrda/classifiers.hpp"
#include "corrda/common.hpp"
#include "corrda/csv.hpp"
#include "corrda/dataset.hpp"
#include "corrda/dense_lp.hpp"
#include "corrda/mapping.hpp"
#include "corrda/objective.hpp"
#include "corrda/pipeline.hpp"
#include "corrda/transport.hpp"
#include "corrda/validation.hpp"
