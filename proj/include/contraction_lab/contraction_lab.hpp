#pragma once

#include "contraction_lab/numkit.hpp"
#include "contraction_lab/json_io.hpp"
#include "contraction_lab/contraction.hpp"
#include "contraction_lab/asymptotic.hpp"
#include "contraction_lab/shmulyan.hpp"
#include "contraction_lab/harnack.hpp"
#include "contraction_lab/schur.hpp"
#include "contraction_lab/corpus.hpp"
#include "contraction_lab/suites.hpp"
