#pragma once

#include "enlca/analysis.hpp"
#include "enlca/attention_reference.hpp"
#include "enlca/contrastive.hpp"
#include "enlca/enla.hpp"
#include "enlca/error.hpp"
#include "enlca/kernel_features.hpp"
#include "enlca/matrix.hpp"
#include "enlca/matrix_io.hpp"
#include "enlca/pgm.hpp"
#include "enlca/rng.hpp"
