#pragma once

#include "respred/bounds.hpp"
#include "respred/dataset.hpp"
#include "respred/errors.hpp"
#include "respred/experiment.hpp"
#include "respred/hankel.hpp"
#include "respred/pce.hpp"
#include "respred/predictor.hpp"
#include "respred/residual.hpp"
#include "respred/rng.hpp"
#include "respred/synthetic.hpp"
#include "respred/types.hpp"
