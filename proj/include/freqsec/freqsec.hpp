// Copyright 2026 The freqsec Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef FREQSEC_FREQSEC_HPP_
#define FREQSEC_FREQSEC_HPP_

#include "freqsec/dataset.hpp"
#include "freqsec/errors.hpp"
#include "freqsec/experiments.hpp"
#include "freqsec/freq_sim.hpp"
#include "freqsec/lp_format.hpp"
#include "freqsec/lp_simplex.hpp"
#include "freqsec/milp_encode.hpp"
#include "freqsec/milp_model.hpp"
#include "freqsec/milp_solver.hpp"
#include "freqsec/mlp.hpp"
#include "freqsec/rng.hpp"
#include "freqsec/system_model.hpp"
#include "freqsec/uc_heuristic.hpp"
#include "freqsec/uc_model.hpp"

#endif  // FREQSEC_FREQSEC_HPP_
