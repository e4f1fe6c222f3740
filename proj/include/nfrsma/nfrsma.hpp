// SPDX-License-Identifier: Apache-2.0
//
// nfrsma - near-field rate-splitting ISAC simulation library
// Copyright (C) 2026 The nfrsma Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef NFRSMA_NFRSMA_HPP
#define NFRSMA_NFRSMA_HPP

#include "nfrsma/errors.hpp"
#include "nfrsma/rng.hpp"
#include "nfrsma/scenario.hpp"
#include "nfrsma/channel.hpp"
#include "nfrsma/types.hpp"
#include "nfrsma/precoding.hpp"
#include "nfrsma/rates.hpp"
#include "nfrsma/crb.hpp"
#include "nfrsma/convex.hpp"
#include "nfrsma/inner_solver.hpp"
#include "nfrsma/selection.hpp"
#include "nfrsma/experiments.hpp"

#endif
