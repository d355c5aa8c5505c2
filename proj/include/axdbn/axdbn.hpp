// Copyright (c) 2026 AXDBN Authors. All Rights Reserved.
//
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

#ifndef AXDBN_AXDBN_HPP_
#define AXDBN_AXDBN_HPP_

#include "axdbn/axsearch.hpp"
#include "axdbn/common.hpp"
#include "axdbn/criticality.hpp"
#include "axdbn/dataio.hpp"
#include "axdbn/inference.hpp"
#include "axdbn/model.hpp"
#include "axdbn/power.hpp"
#include "axdbn/precision.hpp"
#include "axdbn/qformat.hpp"
#include "axdbn/reporting.hpp"
#include "axdbn/rng.hpp"
#include "axdbn/serialize.hpp"
#include "axdbn/training.hpp"

#endif  // AXDBN_AXDBN_HPP_
