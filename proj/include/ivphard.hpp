// Copyright 2026 The ivphard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IVPHARD_IVPHARD_HPP
#define IVPHARD_IVPHARD_HPP

#include "ivphard/blocks.hpp"
#include "ivphard/corpus.hpp"
#include "ivphard/dyadic.hpp"
#include "ivphard/enclosure.hpp"
#include "ivphard/patchwork.hpp"
#include "ivphard/qbf.hpp"
#include "ivphard/real_name.hpp"
#include "ivphard/report.hpp"
#include "ivphard/solver.hpp"
#include "ivphard/tableau.hpp"
#include "ivphard/transcendental.hpp"

#endif  // IVPHARD_IVPHARD_HPP
