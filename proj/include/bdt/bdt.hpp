// Copyright 2026 The bdt Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Everything.

#pragma once

#include "bdt/csv.hpp"
#include "bdt/dataset.hpp"
#include "bdt/ensemble.hpp"
#include "bdt/errors.hpp"
#include "bdt/eval.hpp"
#include "bdt/export.hpp"
#include "bdt/fit.hpp"
#include "bdt/folds.hpp"
#include "bdt/log_beta.hpp"
#include "bdt/partition.hpp"
#include "bdt/schema.hpp"
#include "bdt/tree.hpp"
