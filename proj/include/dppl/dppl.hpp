// Copyright 2026 The DPPL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPPL_DPPL_HPP_
#define DPPL_DPPL_HPP_

#include "dppl/classify.hpp"
#include "dppl/common.hpp"
#include "dppl/data.hpp"
#include "dppl/eval.hpp"
#include "dppl/mean.hpp"
#include "dppl/mechanisms.hpp"
#include "dppl/privacy.hpp"
#include "dppl/prototypes.hpp"
#include "dppl/rng.hpp"
#include "dppl/select.hpp"
#include "dppl/serialize.hpp"

#endif  // DPPL_DPPL_HPP_
