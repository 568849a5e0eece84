// Copyright 2026 The LQER Authors
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
#pragma once

#include "lqer/data/augment.hpp"
#include "lqer/data/directory.hpp"
#include "lqer/data/image.hpp"
#include "lqer/data/patches.hpp"
#include "lqer/data/png.hpp"
#include "lqer/data/sample.hpp"
#include "lqer/data/split.hpp"
#include "lqer/data/synthetic.hpp"
