// Copyright 2026 The chaptereval Authors. All Rights Reserved.
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


// Umbrella header for the chaptereval library.

#ifndef CHAPTEREVAL_CHAPTEREVAL_HPP_
#define CHAPTEREVAL_CHAPTEREVAL_HPP_

#include "chaptereval/alignment.hpp"
#include "chaptereval/chapter.hpp"
#include "chaptereval/errors.hpp"
#include "chaptereval/formats.hpp"
#include "chaptereval/metrics.hpp"
#include "chaptereval/pipeline.hpp"
#include "chaptereval/text.hpp"
#include "chaptereval/textsim.hpp"

#endif  // CHAPTEREVAL_CHAPTEREVAL_HPP_
