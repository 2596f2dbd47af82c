/*
 * Copyright 2026 The cidincentives Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header.

#ifndef CIDINC_CIDINC_HPP_
#define CIDINC_CIDINC_HPP_

#include "cidinc/criteria.hpp"
#include "cidinc/graph.hpp"
#include "cidinc/io.hpp"
#include "cidinc/scim.hpp"
#include "cidinc/semantics.hpp"
#include "cidinc/value.hpp"
#include "cidinc/witness.hpp"

#endif  // CIDINC_CIDINC_HPP_
