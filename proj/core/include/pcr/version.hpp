// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace pcr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pcr
