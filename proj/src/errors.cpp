// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/errors.hpp"

#include <algorithm>

namespace tilert {

namespace {

std::vector<uint32_t> sorted_unique(std::vector<uint32_t> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::string join_ids(const std::vector<uint32_t>& ids) {
  std::string s = "unresolved symbolic refs: [";
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(ids[i]);
  }
  s += ']';
  return s;
}

}  // namespace

UnresolvedSymbol::UnresolvedSymbol(std::vector<uint32_t> ids)
    : Error(join_ids(sorted_unique(ids))), missing(sorted_unique(std::move(ids))) {}

}  // namespace tilert
