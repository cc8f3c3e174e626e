#pragma once

#include <algorithm>
#include <cstddef>
#include <string_view>
#include <vector>

#include <spdlog/spdlog.h>

namespace srtk::detail {

// Sorts by `key` and keeps the first `cap` items, warning when anything is dropped.
// Both knowledge-source backends truncate this way so their answers stay identical.
template <typename T, typename Key>
void truncate_sorted(std::vector<T>& items, Key&& key, std::size_t cap, std::string_view what) {
    std::sort(items.begin(), items.end(),
              [&](const T& a, const T& b) { return key(a) < key(b); });
    items.erase(std::unique(items.begin(), items.end()), items.end());
    if (items.size() > cap) {
        spdlog::warn("{}: {} results truncated to {}", what, items.size(), cap);
        items.resize(cap);
    }
}

}  // namespace srtk::detail
