// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>

#include "tilert/hal.hpp"

namespace tilert {

/// ISR-analogue dispatcher: routes completion events to registered handlers
/// by event id. Each event reaches exactly one handler exactly once; events
/// nobody registered for are counted, never silently dropped.
class EventDispatcher {
 public:
  using Handler = std::function<void(const CompletionEvent&)>;

  /// Re-registering an id replaces the previous handler.
  void register_handler(uint32_t event_id, Handler handler) {
    handlers_[event_id] = std::move(handler);
  }

  void dispatch(const CompletionEvent& ev) {
    auto it = handlers_.find(ev.event_id);
    if (it == handlers_.end()) {
      ++unknown_;
      return;
    }
    it->second(ev);
  }

  /// Pops everything pending on the source and dispatches it.
  void drain(EventSource& source) {
    CompletionEvent ev;
    while (source.pop_event(ev)) dispatch(ev);
  }

  uint64_t unknown_events() const { return unknown_; }
  size_t handler_count() const { return handlers_.size(); }

 private:
  std::unordered_map<uint32_t, Handler> handlers_;
  uint64_t unknown_ = 0;
};

}  // namespace tilert
