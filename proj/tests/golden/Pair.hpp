// Generated by tsopc -- do not edit.
// object: Pair
// protocol: META . SLOT . SLOT . *flush
// spec-hash: fnv1a:2fa4aecfe5dd9698
#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <tuple>
#include <utility>

#include <tsop/violation.hpp>

template <typename A>
class Pair {
 public:
  Pair() {
    this->META(10, 20);
    this->SLOT(1);
    this->SLOT(2);
  }

  A flush() {
    std::unique_lock<std::mutex> guard(lock_);
    ++queue_flush_;
    switch (state_) {
      case 0: state_ = 3; break;
      case 1: state_ = 5; break;
      case 2: state_ = 7; break;
      case 4: state_ = 9; break;
      case 6: state_ = 10; break;
      case 8: state_ = 11; break;
      default: break;
    }
    while (true) {
      switch (state_) {
        case 9: {
          auto [a, b] = std::move(*queue_META_);
          queue_META_.reset();
          A x = std::move(queue_SLOT_.front());
          queue_SLOT_.pop_front();
          --queue_flush_;
          state_ = queue_flush_ == 0 ? 0 : 3;
          guard.unlock();
          return when_META_SLOT_flush(a, b, x);
        }
        case 11: {
          auto [a, b] = std::move(*queue_META_);
          queue_META_.reset();
          A x = std::move(queue_SLOT_.front());
          queue_SLOT_.pop_front();
          --queue_flush_;
          state_ = queue_flush_ == 0 ? 2 : 7;
          guard.unlock();
          return when_META_SLOT_flush(a, b, x);
        }
        default:
          try_flush_.wait(guard);
      }
    }
  }

 private:
  void META(A a, A b) {
    std::unique_lock<std::mutex> guard(lock_);
    queue_META_.emplace(std::move(a), std::move(b));
    switch (state_) {
      case 0: state_ = 1; break;
      case 2: state_ = 4; break;
      case 3: state_ = 5; break;
      case 6: state_ = 8; break;
      case 7: state_ = 9; try_flush_.notify_all(); break;
      case 10: state_ = 11; try_flush_.notify_all(); break;
      default:
        guard.unlock();
        throw tsop::ProtocolViolation("Pair", "META", state_label(state_));
    }
  }

  void SLOT(A x) {
    std::unique_lock<std::mutex> guard(lock_);
    queue_SLOT_.push_back(std::move(x));
    switch (state_) {
      case 0: state_ = 2; break;
      case 1: state_ = 4; break;
      case 2: state_ = 6; break;
      case 3: state_ = 7; break;
      case 4: state_ = 8; break;
      case 5: state_ = 9; try_flush_.notify_all(); break;
      case 7: state_ = 10; break;
      case 9: state_ = 11; try_flush_.notify_all(); break;
      default:
        guard.unlock();
        throw tsop::ProtocolViolation("Pair", "SLOT", state_label(state_));
    }
  }

  A when_META_SLOT_flush(A a, A b, A x) {
    this->META(a, b);
    return x;
  }

  static const char* state_label(int state) {
    static const char* const kLabels[] = {"000", "100", "010", "00$", "110", "10$", "020", "01$", "120", "11$", "02$", "12$"};
    return kLabels[state];
  }

  std::mutex lock_;
  std::condition_variable try_flush_;
  int state_ = 0;
  std::optional<std::tuple<A, A>> queue_META_;
  std::deque<A> queue_SLOT_;
  int queue_flush_ = 0;
};
