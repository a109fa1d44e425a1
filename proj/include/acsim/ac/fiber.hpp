#pragma once

#include <coroutine>
#include <exception>
#include <utility>

namespace acsim {

class AcCtx;

// Coroutine type for node programs. A program runs sequentially, sends
// messages through its context and suspends at round barriers with
// `co_await ctx.next_round()`. Sub-protocols compose by `co_await child(...)`:
// the child inherits the caller's context and the whole stack parks as one
// unit at each barrier.
struct Proto {
  struct promise_type {
    std::coroutine_handle<> continuation;
    AcCtx* ctx = nullptr;
    std::exception_ptr exc;
    bool* done_flag = nullptr;

    Proto get_return_object() { return Proto{std::coroutine_handle<promise_type>::from_promise(*this)}; }
    std::suspend_always initial_suspend() noexcept { return {}; }

    struct FinalAwaiter {
      bool await_ready() noexcept { return false; }
      std::coroutine_handle<> await_suspend(std::coroutine_handle<promise_type> h) noexcept {
        auto& p = h.promise();
        if (p.done_flag) *p.done_flag = true;
        return p.continuation ? p.continuation : std::noop_coroutine();
      }
      void await_resume() noexcept {}
    };
    FinalAwaiter final_suspend() noexcept { return {}; }
    void return_void() {}
    void unhandled_exception() { exc = std::current_exception(); }
  };

  std::coroutine_handle<promise_type> h;

  explicit Proto(std::coroutine_handle<promise_type> hh) : h(hh) {}
  Proto(Proto&& o) noexcept : h(std::exchange(o.h, {})) {}
  Proto& operator=(Proto&& o) noexcept {
    if (this != &o) {
      if (h) h.destroy();
      h = std::exchange(o.h, {});
    }
    return *this;
  }
  Proto(const Proto&) = delete;
  ~Proto() {
    if (h) h.destroy();
  }

  struct Awaiter {
    std::coroutine_handle<promise_type> child;
    bool await_ready() noexcept { return false; }
    std::coroutine_handle<> await_suspend(std::coroutine_handle<promise_type> parent) noexcept {
      child.promise().continuation = parent;
      child.promise().ctx = parent.promise().ctx;
      return child;
    }
    void await_resume() {
      if (child.promise().exc) std::rethrow_exception(child.promise().exc);
    }
  };
  Awaiter operator co_await() const noexcept { return Awaiter{h}; }
};

// Round-barrier awaiter: parks the innermost coroutine with the host, which
// resumes it after message delivery for the next round.
struct NextRound {
  AcCtx* ctx;
  bool await_ready() noexcept { return false; }
  inline void await_suspend(std::coroutine_handle<Proto::promise_type> h) noexcept;
  void await_resume() noexcept {}
};

}  // namespace acsim
