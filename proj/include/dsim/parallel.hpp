// SPDX-License-Identifier: Apache-2.0
//
// dsim: double-SIM massive MIMO uplink modelling and phase-shift optimization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef DSIM_PARALLEL_HPP
#define DSIM_PARALLEL_HPP

// Fixed-chunk parallel loops. Work is split into chunks whose boundaries do
// not depend on the thread count, and partial results are folded in chunk
// order, so the result is bit-identical for any number of threads.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace dsim
{
    namespace detail
    {
        inline int &thread_setting()
        {
            static int n = 0;
            return n;
        }
    } // namespace detail

    /// 0 restores the default (DSIM_THREADS or the hardware concurrency).
    inline void set_thread_count(int n) { detail::thread_setting() = n < 0 ? 0 : n; }

    inline int thread_count()
    {
        if (detail::thread_setting() > 0)
            return detail::thread_setting();
        if (const char *env = std::getenv("DSIM_THREADS"))
        {
            const int n = std::atoi(env);
            if (n > 0)
                return n;
        }
        return std::max(1u, std::thread::hardware_concurrency());
    }

    /// Calls fn(i) for i in [0, n) on up to `threads` workers. fn must only
    /// touch state owned by index i. The first exception is rethrown.
    template <typename Fn>
    void parallel_for(std::size_t n, Fn &&fn, int threads = 0)
    {
        if (threads <= 0)
            threads = thread_count();
        const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto run = [&]() {
            for (;;)
            {
                const std::size_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(n);
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers - 1);
        for (std::size_t t = 1; t < workers; ++t)
            pool.emplace_back(run);
        run();
        for (auto &th : pool)
            th.join();
        if (error)
            std::rethrow_exception(error);
    }

    /// chunk_fn(begin, end) -> Acc for each fixed chunk; combine(acc, part) folds in order.
    template <typename Acc, typename ChunkFn, typename Combine>
    Acc ordered_reduce(std::size_t n, std::size_t chunk, Acc init, ChunkFn &&chunk_fn, Combine &&combine,
                       int threads = 0)
    {
        chunk = std::max<std::size_t>(chunk, 1);
        const std::size_t chunks = (n + chunk - 1) / chunk;
        std::vector<std::optional<Acc>> parts(chunks);
        parallel_for(
            chunks,
            [&](std::size_t c) {
                const std::size_t b = c * chunk;
                parts[c].emplace(chunk_fn(b, std::min(n, b + chunk)));
            },
            threads);
        for (auto &p : parts)
            combine(init, *p);
        return init;
    }

} // namespace dsim

#endif // DSIM_PARALLEL_HPP
