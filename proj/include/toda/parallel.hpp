#ifndef TODA_PARALLEL_HPP
#define TODA_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace toda
{

// TODA_WORKERS if set and positive, else the hardware thread count
inline int worker_count()
{
    if (const char *s = std::getenv("TODA_WORKERS"))
    {
        try
        {
            int n = std::stoi(s);
            if (n > 0)
                return n;
        }
        catch (const std::exception &)
        {
        }
    }
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : static_cast<int>(h);
}

// Calls fn(i) for i in [0, n). Each index writes only its own output slot,
// so the result does not depend on scheduling.
template <class F> void parallel_for(std::size_t n, int workers, F &&fn)
{
    workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    auto body = [&]() {
        for (;;)
        {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load())
                return;
            try
            {
                fn(i);
            }
            catch (...)
            {
                if (!failed.exchange(true))
                    err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back(body);
    for (auto &t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

} // namespace toda

#endif
