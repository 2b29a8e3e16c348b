#include "seqhygan/threading.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace seqhygan {

namespace {

int g_override = 0;
thread_local bool t_in_parallel = false;

int env_thread_cap() {
    const char* v = std::getenv("SEQ_HYGAN_THREADS");
    if (!v) return 0;
    int n = std::atoi(v);
    return n > 0 ? n : 0;
}

// Fork-join pool with static chunk assignment: for a job with W workers,
// participant t (main thread is t=0) processes [t*chunk, (t+1)*chunk).
// Assignment depends only on (n, W), so results are bit-identical for any
// worker count as long as every index writes only its own outputs.
class Pool {
public:
    static Pool& instance() {
        // leaked on purpose: workers run forever and must not race a static
        // destructor at process exit
        static Pool* pool = new Pool();
        return *pool;
    }

    void run(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& fn) {
        ensure_started(workers - 1);
        std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            job_fn_ = &fn;
            job_n_ = n;
            job_chunk_ = chunk;
            job_workers_ = workers;
            done_ = 0;
            ++generation_;
        }
        cv_.notify_all();
        fn(0, std::min(n, chunk));
        std::unique_lock<std::mutex> lock(mutex_);
        done_cv_.wait(lock, [&] { return done_ == job_workers_ - 1; });
        job_fn_ = nullptr;
    }

private:
    Pool() = default;

    void ensure_started(int extra) {
        std::lock_guard<std::mutex> lock(mutex_);
        int id = static_cast<int>(threads_.size()) + 1;
        while (static_cast<int>(threads_.size()) < extra) {
            threads_.emplace_back([this, id] { worker_loop(id); });
            ++id;
        }
    }

    void worker_loop(int id) {
        t_in_parallel = true; // nested parallel_for on a worker runs inline
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(std::size_t, std::size_t)>* fn = nullptr;
            std::size_t lo = 0, hi = 0;
            bool participate = false;
            {
                std::unique_lock<std::mutex> lock(mutex_);
                cv_.wait(lock, [&] { return generation_ != seen; });
                seen = generation_;
                if (id < job_workers_) {
                    participate = true;
                    fn = job_fn_;
                    lo = std::min(job_n_, static_cast<std::size_t>(id) * job_chunk_);
                    hi = std::min(job_n_, lo + job_chunk_);
                }
            }
            if (participate) {
                if (lo < hi) (*fn)(lo, hi);
                std::lock_guard<std::mutex> lock(mutex_);
                ++done_;
                if (done_ == job_workers_ - 1) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t, std::size_t)>* job_fn_ = nullptr;
    std::size_t job_n_ = 0;
    std::size_t job_chunk_ = 1;
    int job_workers_ = 1;
    int done_ = 0;
    std::uint64_t generation_ = 0;
};

} // namespace

int thread_count() {
    if (g_override > 0) return g_override;
    int cap = env_thread_cap();
    if (cap > 0) return cap;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

void set_thread_count(int n) {
    g_override = n > 0 ? n : 0;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    int workers = thread_count();
    if (t_in_parallel || workers <= 1 || n < 256) {
        fn(0, n);
        return;
    }
    t_in_parallel = true;
    Pool::instance().run(n, workers, fn);
    t_in_parallel = false;
}

} // namespace seqhygan
