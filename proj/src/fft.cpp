#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace madelung::detail {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per layout and kept for the process lifetime.
struct PlanKey {
    int rank;
    std::array<int, 3> n;
    int howmany;
    int stride;
    int dist;
    int sign;
    auto tie() const { return std::tie(rank, n, howmany, stride, dist, sign); }
    bool operator<(const PlanKey& o) const { return tie() < o.tie(); }
};

class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(const PlanKey& key)
    {
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::size_t total = 1;
        for (int r = 0; r < key.rank; ++r) total *= static_cast<std::size_t>(key.n[r]);
        std::size_t span = (total - 1) * static_cast<std::size_t>(key.stride) +
                           static_cast<std::size_t>(key.howmany - 1) * static_cast<std::size_t>(key.dist) + 1;
        std::vector<fftw_complex> scratch(span);
        fftw_plan plan = fftw_plan_many_dft(key.rank, key.n.data(), key.howmany, scratch.data(), nullptr,
                                            key.stride, key.dist, scratch.data(), nullptr, key.stride, key.dist,
                                            key.sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw Error(ErrorCode::InvalidArgument, "FFTW could not create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache instance;
    return instance;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

} // namespace

std::vector<double> wavenumbers(std::size_t n, double length)
{
    std::vector<double> k(n);
    const double base = 2.0 * std::numbers::pi / length;
    const auto sn = static_cast<long>(n);
    for (long i = 0; i < sn; ++i) {
        long m = (i <= (sn - 1) / 2) ? i : i - sn;
        k[static_cast<std::size_t>(i)] = base * static_cast<double>(m);
    }
    return k;
}

void transform_axis(std::vector<Complex>& data, const GridSpec& grid, int axis, int sign)
{
    const std::size_t n = grid.points(axis);
    const std::size_t inner = grid.stride(axis);
    const std::size_t outer = grid.size() / (n * inner);
    PlanKey key{1, {static_cast<int>(n), 0, 0}, static_cast<int>(inner), static_cast<int>(inner), 1,
                sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD};
    fftw_plan plan = cache().get(key);
    for (std::size_t o = 0; o < outer; ++o) {
        Complex* block = data.data() + o * n * inner;
        fftw_execute_dft(plan, as_fftw(block), as_fftw(block));
    }
}

void transform_all(std::vector<Complex>& data, const GridSpec& grid, int sign)
{
    PlanKey key{grid.dim(), {0, 0, 0}, 1, 1, 1, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD};
    for (int a = 0; a < grid.dim(); ++a) key.n[a] = static_cast<int>(grid.points(a));
    fftw_plan plan = cache().get(key);
    fftw_execute_dft(plan, as_fftw(data.data()), as_fftw(data.data()));
}

} // namespace madelung::detail
