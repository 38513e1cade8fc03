#include "roughscatter/fft.hpp"

#include <stdexcept>
#include <vector>

namespace roughscatter {

std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

namespace {

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

// FFTW_ESTIMATE keeps planning cheap and the chosen algorithm deterministic across runs.
constexpr unsigned plan_flags = FFTW_ESTIMATE | FFTW_UNALIGNED;

} // namespace

Fft2d::Fft2d(int n0, int n1) : n0_(n0), n1_(n1)
{
    if (n0 <= 0 || n1 <= 0) throw std::invalid_argument("Fft2d: sizes must be positive");
    std::vector<cplx> scratch(static_cast<size_t>(n0) * n1);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft_2d(n0, n1, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, plan_flags);
    bwd_ = fftw_plan_dft_2d(n0, n1, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, plan_flags);
    if (!fwd_ || !bwd_) throw std::runtime_error("Fft2d: FFTW planning failed");
}

Fft2d::~Fft2d()
{
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (fwd_) fftw_destroy_plan(fwd_);
    if (bwd_) fftw_destroy_plan(bwd_);
}

void Fft2d::forward(cplx* data) const { fftw_execute_dft(fwd_, as_fftw(data), as_fftw(data)); }
void Fft2d::backward(cplx* data) const { fftw_execute_dft(bwd_, as_fftw(data), as_fftw(data)); }

FftBatch1d::FftBatch1d(int n, int howmany, int stride, int dist) : n_(n)
{
    if (n <= 0 || howmany <= 0) throw std::invalid_argument("FftBatch1d: sizes must be positive");
    const size_t extent = static_cast<size_t>(howmany - 1) * dist + static_cast<size_t>(n - 1) * stride + 1;
    std::vector<cplx> scratch(extent);
    int nn[1] = {n};
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fwd_ = fftw_plan_many_dft(1, nn, howmany, as_fftw(scratch.data()), nullptr, stride, dist,
                              as_fftw(scratch.data()), nullptr, stride, dist, FFTW_FORWARD, plan_flags);
    bwd_ = fftw_plan_many_dft(1, nn, howmany, as_fftw(scratch.data()), nullptr, stride, dist,
                              as_fftw(scratch.data()), nullptr, stride, dist, FFTW_BACKWARD, plan_flags);
    if (!fwd_ || !bwd_) throw std::runtime_error("FftBatch1d: FFTW planning failed");
}

FftBatch1d::~FftBatch1d()
{
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (fwd_) fftw_destroy_plan(fwd_);
    if (bwd_) fftw_destroy_plan(bwd_);
}

void FftBatch1d::forward(cplx* data) const { fftw_execute_dft(fwd_, as_fftw(data), as_fftw(data)); }
void FftBatch1d::backward(cplx* data) const { fftw_execute_dft(bwd_, as_fftw(data), as_fftw(data)); }

} // namespace roughscatter
