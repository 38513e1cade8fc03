#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>

namespace roughscatter {

using cplx = std::complex<double>;

/// In-place 2D complex DFT of an n0 x n1 row-major array.
/// forward: sum x_j e^{-2 pi i jk/n}; backward: sum x_k e^{+2 pi i jk/n} (both unnormalized).
class Fft2d {
public:
    Fft2d(int n0, int n1);
    ~Fft2d();
    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    void forward(cplx* data) const;
    void backward(cplx* data) const;
    int n0() const { return n0_; }
    int n1() const { return n1_; }

private:
    int n0_, n1_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// Batched in-place 1D complex DFTs of length n: element i of transform b sits at b*dist + i*stride.
class FftBatch1d {
public:
    FftBatch1d(int n, int howmany, int stride, int dist);
    ~FftBatch1d();
    FftBatch1d(const FftBatch1d&) = delete;
    FftBatch1d& operator=(const FftBatch1d&) = delete;

    void forward(cplx* data) const;
    void backward(cplx* data) const;

private:
    int n_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// FFTW planning is not thread-safe; every plan creation goes through this lock.
std::mutex& fftw_planner_mutex();

} // namespace roughscatter
