#include "oamdisc/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace oamdisc::fft {

namespace {

// Plan creation and destruction are not thread-safe in FFTW; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Plan {
 public:
  Plan(std::span<std::complex<double>> data, int rank, int n, int sign) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    std::lock_guard lock(planner_mutex());
    plan_ = rank == 1 ? fftw_plan_dft_1d(n, ptr, ptr, sign, FFTW_ESTIMATE)
                      : fftw_plan_dft_2d(n, n, ptr, ptr, sign, FFTW_ESTIMATE);
    if (!plan_) throw std::runtime_error("FFTW planning failed");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() { fftw_execute(plan_); }

 private:
  fftw_plan plan_ = nullptr;
};

void run(std::span<std::complex<double>> data, int rank, int n, int sign) {
  if (data.empty()) return;
  Plan plan(data, rank, n, sign);
  plan.execute();
}

}  // namespace

void forward(std::span<std::complex<double>> data) {
  run(data, 1, static_cast<int>(data.size()), FFTW_FORWARD);
}

void inverse(std::span<std::complex<double>> data) {
  run(data, 1, static_cast<int>(data.size()), FFTW_BACKWARD);
}

void forward_2d(std::span<std::complex<double>> data, int n) {
  if (data.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("fft2d size");
  run(data, 2, n, FFTW_FORWARD);
}

void inverse_2d(std::span<std::complex<double>> data, int n) {
  if (data.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("fft2d size");
  run(data, 2, n, FFTW_BACKWARD);
}

}  // namespace oamdisc::fft
