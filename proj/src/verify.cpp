#include "sgs/verify.hpp"

#include <chrono>

namespace sgs {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

VerifyDriver::VerifyDriver(CsgsEngine::Config cfg, bool parallel_oracle)
    : engine_(std::move(cfg)),
      timeline_(engine_.config().window),
      parallel_oracle_(parallel_oracle) {}

std::optional<WindowVerdict> VerifyDriver::ingest(
    const std::vector<StreamPoint>& batch) {
    const std::int64_t b = batch_no_++;

    const auto t0 = std::chrono::steady_clock::now();
    auto out = engine_.ingest_slide(batch);
    const double engine_ms = ms_since(t0);

    for (const auto& p : batch) live_.push_back(p);
    if (!timeline_.batch_completes_window(b)) return std::nullopt;

    const WindowIndex n = timeline_.window_of_batch(b);
    const auto [win_lo, win_hi] = timeline_.window_interval(n);
    (void)win_hi;
    while (!live_.empty() && live_.front().t <= win_lo) live_.pop_front();

    const auto t1 = std::chrono::steady_clock::now();
    auto reference = oracle::OracleWindow::analyze(
        {live_.begin(), live_.end()}, engine_.config().params, engine_.grid(),
        parallel_oracle_);
    auto report = oracle::assert_equivalent(out, reference);
    const double oracle_ms = ms_since(t1);

    WindowVerdict verdict;
    verdict.window = n;
    verdict.pass = report.pass;
    verdict.divergence = report.divergence;
    verdict.points = live_.size();
    verdict.clusters = out.size();
    verdict.engine_ms = engine_ms;
    verdict.oracle_ms = oracle_ms;

    last_output_ = std::move(out);
    last_reference_ = std::move(reference);
    return verdict;
}

}  // namespace sgs
