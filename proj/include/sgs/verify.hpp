#ifndef SGS_VERIFY_HPP
#define SGS_VERIFY_HPP

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "sgs/engine.hpp"
#include "sgs/oracle.hpp"

namespace sgs {

struct WindowVerdict {
    WindowIndex window = 0;
    bool pass = false;
    std::string divergence;
    std::size_t points = 0;
    std::size_t clusters = 0;
    double engine_ms = 0.0;
    double oracle_ms = 0.0;
};

/// Runs the incremental engine and the from-scratch oracle side by side.
/// The driver keeps its own copy of the window contents so the reference
/// never depends on engine state.
class VerifyDriver {
public:
    explicit VerifyDriver(CsgsEngine::Config cfg, bool parallel_oracle = false);

    /// Feed one batch; returns a verdict whenever a window completes.
    std::optional<WindowVerdict> ingest(const std::vector<StreamPoint>& batch);

    const CsgsEngine& engine() const { return engine_; }
    const std::vector<ClusterOutput>& last_output() const { return last_output_; }
    const oracle::OracleWindow& last_reference() const { return last_reference_; }

private:
    CsgsEngine engine_;
    WindowTimeline timeline_;
    std::deque<StreamPoint> live_;
    std::int64_t batch_no_ = 0;
    bool parallel_oracle_;
    std::vector<ClusterOutput> last_output_;
    oracle::OracleWindow last_reference_;
};

}  // namespace sgs

#endif  // SGS_VERIFY_HPP
