#ifndef SGS_STREAM_IO_HPP
#define SGS_STREAM_IO_HPP

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sgs/core.hpp"

namespace sgs::io {

enum class Format { jsonl, csv };

/// ".csv" selects CSV, everything else JSON-Lines.
Format detect_format(const std::string& path);

struct RawRecord {
    double t = 0.0;
    bool has_t = false;
    std::vector<double> coords;
    std::size_t line = 0;
};

/// Line-oriented reader for the two input encodings. JSONL records look
/// like {"t": 3, "x": [0.1, 0.2]} ("t" optional for count-based runs); CSV
/// starts with a "t,x1,...,xd" header. Errors carry the line number.
class RecordReader {
public:
    RecordReader(std::istream& in, Format format);

    std::optional<RawRecord> next();

    /// Known after the header (CSV) or the first record (JSONL); 0 before.
    int dimension() const { return dimension_; }

private:
    std::istream& in_;
    Format format_;
    int dimension_ = 0;
    std::size_t line_ = 0;
    bool header_read_ = false;
};

/// Cuts an ordered record stream into the engine's slide batches. Count
/// mode assigns stamps from the arrival index; time mode cuts on the stamp
/// intervals and can emit empty batches for quiet slides. Out-of-order
/// stamps inside the open slide are rejected unless sorting is enabled.
class SlideAssembler {
public:
    SlideAssembler(WindowSpec spec, bool sort_within_slide = false);

    /// Feed one record; returns every batch this record closed.
    std::vector<std::vector<StreamPoint>> push(const RawRecord& rec);

    /// Flush at end of input. Time mode treats the open slide as complete;
    /// count mode drops an incomplete tail (see dropped()).
    std::vector<std::vector<StreamPoint>> finish();

    std::size_t dropped() const { return dropped_; }
    PointId points_assigned() const { return next_id_ - 1; }

private:
    std::vector<StreamPoint> take_batch();

    WindowSpec spec_;
    WindowTimeline timeline_;
    bool sort_within_slide_;
    std::int64_t batch_no_ = 0;
    PointId next_id_ = 1;
    std::vector<StreamPoint> pending_;
    double last_t_ = -std::numeric_limits<double>::infinity();
    std::size_t dropped_ = 0;
    bool finished_ = false;
};

}  // namespace sgs::io

#endif  // SGS_STREAM_IO_HPP
