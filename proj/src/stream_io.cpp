#include "sgs/stream_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace sgs::io {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw std::runtime_error("input line " + std::to_string(line) + ": " + msg);
}

}  // namespace

Format detect_format(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        return Format::csv;
    }
    return Format::jsonl;
}

RecordReader::RecordReader(std::istream& in, Format format)
    : in_(in), format_(format) {}

std::optional<RawRecord> RecordReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        // Tolerate blank lines and CRLF input.
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        if (format_ == Format::csv && !header_read_) {
            header_read_ = true;
            std::istringstream hs(line);
            std::string col;
            std::vector<std::string> cols;
            while (std::getline(hs, col, ',')) cols.push_back(col);
            if (cols.empty() || cols[0] != "t") {
                fail(line_, "CSV header must start with 't'");
            }
            dimension_ = static_cast<int>(cols.size()) - 1;
            if (dimension_ < 1) fail(line_, "CSV header declares no coordinates");
            continue;
        }

        RawRecord rec;
        rec.line = line_;
        if (format_ == Format::csv) {
            std::istringstream fs(line);
            std::string field;
            std::vector<std::string> fields;
            while (std::getline(fs, field, ',')) fields.push_back(field);
            if (static_cast<int>(fields.size()) != dimension_ + 1) {
                fail(line_, "expected " + std::to_string(dimension_ + 1) +
                                " fields, got " + std::to_string(fields.size()));
            }
            try {
                rec.t = std::stod(fields[0]);
                rec.has_t = true;
                for (int i = 1; i <= dimension_; ++i) {
                    rec.coords.push_back(std::stod(fields[static_cast<std::size_t>(i)]));
                }
            } catch (const std::exception&) {
                fail(line_, "malformed numeric field");
            }
        } else {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const std::exception& e) {
                fail(line_, std::string("malformed JSON: ") + e.what());
            }
            if (!j.is_object() || !j.contains("x") || !j.at("x").is_array()) {
                fail(line_, "record must be an object with an \"x\" array");
            }
            try {
                rec.coords = j.at("x").get<std::vector<double>>();
            } catch (const std::exception&) {
                fail(line_, "\"x\" must hold numbers");
            }
            if (j.contains("t")) {
                if (!j.at("t").is_number()) fail(line_, "\"t\" must be a number");
                rec.t = j.at("t").get<double>();
                rec.has_t = true;
            }
            if (dimension_ == 0) {
                dimension_ = static_cast<int>(rec.coords.size());
                if (dimension_ < 1) fail(line_, "empty coordinate vector");
            }
        }
        if (static_cast<int>(rec.coords.size()) != dimension_) {
            fail(line_, "dimension changed from " + std::to_string(dimension_) +
                            " to " + std::to_string(rec.coords.size()));
        }
        for (double v : rec.coords) {
            if (!std::isfinite(v)) fail(line_, "non-finite coordinate");
        }
        return rec;
    }
    return std::nullopt;
}

SlideAssembler::SlideAssembler(WindowSpec spec, bool sort_within_slide)
    : spec_(spec), timeline_(spec), sort_within_slide_(sort_within_slide) {
    spec_.validate();
}

std::vector<StreamPoint> SlideAssembler::take_batch() {
    if (sort_within_slide_) {
        std::stable_sort(pending_.begin(), pending_.end(),
                         [](const StreamPoint& a, const StreamPoint& b) {
                             return a.t < b.t;
                         });
    }
    std::vector<StreamPoint> batch = std::move(pending_);
    pending_.clear();
    ++batch_no_;
    return batch;
}

std::vector<std::vector<StreamPoint>> SlideAssembler::push(const RawRecord& rec) {
    if (finished_) throw std::logic_error("slide assembler already finished");
    std::vector<std::vector<StreamPoint>> closed;

    StreamPoint p;
    p.id = next_id_;
    p.coords = rec.coords;

    if (spec_.kind == WindowKind::count) {
        p.t = static_cast<double>(next_id_);
        if (rec.has_t && rec.t != p.t) {
            fail(rec.line, "count-based stamp " + std::to_string(rec.t) +
                               " does not match the arrival index " +
                               std::to_string(p.t));
        }
        pending_.push_back(std::move(p));
        ++next_id_;
        const auto [lo, hi] = timeline_.batch_interval(batch_no_);
        if (static_cast<double>(next_id_ - 1) >= hi) {
            (void)lo;
            closed.push_back(take_batch());
        }
        return closed;
    }

    if (!rec.has_t) fail(rec.line, "time-based input requires a \"t\" stamp");
    p.t = rec.t;
    ++next_id_;

    auto interval = timeline_.batch_interval(batch_no_);
    if (p.t <= interval.first) {
        fail(rec.line, "stamp " + std::to_string(p.t) +
                           " belongs to an already closed slide");
    }
    while (p.t > interval.second) {  // quiet slides close empty
        closed.push_back(take_batch());
        interval = timeline_.batch_interval(batch_no_);
    }
    if (!sort_within_slide_ && p.t < last_t_) {
        fail(rec.line, "out-of-order stamp " + std::to_string(p.t) +
                           " (pass --allow-out-of-order to sort within a slide)");
    }
    last_t_ = std::max(last_t_, p.t);
    pending_.push_back(std::move(p));
    return closed;
}

std::vector<std::vector<StreamPoint>> SlideAssembler::finish() {
    finished_ = true;
    std::vector<std::vector<StreamPoint>> closed;
    if (spec_.kind == WindowKind::count) {
        dropped_ = pending_.size();  // incomplete slide cannot be windowed
        pending_.clear();
        return closed;
    }
    if (!pending_.empty()) closed.push_back(take_batch());
    return closed;
}

}  // namespace sgs::io
