// Copyright 2026 The ivphard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IVPHARD_REPORT_HPP
#define IVPHARD_REPORT_HPP

#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace ivphard {

/// One named check. `point`, `bound` and `observed` describe the first failing sample, or the
/// tightest passing one (largest margin) if every sample passed.
struct CheckRecord {
    std::string check;
    std::string point;
    std::string bound;
    std::string observed;
    bool pass = true;
    std::size_t samples = 0;
    double margin = -1;  // observed / bound where meaningful; negative when not
};

class Report {
  public:
    void add(const std::string& check, bool pass, const std::string& point = "", const std::string& bound = "",
             const std::string& observed = "", double margin = -1) {
        std::lock_guard<std::mutex> lock(mu_);
        auto [it, fresh] = index_.try_emplace(check, records_.size());
        if (fresh) {
            records_.push_back({check, point, bound, observed, pass, 1, margin});
            return;
        }
        CheckRecord& r = records_[it->second];
        ++r.samples;
        if (!r.pass) return;
        if (!pass || margin > r.margin) {
            r.point = point;
            r.bound = bound;
            r.observed = observed;
            r.pass = pass;
            r.margin = margin;
        }
    }

    void merge(const Report& other) {
        for (const auto& r : other.records()) {
            std::size_t n = r.samples;
            add(r.check, r.pass, r.point, r.bound, r.observed, r.margin);
            std::lock_guard<std::mutex> lock(mu_);
            records_[index_.at(r.check)].samples += n - 1;
        }
    }

    bool passed() const {
        for (const auto& r : records_)
            if (!r.pass) return false;
        return true;
    }

    bool passed(const std::string& check) const {
        auto it = index_.find(check);
        return it != index_.end() && records_[it->second].pass;
    }

    const CheckRecord* find(const std::string& check) const {
        auto it = index_.find(check);
        return it == index_.end() ? nullptr : &records_[it->second];
    }

    const std::vector<CheckRecord>& records() const { return records_; }

    Report() = default;
    Report(const Report& o) : records_(o.records_), index_(o.index_) {}
    Report& operator=(const Report& o) {
        records_ = o.records_;
        index_ = o.index_;
        return *this;
    }

  private:
    std::vector<CheckRecord> records_;
    std::map<std::string, std::size_t> index_;
    mutable std::mutex mu_;
};

}  // namespace ivphard

#endif  // IVPHARD_REPORT_HPP
