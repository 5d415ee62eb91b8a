#pragma once

#include <mutex>
#include <string>
#include <vector>

namespace prandtl {

// Collects non-fatal warnings (tail tolerance, back-off, ...) for the manifest.
class RunLog {
public:
    void warn(std::string msg) {
        std::lock_guard<std::mutex> lk(mu_);
        msgs_.push_back(std::move(msg));
    }
    std::vector<std::string> messages() const {
        std::lock_guard<std::mutex> lk(mu_);
        return msgs_;
    }
    bool empty() const {
        std::lock_guard<std::mutex> lk(mu_);
        return msgs_.empty();
    }

private:
    mutable std::mutex mu_;
    std::vector<std::string> msgs_;
};

}  // namespace prandtl
