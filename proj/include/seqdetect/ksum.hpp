#pragma once

#include <cmath>

namespace seqdetect {

// Neumaier compensated accumulator in long double.
class KahanSum {
public:
    void add(long double x)
    {
        long double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    KahanSum& operator+=(long double x) { add(x); return *this; }
    long double value() const { return sum_ + comp_; }

private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

} // namespace seqdetect
