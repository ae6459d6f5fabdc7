#ifndef PHOTONCOND_DETAIL_SUM_HPP
#define PHOTONCOND_DETAIL_SUM_HPP

#include <type_traits>

namespace photoncond::detail {

// Compensated (Kahan-Babuska) accumulator; works for double and std::complex<double>.
template <typename T>
class KahanSum {
public:
  void add(const T& x) {
    const T t = sum_ + x;
    comp_ += fix(sum_, x, t);
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

private:
  static double fix1(double s, double x, double t) {
    return (s >= 0 ? s : -s) >= (x >= 0 ? x : -x) ? (s - t) + x : (x - t) + s;
  }
  template <typename U>
  static U fix(const U& s, const U& x, const U& t) {
    if constexpr (std::is_same_v<U, double>)
      return fix1(s, x, t);
    else
      return U(fix1(s.real(), x.real(), t.real()), fix1(s.imag(), x.imag(), t.imag()));
  }

  T sum_{};
  T comp_{};
};

} // namespace photoncond::detail

#endif // PHOTONCOND_DETAIL_SUM_HPP
