#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace driftlab {

using cplx = std::complex<double>;

enum class Variance { co, contra };
enum class FrameTag { coordinate, unitary, adapted };

// Component array at a point; slot order is the index order, row-major.
class TensorField {
 public:
  TensorField() = default;
  TensorField(int dim, std::vector<Variance> slots, FrameTag tag = FrameTag::coordinate)
      : dim_(dim), slots_(std::move(slots)), tag_(tag) {
    size_t n = 1;
    for (size_t i = 0; i < slots_.size(); ++i) n *= dim_;
    c_.assign(n, cplx(0.0));
  }

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(slots_.size()); }
  const std::vector<Variance>& slots() const { return slots_; }
  FrameTag frame() const { return tag_; }
  int covariant_count() const { return count(Variance::co); }
  int contravariant_count() const { return count(Variance::contra); }

  size_t offset(const int* idx) const {
    size_t o = 0;
    for (int s = 0; s < rank(); ++s) {
      if (idx[s] < 0 || idx[s] >= dim_) throw IndexError("tensor index out of range");
      o = o * dim_ + idx[s];
    }
    return o;
  }
  cplx& operator()(std::initializer_list<int> idx) { return c_[offset(idx.begin())]; }
  const cplx& operator()(std::initializer_list<int> idx) const { return c_[offset(idx.begin())]; }
  cplx& at(const int* idx) { return c_[offset(idx)]; }
  const cplx& at(const int* idx) const { return c_[offset(idx)]; }

  std::vector<cplx>& data() { return c_; }
  const std::vector<cplx>& data() const { return c_; }

  double norm2() const {
    double s = 0.0;
    for (const auto& z : c_) s += std::norm(z);
    return s;
  }

  TensorField& operator+=(const TensorField& o) {
    check_same(o);
    for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  TensorField& operator*=(cplx a) {
    for (auto& z : c_) z *= a;
    return *this;
  }
  friend TensorField operator+(TensorField a, const TensorField& b) { return a += b; }
  friend TensorField operator*(cplx a, TensorField t) { return t *= a; }

  // max |t(..i..j..) + t(..j..i..)| relative to max |t|
  double antisymmetry_defect(int s1, int s2) const { return symmetry_defect(s1, s2, +1.0); }
  double symmetry_defect(int s1, int s2) const { return symmetry_defect(s1, s2, -1.0); }

 private:
  int dim_ = 0;
  std::vector<Variance> slots_;
  FrameTag tag_ = FrameTag::coordinate;
  std::vector<cplx> c_;

  int count(Variance v) const {
    int n = 0;
    for (auto s : slots_) n += (s == v);
    return n;
  }
  void check_same(const TensorField& o) const {
    if (o.dim_ != dim_ || o.slots_ != slots_) throw IndexError("tensor shapes differ");
  }
  double symmetry_defect(int s1, int s2, double sign) const {
    std::vector<int> idx(rank(), 0);
    double worst = 0.0, scale = 0.0;
    for (size_t lin = 0; lin < c_.size(); ++lin) {
      size_t r = lin;
      for (int s = rank() - 1; s >= 0; --s) {
        idx[s] = static_cast<int>(r % dim_);
        r /= dim_;
      }
      std::vector<int> sw = idx;
      std::swap(sw[s1], sw[s2]);
      worst = std::max(worst, std::abs(c_[lin] + sign * c_[offset(sw.data())]));
      scale = std::max(scale, std::abs(c_[lin]));
    }
    return scale > 0.0 ? worst / scale : worst;
  }
};

// Einstein sum over pairs (slot of a, slot of b); free slots of a then b remain.
inline TensorField contract(const TensorField& a, const TensorField& b,
                            const std::vector<std::pair<int, int>>& pairs) {
  if (a.dim() != b.dim()) throw IndexError("contracted tensors have different dimensions");
  const int n = a.dim();
  std::vector<int> amap(a.rank(), -1), bmap(b.rank(), -1);
  for (size_t p = 0; p < pairs.size(); ++p) {
    auto [i, j] = pairs[p];
    if (i < 0 || i >= a.rank() || j < 0 || j >= b.rank()) throw IndexError("contraction slot out of range");
    if (amap[i] >= 0 || bmap[j] >= 0) throw IndexError("slot contracted twice");
    if (a.slots()[i] == b.slots()[j]) throw IndexError("contracted slots must have opposite variance");
    amap[i] = static_cast<int>(p);
    bmap[j] = static_cast<int>(p);
  }
  std::vector<Variance> out_slots;
  std::vector<int> afree, bfree;
  for (int i = 0; i < a.rank(); ++i)
    if (amap[i] < 0) { afree.push_back(i); out_slots.push_back(a.slots()[i]); }
  for (int j = 0; j < b.rank(); ++j)
    if (bmap[j] < 0) { bfree.push_back(j); out_slots.push_back(b.slots()[j]); }
  TensorField out(n, out_slots, a.frame());
  const int nf = static_cast<int>(out_slots.size()), ns = static_cast<int>(pairs.size());
  std::vector<int> fi(nf, 0), si(ns, 0), ia(a.rank()), ib(b.rank());
  size_t nfree = out.data().size(), nsum = 1;
  for (int s = 0; s < ns; ++s) nsum *= n;
  for (size_t lf = 0; lf < nfree; ++lf) {
    size_t r = lf;
    for (int s = nf - 1; s >= 0; --s) { fi[s] = static_cast<int>(r % n); r /= n; }
    for (size_t k = 0; k < afree.size(); ++k) ia[afree[k]] = fi[k];
    for (size_t k = 0; k < bfree.size(); ++k) ib[bfree[k]] = fi[afree.size() + k];
    cplx acc = 0.0;
    for (size_t ls = 0; ls < nsum; ++ls) {
      size_t q = ls;
      for (int s = ns - 1; s >= 0; --s) { si[s] = static_cast<int>(q % n); q /= n; }
      for (int i = 0; i < a.rank(); ++i) if (amap[i] >= 0) ia[i] = si[amap[i]];
      for (int j = 0; j < b.rank(); ++j) if (bmap[j] >= 0) ib[j] = si[bmap[j]];
      acc += a.at(ia.data()) * b.at(ib.data());
    }
    out.data()[lf] = acc;
  }
  return out;
}

}  // namespace driftlab
