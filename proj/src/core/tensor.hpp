#pragma once

#include <initializer_list>
#include <vector>

namespace bseg {

// Dense row-major N-D array of doubles. Activations use (channels, height,
// width); filters use (out_ch, in_ch, kh, kw).
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::initializer_list<int> s);

    static Tensor zeros_like(const Tensor& t);

    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    size_t size() const { return data.size(); }
    double* ptr() { return data.data(); }
    const double* ptr() const { return data.data(); }

    void fill(double v);
    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

}  // namespace bseg
