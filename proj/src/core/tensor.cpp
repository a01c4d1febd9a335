#include "core/tensor.hpp"

#include <algorithm>

namespace bseg {

Tensor::Tensor(std::initializer_list<int> s) : shape(s) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    data.assign(n, 0.0);
}

Tensor Tensor::zeros_like(const Tensor& t) {
    Tensor out;
    out.shape = t.shape;
    out.data.assign(t.data.size(), 0.0);
    return out;
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

}  // namespace bseg
