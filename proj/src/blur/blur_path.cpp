#include "blurgs/blur/blur_path.hpp"

#include <stdexcept>

namespace blurgs {

template <typename T>
std::vector<double> blur_forward(const BlurNet<T>& net, const RenderOutput& render, int view,
                                 BlurPathCache<T>& cache) {
    predict_blur(net, render, view, &cache.net);
    cache.sharp = render.image;
    cache.blurred = convolve_blur(cache.sharp, cache.net.field);
    return blend(cache.sharp, cache.blurred, cache.net.field.intensity);
}

template <typename T>
void blur_backward(const BlurNet<T>& net, const BlurPathCache<T>& cache, std::span<const double> d_output,
                   std::span<const double> d_kernels_extra, BlurNet<T>& grad, RenderGrad& d_render) {
    if (!cache.net.valid) throw std::logic_error("blur_backward: forward cache is missing");
    const BlurField& field = cache.net.field;
    const std::size_t n = field.pixels();
    if (d_output.size() != 3 * n) throw std::invalid_argument("blur_backward: gradient shape mismatch");
    if (d_render.image.empty()) d_render.image.assign(3 * n, 0.0);

    std::vector<double> d_blurred(3 * n, 0.0), d_intensity(n, 0.0);
    blend_backward(cache.sharp, cache.blurred, field.intensity, d_output, d_render.image, d_blurred, d_intensity);
    std::vector<double> d_kernels(n * field.taps(), 0.0);
    if (!d_kernels_extra.empty()) {
        if (d_kernels_extra.size() != d_kernels.size()) throw std::invalid_argument("blur_backward: kernel gradient shape");
        std::copy(d_kernels_extra.begin(), d_kernels_extra.end(), d_kernels.begin());
    }
    convolve_blur_backward(cache.sharp, field, d_blurred, d_render.image, d_kernels);
    predict_blur_backward(net, cache.net, d_kernels, d_intensity, grad, &d_render);
}

template std::vector<double> blur_forward<float>(const BlurNet<float>&, const RenderOutput&, int, BlurPathCache<float>&);
template std::vector<double> blur_forward<double>(const BlurNet<double>&, const RenderOutput&, int, BlurPathCache<double>&);
template void blur_backward<float>(const BlurNet<float>&, const BlurPathCache<float>&, std::span<const double>,
                                   std::span<const double>, BlurNet<float>&, RenderGrad&);
template void blur_backward<double>(const BlurNet<double>&, const BlurPathCache<double>&, std::span<const double>,
                                    std::span<const double>, BlurNet<double>&, RenderGrad&);

}  // namespace blurgs
