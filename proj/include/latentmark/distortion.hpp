#pragma once

#include <cstdint>
#include <string>

#include "latentmark/image.hpp"

namespace latentmark {

enum class DistortionKind {
    Identity,
    ColorJitter,  // brightness scaling
    GauBlur,
    GauNoise,
    Jpeg,  // 8x8 DCT + standard luminance table quantization
    MedBlur,
    RandomCrop,  // keep a random window in place, zero outside
    RandomDrop,  // zero random 8x8 blocks
    Resize,      // bilinear down + up
    SpNoise,     // salt and pepper
};

// One distortion with its parameters. Defaults are the benchmark set:
//   colorjitter:factor=6  gaublur:r=4 (sigma = r/2)  gaunoise:sigma=0.05
//   jpeg:qf=25  medblur:k=7  randomcrop:area=0.6  randomdrop:area=0.8
//   resize:area=0.25  spnoise:p=0.05
struct Distortion {
    DistortionKind kind = DistortionKind::Identity;
    double factor = 6.0;   // colorjitter
    int radius = 4;        // gaublur
    double sigma = 0.05;   // gaunoise, in [0,1] pixel scale
    int quality = 25;      // jpeg
    int ksize = 7;         // medblur
    double area = 0.6;     // randomcrop / randomdrop / resize area fraction
    double p = 0.05;       // spnoise
    std::uint64_t seed = 0;

    // "kind:key=value:..." e.g. "gaunoise:sigma=0.05:seed=3". Unknown kinds,
    // unknown keys or out-of-range values raise DistortionError.
    static Distortion parse(const std::string& spec);

    // Canonical label (kind plus its own parameters, without seed), used as
    // the row key in reports.
    std::string label() const;

    Distortion with_seed(std::uint64_t s) const {
        Distortion d = *this;
        d.seed = s;
        return d;
    }

    void validate() const;
};

// Applies d to img; output has the same shape. Stochastic kinds draw from
// SeededRng(d.seed) only, so equal seeds give identical output.
ImageTensor apply_distortion(const ImageTensor& img, const Distortion& d);

}  // namespace latentmark
