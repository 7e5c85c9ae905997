#include "kernels.hpp"

namespace polarnav::polar::kernels::serial {

void demosaic(const PolarMosaic& m, IntensityPlanes& out) {
  for (int v = 0; v < out.height(); ++v) demosaic_row(m, out, v);
}

void grayscale(const IntensityPlanes& p, Plane8& out) {
  for (int v = 0; v < out.height; ++v) grayscale_row(p, out, v);
}

void dop(const IntensityPlanes& p, PlaneD& out) {
  for (int v = 0; v < out.height; ++v) dop_row(p, out, v);
}

void aop(const IntensityPlanes& p, AngleOfPolarization& out) {
  for (int v = 0; v < out.theta.height; ++v) aop_row(p, out, v);
}

void map_dop(const PlaneD& in, Plane8& out) {
  for (int v = 0; v < in.height; ++v) map_dop_row(in, out, v);
}

void map_aop(const PlaneD& in, Plane8& out) {
  for (int v = 0; v < in.height; ++v) map_aop_row(in, out, v);
}

void min_eigen(const Plane8& img, PlaneD& out) {
  Gradients g{PlaneD(img.width, img.height), PlaneD(img.width, img.height),
              PlaneD(img.width, img.height)};
  for (int y = 0; y < img.height; ++y) sobel_row(img, g, y);
  for (int y = 0; y < img.height; ++y) min_eigen_row(g, out, y);
}

}  // namespace polarnav::polar::kernels::serial
