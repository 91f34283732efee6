//! Uniform periodic grids and the spectral operators defined on them.
//!
//! Samples are stored row-major with the last axis fastest. Physical
//! coordinates run over `[-L, L)` on every axis, so the origin sits at index
//! `points / 2`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned periodic box `[-L, L)^N` sampled with `points` nodes per axis.
#[derive(Clone)]
pub struct Grid<T: Real> {
    dim: usize,
    half_len: T,
    points: usize,
    spacing: T,
    wavenumbers: Arc<[T]>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("half_len", &self.half_len)
            .field("points", &self.points)
            .finish()
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.half_len == other.half_len && self.points == other.points
    }
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, half_len: T, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("points={points} must be a power of two >= 4")));
        }
        if !(half_len > T::zero() && half_len.is_finite()) {
            return Err(Error::InvalidGrid(format!("half-length {half_len} must be positive")));
        }
        let spacing = T::two() * half_len / T::of_usize(points);
        let dk = T::PI() / half_len;
        let wavenumbers: Arc<[T]> = (0..points)
            .map(|m| {
                let signed = if m < points / 2 { m as f64 } else { m as f64 - points as f64 };
                dk * T::lit(signed)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        Ok(Self { dim, half_len, points, spacing, wavenumbers, forward, inverse })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn half_len(&self) -> T {
        self.half_len
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    /// Total number of samples, `points^N`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^N` of the periodic trapezoid rule.
    #[inline]
    pub fn cell_volume(&self) -> T {
        self.spacing.powi(self.dim as i32)
    }

    /// Coordinate of node `i` along any axis.
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        -self.half_len + self.spacing * T::of_usize(i)
    }

    #[inline]
    fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dim - 1 - axis) as u32)
    }

    /// Per-axis node indices of a flat index.
    #[inline]
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rem % self.points;
            rem /= self.points;
        }
        out
    }

    #[inline]
    pub fn ravel(&self, idx: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, a| acc * self.points + idx[a])
    }

    /// Physical position of a flat index; unused axes are zero.
    #[inline]
    pub fn position(&self, flat: usize) -> [T; 3] {
        let idx = self.unravel(flat);
        let mut x = [T::zero(); 3];
        for a in 0..self.dim {
            x[a] = self.coord(idx[a]);
        }
        x
    }

    #[inline]
    pub fn radius_sq(&self, flat: usize) -> T {
        let x = self.position(flat);
        x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    }

    /// Wave vector of a flat Fourier index.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> [T; 3] {
        let idx = self.unravel(flat);
        let mut k = [T::zero(); 3];
        for a in 0..self.dim {
            k[a] = self.wavenumbers[idx[a]];
        }
        k
    }

    #[inline]
    pub fn k_sq(&self, flat: usize) -> T {
        let k = self.wavevector(flat);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Flat index of the node at the origin.
    pub fn center_index(&self) -> usize {
        self.ravel([self.points / 2; 3])
    }

    /// Largest box coordinate magnitude inside which the fields are trusted.
    pub fn half_box_radius(&self) -> T {
        self.half_len / T::two()
    }

    /// Unnormalized forward DFT over all axes, in place.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.forward);
    }

    /// Inverse DFT over all axes including the `1/points^N` factor.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.inverse);
        let scale = T::one() / T::of_usize(self.len());
        for v in data.iter_mut() {
            *v = *v * scale;
        }
    }

    fn transform(&self, data: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid");
        let n = self.points;
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        // last axis is contiguous
        plan.process_with_scratch(data, &mut scratch);
        if self.dim == 1 {
            return;
        }
        // other axes: transpose each block so its lines are contiguous
        let mut buf = Vec::new();
        for axis in 0..self.dim - 1 {
            let stride = self.stride(axis);
            let block = stride * n;
            buf.resize(block, Complex::new(T::zero(), T::zero()));
            for chunk in data.chunks_exact_mut(block) {
                for j in 0..n {
                    let row = &chunk[j * stride..(j + 1) * stride];
                    for (off, v) in row.iter().enumerate() {
                        buf[off * n + j] = *v;
                    }
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for j in 0..n {
                    let row = &mut chunk[j * stride..(j + 1) * stride];
                    for (off, v) in row.iter_mut().enumerate() {
                        *v = buf[off * n + j];
                    }
                }
            }
        }
    }

    /// Multiplies the spectrum by `mult(k)` and returns to physical space.
    pub fn apply_multiplier<F>(&self, values: &[Complex<T>], mult: F) -> Vec<Complex<T>>
    where
        F: Fn([T; 3]) -> Complex<T>,
    {
        let mut buf = values.to_vec();
        self.forward(&mut buf);
        for (flat, v) in buf.iter_mut().enumerate() {
            *v = *v * mult(self.wavevector(flat));
        }
        self.inverse(&mut buf);
        buf
    }

    /// Wavenumber used for first derivatives: the Nyquist mode is dropped.
    #[inline]
    fn derivative_k(&self, m: usize) -> T {
        if m == self.points / 2 {
            T::zero()
        } else {
            self.wavenumbers[m]
        }
    }

    /// Spectral gradient, one array per axis.
    pub fn gradient(&self, values: &[Complex<T>]) -> Vec<Vec<Complex<T>>> {
        let mut spec = values.to_vec();
        self.forward(&mut spec);
        (0..self.dim)
            .map(|axis| {
                let mut d: Vec<Complex<T>> = spec
                    .iter()
                    .enumerate()
                    .map(|(flat, v)| {
                        let k = self.derivative_k(self.unravel(flat)[axis]);
                        *v * Complex::new(T::zero(), k)
                    })
                    .collect();
                self.inverse(&mut d);
                d
            })
            .collect()
    }

    /// Spectral Laplacian.
    pub fn laplacian(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        self.apply_multiplier(values, |k| {
            Complex::new(-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]), T::zero())
        })
    }

    /// True for modes kept by the 2/3 rule.
    #[inline]
    pub fn dealias_keep(&self, flat: usize) -> bool {
        let idx = self.unravel(flat);
        let n = self.points;
        (0..self.dim).all(|a| {
            let m = idx[a];
            let signed = if m < n / 2 { m } else { n - m };
            3 * signed <= n
        })
    }

    /// Zeroes every spectral coefficient outside the 2/3 band, in place on a
    /// spectrum.
    pub fn dealias_spectrum(&self, spec: &mut [Complex<T>]) {
        for (flat, v) in spec.iter_mut().enumerate() {
            if !self.dealias_keep(flat) {
                *v = Complex::new(T::zero(), T::zero());
            }
        }
    }

    /// Band-limited interpolation weights that evaluate a line of samples at
    /// the points `factor * x_i`. Targets outside the box get a zero row.
    fn dilation_matrix(&self, factor: T) -> Vec<T> {
        let n = self.points;
        let h = self.spacing;
        let mut w = vec![T::zero(); n * n];
        let nf = T::of_usize(n);
        for i in 0..n {
            let y = factor * self.coord(i);
            if y < -self.half_len || y > self.half_len {
                continue;
            }
            for j in 0..n {
                let d = (y - self.coord(j)) / h;
                let nearest = d.round();
                let row = &mut w[i * n..(i + 1) * n];
                if (d - nearest).abs() < T::lit(1e-12) {
                    let m = nearest.to_i64().unwrap_or(1).rem_euclid(n as i64);
                    row[j] = if m == 0 { T::one() } else { T::zero() };
                } else {
                    let theta = T::PI() * d / nf;
                    row[j] = (nf * theta).sin() / (nf * theta.tan());
                }
            }
        }
        w
    }

    /// Samples of the trigonometric interpolant at `factor * x`, treating the
    /// field as zero outside the box.
    pub fn dilate(&self, values: &[Complex<T>], factor: T) -> Vec<Complex<T>> {
        let n = self.points;
        let w = self.dilation_matrix(factor);
        let mut data = values.to_vec();
        let mut line = vec![Complex::new(T::zero(), T::zero()); n];
        for axis in 0..self.dim {
            let stride = self.stride(axis);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (i, slot) in line.iter_mut().enumerate() {
                        let row = &w[i * n..(i + 1) * n];
                        let mut acc = Complex::new(T::zero(), T::zero());
                        for (j, &wij) in row.iter().enumerate() {
                            if wij != T::zero() {
                                acc = acc + data[base + j * stride] * wij;
                            }
                        }
                        *slot = acc;
                    }
                    for (i, v) in line.iter().enumerate() {
                        data[base + i * stride] = *v;
                    }
                }
            }
        }
        data
    }

    /// Spectral translation: returns samples of `f(x - shift)`.
    pub fn translate(&self, values: &[Complex<T>], shift: [T; 3]) -> Vec<Complex<T>> {
        let n = self.points;
        self.apply_multiplier(values, |k| {
            let mut phase = T::zero();
            for a in 0..self.dim {
                // Nyquist mode carries no phase information
                if (k[a] - self.wavenumbers[n / 2]).abs() == T::zero() {
                    continue;
                }
                phase -= k[a] * shift[a];
            }
            Complex::new(phase.cos(), phase.sin())
        })
    }

    /// Checks that `other` describes the same grid.
    pub fn ensure_same(&self, other: &Self, what: &'static str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Mismatch { what })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::<f64>::new(1, 1.0, 12).is_err());
        assert!(Grid::<f64>::new(1, -1.0, 16).is_err());
        assert!(Grid::<f64>::new(0, 1.0, 16).is_err());
    }

    #[test]
    fn round_trip_fft_3d() {
        let g = Grid::<f64>::new(3, 2.0, 8).unwrap();
        let data: Vec<_> = (0..g.len()).map(|i| Complex::new(i as f64, (i % 7) as f64)).collect();
        let mut buf = data.clone();
        g.forward(&mut buf);
        g.inverse(&mut buf);
        for (a, b) in data.iter().zip(&buf) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_sine_2d() {
        let g = Grid::<f64>::new(2, std::f64::consts::PI, 32).unwrap();
        let vals: Vec<_> = (0..g.len())
            .map(|f| {
                let x = g.position(f);
                c((2.0 * x[0]).sin() * x[1].cos())
            })
            .collect();
        let grad = g.gradient(&vals);
        for f in 0..g.len() {
            let x = g.position(f);
            assert!((grad[0][f].re - 2.0 * (2.0 * x[0]).cos() * x[1].cos()).abs() < 1e-12);
            assert!((grad[1][f].re + (2.0 * x[0]).sin() * x[1].sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_is_center_node() {
        let g = Grid::<f64>::new(3, 5.0, 16).unwrap();
        assert_eq!(g.radius_sq(g.center_index()), 0.0);
    }

    #[test]
    fn dilation_of_gaussian() {
        let g = Grid::<f64>::new(1, 10.0, 128).unwrap();
        let f = |x: f64| (-x * x).exp();
        let vals: Vec<_> = (0..g.len()).map(|i| c(f(g.coord(i)))).collect();
        for &factor in &[0.5, 1.0, 1.7] {
            let out = g.dilate(&vals, factor);
            for i in 0..g.len() {
                assert!((out[i].re - f(factor * g.coord(i))).abs() < 1e-12, "factor {factor}");
            }
        }
    }

    #[test]
    fn translation_of_gaussian() {
        let g = Grid::<f64>::new(1, 10.0, 128).unwrap();
        let vals: Vec<_> = (0..g.len()).map(|i| c((-g.coord(i).powi(2)).exp())).collect();
        let out = g.translate(&vals, [0.37, 0.0, 0.0]);
        for i in 0..g.len() {
            let x = g.coord(i) - 0.37;
            assert!((out[i].re - (-x * x).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn dealias_band() {
        let g = Grid::<f64>::new(1, 1.0, 12usize.next_power_of_two()).unwrap();
        let kept: Vec<_> = (0..g.len()).filter(|&m| g.dealias_keep(m)).collect();
        // 16 points: |m| <= 5 kept
        assert_eq!(kept.len(), 11);
    }
}
