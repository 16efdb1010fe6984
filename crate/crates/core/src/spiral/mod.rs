//! Golden-angle (Vogel) spiral arrays and the orbital angular momentum
//! content of their far-field diffraction pattern.
//!
//! The pipeline: place point scatterers on a Vogel spiral, evaluate the
//! Fraunhofer far field on a polar frequency grid, decompose it into
//! azimuthal orders with an FFT, complete each order with a radial Hankel
//! transform, and total the result into a spectrum over OAM order `m`.
//! For the golden-angle spiral the dominant orders land on Fibonacci
//! numbers.

pub mod bessel;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibcode::FibSequence;
use bessel::bessel_j_sequence;

/// The golden angle in radians: `2π (1 - 1/φ) ≈ 2.39996`.
pub fn golden_angle() -> f64 {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    2.0 * std::f64::consts::PI * (1.0 - 1.0 / phi)
}

/// Polar coordinates `(r, θ)` of an `n`-point Vogel-type spiral with an
/// arbitrary divergence angle: `r_k = scale · √k`, `θ_k = k · α` for
/// `k = 1..=n`.
pub fn spiral_points(n: usize, scale: f64, alpha: f64) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|k| (scale * (k as f64).sqrt(), k as f64 * alpha))
        .collect()
}

/// The golden-angle spiral: `spiral_points` at `α = 2π(1 − 1/φ)`.
pub fn vogel_points(n: usize, scale: f64) -> Vec<(f64, f64)> {
    spiral_points(n, scale, golden_angle())
}

/// Far field sampled on a polar grid of spatial frequency.
///
/// Azimuth is sampled at `ν_θ = 2π j / n_az` and the radial frequency at
/// midpoints `ν_r = (i + 1/2) · ν_r_max / n_radial`, stored row-major with
/// azimuth as the slow index.
#[derive(Debug, Clone)]
pub struct FarFieldGrid {
    pub n_az: usize,
    pub n_radial: usize,
    pub max_radial_freq: f64,
    pub values: Vec<Complex64>,
}

impl FarFieldGrid {
    pub fn radial_step(&self) -> f64 {
        self.max_radial_freq / self.n_radial as f64
    }

    pub fn radial_freq(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.radial_step()
    }

    pub fn azimuth(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.n_az as f64
    }

    pub fn value(&self, j: usize, i: usize) -> Complex64 {
        self.values[j * self.n_radial + i]
    }
}

/// Far-field amplitude of a set of point scatterers at one frequency-space
/// point: `E = e0 · Σ_k exp(i 2π r_k ν_r cos(ν_θ - θ_k))`.
pub fn far_field_value(points: &[(f64, f64)], e0: f64, nu_r: f64, nu_theta: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(r, theta) in points {
        let phase = 2.0 * std::f64::consts::PI * r * nu_r * (nu_theta - theta).cos();
        acc += Complex64::from_polar(1.0, phase);
    }
    acc * e0
}

/// Far field of a set of point scatterers on a full polar grid.
///
/// For each scatterer and azimuth the phase is linear in `ν_r`, so the
/// radial sweep is a geometric progression of one fixed phasor — one
/// trigonometric evaluation per (point, azimuth) instead of per grid cell.
pub fn far_field(
    points: &[(f64, f64)],
    e0: f64,
    n_az: usize,
    n_radial: usize,
    max_radial_freq: f64,
) -> Result<FarFieldGrid> {
    if n_az == 0 || n_radial == 0 {
        return Err(Error::config("far-field grid must be non-empty".to_string()));
    }
    if !(max_radial_freq > 0.0) {
        return Err(Error::config(format!(
            "max radial frequency must be > 0, got {max_radial_freq}"
        )));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); n_az * n_radial];
    let d_nu = max_radial_freq / n_radial as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    for &(r, theta) in points {
        for j in 0..n_az {
            let nu_theta = two_pi * j as f64 / n_az as f64;
            let c = (nu_theta - theta).cos();
            // phasor at the first midpoint; its square is the per-step ratio
            let half_step = Complex64::from_polar(1.0, std::f64::consts::PI * r * c * d_nu);
            let ratio = half_step * half_step;
            let mut cur = half_step;
            let row = &mut values[j * n_radial..(j + 1) * n_radial];
            for cell in row.iter_mut() {
                *cell += cur;
                cur *= ratio;
            }
        }
    }
    for v in &mut values {
        *v *= e0;
    }
    Ok(FarFieldGrid {
        n_az,
        n_radial,
        max_radial_freq,
        values,
    })
}

/// OAM content of a far field: total radial weight `S(m)` per azimuthal
/// order `m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OamSpectrum {
    /// Orders `-m_max ..= m_max` in ascending order.
    pub orders: Vec<i64>,
    pub weights: Vec<f64>,
}

impl OamSpectrum {
    pub fn weight(&self, m: i64) -> Option<f64> {
        let first = *self.orders.first()?;
        let idx = usize::try_from(m - first).ok()?;
        self.weights.get(idx).copied()
    }

    /// Largest weight over nonzero orders.
    pub fn max_nonzero_weight(&self) -> f64 {
        self.orders
            .iter()
            .zip(&self.weights)
            .filter(|(&m, _)| m != 0)
            .map(|(_, &w)| w)
            .fold(0.0, f64::max)
    }
}

/// Fourier–Hankel decomposition of a sampled far field.
///
/// The azimuthal FFT gives coefficients `A_m(ν_r)`; each is then carried
/// through a radial Bessel transform `f(k, m) = Σ_i A_m(ν_r_i) J_m(2π k
/// ν_r_i) ν_r_i Δν_r`, and `S(m) = Σ_k |f(k, m)|` over a `k`-grid of
/// `n_k` midpoints up to `k_max`.
///
/// Requires `n_az >= 4 · m_max` so the orders of interest are safely below
/// the azimuthal Nyquist limit.
pub fn fourier_hankel(
    grid: &FarFieldGrid,
    m_max: usize,
    n_k: usize,
    k_max: f64,
) -> Result<OamSpectrum> {
    if grid.n_az < 4 * m_max {
        return Err(Error::config(format!(
            "{} azimuthal samples cannot resolve orders up to {m_max}; need at least {}",
            grid.n_az,
            4 * m_max
        )));
    }
    if n_k == 0 || !(k_max > 0.0) {
        return Err(Error::config("k-grid must be non-empty with k_max > 0".to_string()));
    }

    // azimuthal coefficients A_m(ν_r_i), for m in -m_max..=m_max
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(grid.n_az);
    let d_theta = 2.0 * std::f64::consts::PI / grid.n_az as f64;
    let n_orders = 2 * m_max + 1;
    // coeffs[i][m_idx], m_idx 0 ↔ m = -m_max
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.n_radial * n_orders];
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.n_az];
    for i in 0..grid.n_radial {
        for j in 0..grid.n_az {
            buf[j] = grid.value(j, i);
        }
        fft.process(&mut buf);
        for (m_idx, m) in (-(m_max as i64)..=m_max as i64).enumerate() {
            let bin = m.rem_euclid(grid.n_az as i64) as usize;
            coeffs[i * n_orders + m_idx] = buf[bin] * d_theta;
        }
    }

    // radial Bessel transform, accumulated over the k-grid
    let d_k = k_max / n_k as f64;
    let d_nu = grid.radial_step();
    let mut weights = vec![0.0_f64; n_orders];
    let mut f_row = vec![Complex64::new(0.0, 0.0); n_orders];
    for t in 0..n_k {
        let k = (t as f64 + 0.5) * d_k;
        f_row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for i in 0..grid.n_radial {
            let nu = grid.radial_freq(i);
            let x = 2.0 * std::f64::consts::PI * k * nu;
            let j_seq = bessel_j_sequence(m_max, x);
            let measure = nu * d_nu;
            for (m_idx, m) in (-(m_max as i64)..=m_max as i64).enumerate() {
                let mu = m.unsigned_abs() as usize;
                let jm = if m < 0 && m % 2 != 0 {
                    -j_seq[mu]
                } else {
                    j_seq[mu]
                };
                f_row[m_idx] += coeffs[i * n_orders + m_idx] * (jm * measure);
            }
        }
        for (w, f) in weights.iter_mut().zip(&f_row) {
            *w += f.norm();
        }
    }

    Ok(OamSpectrum {
        orders: (-(m_max as i64)..=m_max as i64).collect(),
        weights,
    })
}

/// One local maximum of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub order: i64,
    pub height: f64,
    /// `|order|` is a Fibonacci number.
    pub is_fibonacci: bool,
}

/// Spectral peaks above a fraction of the strongest nonzero order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeakClassification {
    /// Absolute height threshold used.
    pub threshold: f64,
    /// Local maxima of `S(m)` at or above the threshold, ascending in `m`.
    pub peaks: Vec<Peak>,
    /// Weight of the `m = 0` order, reported separately: it carries no OAM
    /// and is dominated by the DC part of the pattern.
    pub dc_weight: f64,
    /// There is at least one peak and every peak is Fibonacci.
    pub all_fibonacci: bool,
}

/// Classify the dominant orders of a spectrum as local maxima of `S(m)`.
///
/// The threshold is `threshold_frac` of the largest nonzero-order weight;
/// `m = 0` is excluded from peak finding and reported on its own. A flat
/// stretch produces no peaks (a maximum must rise above its left
/// neighbour).
pub fn classify_peaks(spectrum: &OamSpectrum, threshold_frac: f64) -> PeakClassification {
    let threshold = threshold_frac * spectrum.max_nonzero_weight();
    let seq = FibSequence::new();
    // drop the m = 0 slot so the DC weight neither counts as a peak nor
    // shadows its neighbours
    let nonzero: Vec<(i64, f64)> = spectrum
        .orders
        .iter()
        .zip(&spectrum.weights)
        .filter(|(&m, _)| m != 0)
        .map(|(&m, &w)| (m, w))
        .collect();
    let mut peaks = Vec::new();
    for i in 1..nonzero.len().saturating_sub(1) {
        let (m, w) = nonzero[i];
        if w >= threshold && w > nonzero[i - 1].1 && w >= nonzero[i + 1].1 {
            peaks.push(Peak {
                order: m,
                height: w,
                is_fibonacci: seq.contains(m.abs()),
            });
        }
    }
    let all_fibonacci = !peaks.is_empty() && peaks.iter().all(|p| p.is_fibonacci);
    PeakClassification {
        threshold,
        peaks,
        dc_weight: spectrum.weight(0).unwrap_or(0.0),
        all_fibonacci,
    }
}

/// End-to-end configuration for a spiral OAM spectrum computation.
///
/// Lengths are in micrometres. The maximum radial frequency captured is
/// `sin(cone_half_angle)/λ`, the acceptance cone of the collection optics;
/// the radial `k`-grid extends to the spiral's outer radius `√n · scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpiralSpectrumConfig {
    pub n_points: usize,
    /// Vogel scale factor `a0` (the spiral's average inter-point spacing).
    pub scale_um: f64,
    /// Divergence angle in radians; `None` means the golden angle.
    pub alpha_rad: Option<f64>,
    pub wavelength_um: f64,
    pub cone_half_angle_deg: f64,
    pub n_az: usize,
    pub n_radial: usize,
    pub m_max: usize,
    pub n_k: usize,
}

impl Default for SpiralSpectrumConfig {
    fn default() -> Self {
        // a 2000-point spiral matched to a 405 nm source and a 2° cone
        SpiralSpectrumConfig {
            n_points: 2000,
            scale_um: 9.28,
            alpha_rad: None,
            wavelength_um: 0.405,
            cone_half_angle_deg: 2.0,
            n_az: 512,
            n_radial: 256,
            m_max: 100,
            n_k: 256,
        }
    }
}

impl SpiralSpectrumConfig {
    pub fn max_radial_freq(&self) -> f64 {
        self.cone_half_angle_deg.to_radians().sin() / self.wavelength_um
    }

    pub fn k_max(&self) -> f64 {
        (self.n_points as f64).sqrt() * self.scale_um
    }

    /// Compute the far field and its OAM spectrum.
    pub fn compute(&self) -> Result<(FarFieldGrid, OamSpectrum)> {
        if self.n_points == 0
            || !(self.scale_um > 0.0)
            || !(self.wavelength_um > 0.0)
            || !self.alpha_rad.unwrap_or_else(golden_angle).is_finite()
        {
            return Err(Error::config("spiral parameters must be positive".to_string()));
        }
        if !(self.cone_half_angle_deg > 0.0 && self.cone_half_angle_deg < 90.0) {
            return Err(Error::config(format!(
                "cone half-angle must be in (0, 90) degrees, got {}",
                self.cone_half_angle_deg
            )));
        }
        let points = spiral_points(
            self.n_points,
            self.scale_um,
            self.alpha_rad.unwrap_or_else(golden_angle),
        );
        let grid = far_field(&points, 1.0, self.n_az, self.n_radial, self.max_radial_freq())?;
        let spectrum = fourier_hankel(&grid, self.m_max, self.n_k, self.k_max())?;
        Ok((grid, spectrum))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_angle_value() {
        assert_relative_eq!(golden_angle(), 2.399963229728653, epsilon = 1e-12);
    }

    #[test]
    fn vogel_point_layout() {
        let pts = vogel_points(5, 2.0);
        assert_eq!(pts.len(), 5);
        assert_relative_eq!(pts[0].0, 2.0, epsilon = 1e-12);
        assert_relative_eq!(pts[0].1, golden_angle(), epsilon = 1e-12);
        assert_relative_eq!(pts[3].0, 4.0, epsilon = 1e-12);
        assert_relative_eq!(pts[3].1, 4.0 * golden_angle(), epsilon = 1e-12);
        // radii are increasing
        assert!(pts.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn far_field_dc_value() {
        let pts = vogel_points(40, 1.3);
        let v = far_field_value(&pts, 2.0, 0.0, 0.7);
        assert_relative_eq!(v.re, 80.0, epsilon = 1e-9);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn grid_matches_point_evaluator() {
        let pts = vogel_points(25, 1.7);
        let grid = far_field(&pts, 1.5, 16, 8, 0.9).unwrap();
        for j in [0, 5, 11, 15] {
            for i in [0, 3, 7] {
                let direct = far_field_value(&pts, 1.5, grid.radial_freq(i), grid.azimuth(j));
                let cell = grid.value(j, i);
                assert_relative_eq!(cell.re, direct.re, epsilon = 1e-9);
                assert_relative_eq!(cell.im, direct.im, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn invalid_grids_rejected() {
        let pts = vogel_points(4, 1.0);
        assert!(far_field(&pts, 1.0, 0, 8, 1.0).is_err());
        assert!(far_field(&pts, 1.0, 8, 8, -1.0).is_err());
        let grid = far_field(&pts, 1.0, 16, 4, 1.0).unwrap();
        // needs n_az >= 4 * m_max
        assert!(fourier_hankel(&grid, 10, 8, 1.0).is_err());
        assert!(fourier_hankel(&grid, 4, 0, 1.0).is_err());
    }

    /// A synthetic single-mode field `g(ν_r) e^{i q ν_θ}` must put all of
    /// its spectral weight at order `q`.
    #[test]
    fn pure_azimuthal_mode_is_picked_out() {
        let (n_az, n_radial) = (64, 24);
        let q = 7i64;
        let mut values = vec![Complex64::new(0.0, 0.0); n_az * n_radial];
        for j in 0..n_az {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_az as f64;
            for i in 0..n_radial {
                let nu = (i as f64 + 0.5) * (1.0 / n_radial as f64);
                let g = (-(nu * 4.0)).exp();
                values[j * n_radial + i] = Complex64::from_polar(g, q as f64 * theta);
            }
        }
        let grid = FarFieldGrid {
            n_az,
            n_radial,
            max_radial_freq: 1.0,
            values,
        };
        let spectrum = fourier_hankel(&grid, 10, 16, 5.0).unwrap();
        let wq = spectrum.weight(q).unwrap();
        assert!(wq > 0.0);
        for (&m, &w) in spectrum.orders.iter().zip(&spectrum.weights) {
            if m != q {
                assert!(w < 1e-10 * wq, "order {m} carries weight {w}");
            }
        }
    }

    /// An azimuth-independent field carries no weight outside `m = 0`.
    #[test]
    fn rotationally_symmetric_field_is_pure_dc() {
        let (n_az, n_radial) = (64, 16);
        let mut values = vec![Complex64::new(0.0, 0.0); n_az * n_radial];
        for j in 0..n_az {
            for i in 0..n_radial {
                let nu = (i as f64 + 0.5) / n_radial as f64;
                values[j * n_radial + i] = Complex64::new(1.0 / (1.0 + nu), 0.3);
            }
        }
        let grid = FarFieldGrid {
            n_az,
            n_radial,
            max_radial_freq: 1.0,
            values,
        };
        let spectrum = fourier_hankel(&grid, 8, 12, 4.0).unwrap();
        let dc = spectrum.weight(0).unwrap();
        assert!(dc > 0.0);
        for (&m, &w) in spectrum.orders.iter().zip(&spectrum.weights) {
            if m != 0 {
                assert!(w < 1e-10 * dc, "order {m} carries weight {w}");
            }
        }
    }

    /// A ring of `p` equally spaced points only radiates azimuthal orders
    /// that are multiples of `p`.
    #[test]
    fn ring_symmetry_selects_multiples() {
        let p = 6usize;
        let pts: Vec<(f64, f64)> = (0..p)
            .map(|k| (3.0, 2.0 * std::f64::consts::PI * k as f64 / p as f64))
            .collect();
        let grid = far_field(&pts, 1.0, 96, 32, 1.5).unwrap();
        let spectrum = fourier_hankel(&grid, 20, 24, 6.0).unwrap();
        let max = spectrum.max_nonzero_weight();
        assert!(max > 0.0);
        for (&m, &w) in spectrum.orders.iter().zip(&spectrum.weights) {
            if m % p as i64 != 0 {
                assert!(w < 1e-9 * max, "order {m} carries weight {w}");
            }
        }
    }

    /// Rigidly rotating the point set leaves every |f(k, m)| — and hence
    /// the spectrum — unchanged. The grid must resolve the field's full
    /// azimuthal bandwidth (~2π·r_max·ν_r_max orders) or sampling aliases
    /// break the equivalence, so this uses a deliberately oversampled grid.
    #[test]
    fn spectrum_is_rotation_invariant() {
        let pts = vogel_points(30, 0.9);
        let rotated: Vec<(f64, f64)> = pts.iter().map(|&(r, t)| (r, t + 0.83)).collect();
        let spec = |p: &[(f64, f64)]| {
            let grid = far_field(p, 1.0, 64, 24, 0.3).unwrap();
            fourier_hankel(&grid, 12, 16, 5.0).unwrap()
        };
        let a = spec(&pts);
        let b = spec(&rotated);
        let max = a.weights.iter().fold(0.0f64, |acc, &w| acc.max(w));
        for (wa, wb) in a.weights.iter().zip(&b.weights) {
            assert!((wa - wb).abs() < 1e-9 * max, "{wa} vs {wb}");
        }
    }

    /// For any real-amplitude point aperture, `S(-m) = S(m)` exactly.
    #[test]
    fn spectrum_is_symmetric_in_order() {
        let pts = vogel_points(60, 1.1);
        let grid = far_field(&pts, 1.0, 64, 24, 0.8).unwrap();
        let spectrum = fourier_hankel(&grid, 12, 16, 9.0).unwrap();
        for m in 1..=12i64 {
            let wp = spectrum.weight(m).unwrap();
            let wn = spectrum.weight(-m).unwrap();
            assert_relative_eq!(wp, wn, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    fn spike_spectrum(spikes: &[(i64, f64)]) -> OamSpectrum {
        let orders: Vec<i64> = (-6..=6).collect();
        let weights = orders
            .iter()
            .map(|m| {
                spikes
                    .iter()
                    .find(|(s, _)| s == m)
                    .map(|&(_, w)| w)
                    .unwrap_or(0.01)
            })
            .collect();
        OamSpectrum { orders, weights }
    }

    #[test]
    fn classify_excludes_dc_and_labels_fibonacci() {
        // a huge DC column does not shadow its neighbours or count itself
        let spectrum = spike_spectrum(&[(0, 9.0), (-3, 1.0), (3, 1.0)]);
        let report = classify_peaks(&spectrum, 0.5);
        assert_eq!(report.dc_weight, 9.0);
        let found: Vec<(i64, bool)> =
            report.peaks.iter().map(|p| (p.order, p.is_fibonacci)).collect();
        assert_eq!(found, vec![(-3, true), (3, true)]);
        assert!(report.all_fibonacci);
    }

    #[test]
    fn classify_flags_non_fibonacci_spike() {
        let spectrum = spike_spectrum(&[(4, 1.0)]);
        let report = classify_peaks(&spectrum, 0.5);
        assert_eq!(report.peaks.len(), 1);
        assert_eq!(report.peaks[0].order, 4);
        assert!(!report.peaks[0].is_fibonacci);
        assert!(!report.all_fibonacci);
    }

    #[test]
    fn classify_flat_spectrum_has_no_peaks() {
        let spectrum = OamSpectrum {
            orders: (-6..=6).collect(),
            weights: vec![1.0; 13],
        };
        let report = classify_peaks(&spectrum, 0.5);
        assert!(report.peaks.is_empty());
        assert!(!report.all_fibonacci);
    }

    #[test]
    fn config_derived_quantities() {
        let cfg = SpiralSpectrumConfig::default();
        assert_relative_eq!(
            cfg.max_radial_freq(),
            (2.0_f64).to_radians().sin() / 0.405,
            epsilon = 1e-12
        );
        assert_relative_eq!(cfg.k_max(), 2000.0_f64.sqrt() * 9.28, epsilon = 1e-9);
        let mut bad = cfg.clone();
        bad.cone_half_angle_deg = 95.0;
        assert!(bad.compute().is_err());
    }

    /// A scaled-down spiral still shows its strongest nonzero orders on
    /// Fibonacci numbers.
    #[test]
    fn small_spiral_peaks_are_fibonacci() {
        let cfg = SpiralSpectrumConfig {
            n_points: 300,
            scale_um: 9.28,
            alpha_rad: None,
            wavelength_um: 0.405,
            cone_half_angle_deg: 2.0,
            n_az: 160,
            n_radial: 96,
            m_max: 40,
            n_k: 96,
        };
        let (_, spectrum) = cfg.compute().unwrap();
        let report = classify_peaks(&spectrum, 0.5);
        assert!(!report.peaks.is_empty());
        assert!(report.all_fibonacci, "peaks: {:?}", report.peaks);
    }
}
