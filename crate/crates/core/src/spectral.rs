//! Statistics and spectral helpers for uniformly sampled periodic channels.

use std::f64::consts::TAU;

use rustfft::{num_complex::Complex, FftPlanner};

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

pub fn peak_to_peak(x: &[f64]) -> f64 {
    let (lo, hi) = min_max(x);
    hi - lo
}

pub fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Half the peak-to-peak excursion.
pub fn amplitude(x: &[f64]) -> f64 {
    0.5 * peak_to_peak(x)
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Complex Fourier coefficient of `x` at `bin` cycles per window, scaled so
/// that a unit-amplitude sinusoid has modulus one.
pub fn fourier_coefficient(x: &[f64], bin: usize) -> Complex<f64> {
    let n = x.len() as f64;
    let mut acc = Complex::new(0.0, 0.0);
    for (k, v) in x.iter().enumerate() {
        let arg = -TAU * (bin as f64) * (k as f64) / n;
        acc += Complex::from_polar(*v, arg);
    }
    acc * (2.0 / n)
}

/// Single-sided amplitude spectrum, bins `0..=n/2`.
pub fn amplitude_spectrum(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter()
        .take(n / 2 + 1)
        .map(|c| c.norm() * 2.0 / n as f64)
        .collect()
}

/// Frequency (Hz) of the strongest non-DC component of a channel sampled
/// every `dt` seconds.
pub fn dominant_frequency(x: &[f64], dt: f64) -> f64 {
    let spec = amplitude_spectrum(x);
    let (bin, _) = spec
        .iter()
        .enumerate()
        .skip(1)
        .fold((0, f64::NEG_INFINITY), |best, (i, &a)| if a > best.1 { (i, a) } else { best });
    bin as f64 / (x.len() as f64 * dt)
}

/// Trapezoidal integral of uniformly spaced samples, including the closing
/// sample `last`.
pub fn trapezoid(x: &[f64], last: f64, dt: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let interior: f64 = x[1..].iter().sum();
    dt * (0.5 * x[0] + interior + 0.5 * last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_of_sinusoid() {
        let n = 4000;
        let a = 3.0;
        let x: Vec<f64> = (0..n)
            .map(|k| a * (TAU * 2.0 * k as f64 / n as f64).sin() + 5.0)
            .collect();
        assert!((variance(&x) - a * a / 2.0).abs() < 1e-10);
        assert!((peak_to_peak(&x) - 2.0 * a).abs() < 1e-9);
        assert!((mean(&x) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn constant_has_no_spread() {
        let x = vec![2.5; 100];
        assert_eq!(variance(&x), 0.0);
        assert_eq!(peak_to_peak(&x), 0.0);
    }

    #[test]
    fn dominant_frequency_of_tone() {
        let dt = 1e-3;
        let x: Vec<f64> = (0..2000).map(|k| (TAU * 8.0 * k as f64 * dt).cos() + 0.3).collect();
        assert!((dominant_frequency(&x, dt) - 8.0).abs() < 1e-9);
    }

    #[test]
    fn fourier_coefficient_phase() {
        let n = 1000;
        let x: Vec<f64> = (0..n).map(|k| (TAU * 3.0 * k as f64 / n as f64 - 0.4).cos()).collect();
        let c = fourier_coefficient(&x, 3);
        assert!((c.norm() - 1.0).abs() < 1e-12);
        assert!((c.arg() + 0.4).abs() < 1e-12);
    }
}
