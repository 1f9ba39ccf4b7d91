//! Closed-form approximations of the transform, used as independent oracles
//! for the numerical pipeline and for studying the brightness-equalization
//! property.
//!
//! All three approximations share the same structure: a weighted sum of even
//! spectral derivatives divided by the signal itself, valid where the
//! denominator stays above a floor.

use num_complex::Complex64;

use crate::error::{PstError, Result};
use crate::kernel::TaylorCoeffs;
use crate::spectral::{frequency_axis, spectral_derivative, Spectrum};

/// Response samples plus the valid-domain mask. Samples outside the mask are
/// set to zero, never clamped.
#[derive(Debug, Clone)]
pub struct MaskedResponse {
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

/// Agreement statistics between a numerical response and an analytic oracle.
#[derive(Debug, Clone)]
pub struct OracleReport {
    /// Largest absolute deviation over the valid domain.
    pub max_abs_deviation: f64,
    /// Deviation normalized by the oracle's peak magnitude.
    pub normalized_deviation: f64,
    /// Pearson correlation over the valid domain.
    pub correlation: f64,
    /// Per-sample valid-domain mask the statistics were computed on.
    pub mask: Vec<bool>,
}

impl OracleReport {
    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

fn masked(values: Vec<f64>, mask: Vec<bool>) -> Result<MaskedResponse> {
    if mask.iter().all(|&m| !m) {
        return Err(PstError::EmptyDomain);
    }
    Ok(MaskedResponse { values, mask })
}

/// General small-phase transfer function:
/// `sum_m [(-1)^(m/2) phi^(m) / (m! (2 pi)^m)] D_m(signal) / signal`
/// for even `m` up to the coefficient order.
pub fn pst_smallphase(signal: &[f64], coeffs: &TaylorCoeffs, floor: f64) -> Result<MaskedResponse> {
    let mut numerator = vec![0.0; signal.len()];
    for (m, _) in coeffs.iter() {
        let weight = coeffs.derivative_weight(m)?;
        let deriv = spectral_derivative(signal, m)?;
        for (acc, d) in numerator.iter_mut().zip(&deriv) {
            *acc += weight * d;
        }
    }
    divide_by_signal(numerator, signal, floor)
}

/// Same quantity evaluated through a single inverse transform of the
/// linearized kernel `(1 + j phi_T(u))` applied to the spectrum, taking the
/// imaginary part over the signal. Must agree with [`pst_smallphase`] to
/// rounding; kept separate so the two algebraic routes stay independent.
pub fn pst_smallphase_spectral(
    signal: &[f64],
    coeffs: &TaylorCoeffs,
    floor: f64,
) -> Result<MaskedResponse> {
    let mut spec = Spectrum::forward_1d(signal)?;
    let u = frequency_axis(signal.len());
    for (bin, &uk) in spec.bins_mut().iter_mut().zip(&u) {
        *bin *= Complex64::new(1.0, coeffs.phase_at(uk));
    }
    let numerator: Vec<f64> = spec.inverse().iter().map(|c| c.im).collect();
    divide_by_signal(numerator, signal, floor)
}

/// Unit quadratic kernel under the small-phase approximation:
/// `-D_2(signal) / ((2 pi)^2 signal)`.
pub fn pst_quadratic(signal: &[f64], floor: f64) -> Result<MaskedResponse> {
    let two_pi_sq = (2.0 * std::f64::consts::PI).powi(2);
    let d2 = spectral_derivative(signal, 2)?;
    let numerator: Vec<f64> = d2.iter().map(|&d| -d / two_pi_sq).collect();
    divide_by_signal(numerator, signal, floor)
}

/// Unit quadratic kernel with the sine/cosine expansion carried to third
/// order instead of the small-phase linearization:
/// numerator `-D_2/(2pi)^2 + D_6/(3!(2pi)^6) - D_10/(5!(2pi)^10)`,
/// denominator `signal - D_4/(2!(2pi)^4) + D_8/(4!(2pi)^8)`.
pub fn pst_quadratic_order3(signal: &[f64], floor: f64) -> Result<MaskedResponse> {
    let tp = 2.0 * std::f64::consts::PI;
    let d2 = spectral_derivative(signal, 2)?;
    let d4 = spectral_derivative(signal, 4)?;
    let d6 = spectral_derivative(signal, 6)?;
    let d8 = spectral_derivative(signal, 8)?;
    let d10 = spectral_derivative(signal, 10)?;

    let n = signal.len();
    let mut values = vec![0.0; n];
    let mut mask = vec![false; n];
    for i in 0..n {
        let numerator = -d2[i] / tp.powi(2) + d6[i] / (6.0 * tp.powi(6))
            - d10[i] / (120.0 * tp.powi(10));
        let denominator = signal[i] - d4[i] / (2.0 * tp.powi(4)) + d8[i] / (24.0 * tp.powi(8));
        if signal[i] > floor && denominator > floor {
            values[i] = numerator / denominator;
            mask[i] = true;
        }
    }
    masked(values, mask)
}

fn divide_by_signal(numerator: Vec<f64>, signal: &[f64], floor: f64) -> Result<MaskedResponse> {
    let n = signal.len();
    let mut values = vec![0.0; n];
    let mut mask = vec![false; n];
    for i in 0..n {
        if signal[i] > floor {
            values[i] = numerator[i] / signal[i];
            mask[i] = true;
        }
    }
    masked(values, mask)
}

/// Compare a numerical response against an analytic one over `mask`.
pub fn compare_oracle(numerical: &[f64], analytic: &[f64], mask: &[bool]) -> Result<OracleReport> {
    if numerical.len() != analytic.len() || numerical.len() != mask.len() {
        return Err(PstError::InvalidSize(format!(
            "length mismatch: numerical {}, analytic {}, mask {}",
            numerical.len(),
            analytic.len(),
            mask.len()
        )));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(PstError::EmptyDomain);
    }

    let mut max_dev = 0.0f64;
    let mut peak = 0.0f64;
    let mut mean_n = 0.0;
    let mut mean_a = 0.0;
    for i in 0..numerical.len() {
        if mask[i] {
            max_dev = max_dev.max((numerical[i] - analytic[i]).abs());
            peak = peak.max(analytic[i].abs());
            mean_n += numerical[i];
            mean_a += analytic[i];
        }
    }
    mean_n /= count as f64;
    mean_a /= count as f64;

    let mut cov = 0.0;
    let mut var_n = 0.0;
    let mut var_a = 0.0;
    for i in 0..numerical.len() {
        if mask[i] {
            let dn = numerical[i] - mean_n;
            let da = analytic[i] - mean_a;
            cov += dn * da;
            var_n += dn * dn;
            var_a += da * da;
        }
    }
    let correlation = if max_dev == 0.0 {
        1.0
    } else if var_n == 0.0 || var_a == 0.0 {
        // Degenerate (constant) inputs that do not coincide.
        0.0
    } else {
        cov / (var_n.sqrt() * var_a.sqrt())
    };

    let normalized_deviation = if max_dev == 0.0 { 0.0 } else { max_dev / peak };
    Ok(OracleReport {
        max_abs_deviation: max_dev,
        normalized_deviation,
        correlation,
        mask: mask.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::taylor_coeffs;
    use crate::synth;

    fn peak_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    #[test]
    fn constant_signal_gives_zero_response() {
        let x = vec![0.5; 64];
        let coeffs = taylor_coeffs(3.0, 0.2, 0.5, 6).unwrap();
        for resp in [
            pst_smallphase(&x, &coeffs, 1e-9).unwrap(),
            pst_quadratic(&x, 1e-9).unwrap(),
            pst_quadratic_order3(&x, 1e-9).unwrap(),
        ] {
            assert!(resp.values.iter().all(|&v| v.abs() <= 1e-12));
            assert!(resp.mask.iter().all(|&m| m));
        }
    }

    #[test]
    fn response_scales_inversely_with_base_brightness() {
        // Two smoothed steps of identical contrast on bases B and 2B: the
        // peak response on base B is about twice the one on base 2B.
        let n = 128;
        let delta = 0.1;
        let make = |base: f64| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let t = (i as f64 - 64.0) / 3.0;
                    base + delta / (1.0 + (-t).exp())
                })
                .collect()
        };
        let coeffs = taylor_coeffs(12.15, 0.05, 0.5, 6).unwrap();
        let low = pst_smallphase(&make(0.2), &coeffs, 1e-9).unwrap();
        let high = pst_smallphase(&make(0.4), &coeffs, 1e-9).unwrap();
        let ratio = peak_abs(&low.values) / peak_abs(&high.values);
        assert!(
            (1.6..=2.2).contains(&ratio),
            "expected roughly inverse-brightness ratio near 2, got {ratio}"
        );
    }

    #[test]
    fn smallphase_m2_reduces_to_quadratic_up_to_scale() {
        let n = 96;
        let x: Vec<f64> = (0..n)
            .map(|i| 0.4 + 0.2 * (2.0 * std::f64::consts::PI * 3.0 * i as f64 / n as f64).cos())
            .collect();
        let coeffs = taylor_coeffs(5.0, 0.3, 0.5, 2).unwrap();
        let phi2 = coeffs.coefficient(2).unwrap();
        let small = pst_smallphase(&x, &coeffs, 1e-9).unwrap();
        let quad = pst_quadratic(&x, 1e-9).unwrap();
        let scale = phi2 / 2.0;
        let peak = peak_abs(&small.values);
        for (s, q) in small.values.iter().zip(&quad.values) {
            assert!((s - scale * q).abs() <= 1e-10 * peak.max(1.0));
        }
    }

    #[test]
    fn quadratic_matches_analytic_cosine_formula() {
        let n = 128;
        let a = 0.01;
        let u0 = 4.0 / n as f64;
        let x: Vec<f64> = (0..n)
            .map(|i| 1.0 + a * (2.0 * std::f64::consts::PI * u0 * i as f64).cos())
            .collect();
        let resp = pst_quadratic(&x, 1e-9).unwrap();
        for (i, &v) in resp.values.iter().enumerate() {
            let c = (2.0 * std::f64::consts::PI * u0 * i as f64).cos();
            let expected = a * u0 * u0 * c / (1.0 + a * c);
            assert!((v - expected).abs() <= 1e-9);
        }
    }

    #[test]
    fn all_oracles_are_scale_invariant() {
        // Numerator and denominator are both degree-1 in the signal, so a
        // positive scale cancels.
        let n = 64;
        let x: Vec<f64> = (0..n).map(|i| 0.3 + 0.1 * ((i as f64) * 0.4).sin()).collect();
        let scaled_x: Vec<f64> = x.iter().map(|&v| 2.0 * v).collect();
        let coeffs = taylor_coeffs(8.0, 0.2, 0.5, 6).unwrap();
        let runs: [(MaskedResponse, MaskedResponse); 3] = [
            (
                pst_quadratic(&x, 1e-12).unwrap(),
                pst_quadratic(&scaled_x, 1e-12).unwrap(),
            ),
            (
                pst_quadratic_order3(&x, 1e-12).unwrap(),
                pst_quadratic_order3(&scaled_x, 1e-12).unwrap(),
            ),
            (
                pst_smallphase(&x, &coeffs, 1e-12).unwrap(),
                pst_smallphase(&scaled_x, &coeffs, 1e-12).unwrap(),
            ),
        ];
        for (base, scaled) in &runs {
            for (a, b) in base.values.iter().zip(&scaled.values) {
                assert!((a - b).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn order3_agrees_with_quadratic_on_band_limited_signals() {
        let n = 256;
        // Energy confined to |u| <= 0.05: lowest few harmonics only.
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                0.5 + 0.1 * (3.0 * t).cos() + 0.05 * (7.0 * t).sin() + 0.03 * (12.0 * t).cos()
            })
            .collect();
        let quad = pst_quadratic(&x, 1e-9).unwrap();
        let ord3 = pst_quadratic_order3(&x, 1e-9).unwrap();
        let peak = peak_abs(&quad.values);
        for (a, b) in ord3.values.iter().zip(&quad.values) {
            assert!((a - b).abs() <= 0.01 * peak);
        }
    }

    #[test]
    fn order3_departs_from_quadratic_on_broadband_step() {
        // Hard (unsmoothed) step: spectral content up to Nyquist activates
        // the higher-order terms.
        let (x, _) = synth::staircase(256, &[0.6], 0.2, 0.0).unwrap();
        let quad = pst_quadratic(&x, 1e-9).unwrap();
        let ord3 = pst_quadratic_order3(&x, 1e-9).unwrap();
        let peak = peak_abs(&quad.values);
        let max_diff = ord3
            .values
            .iter()
            .zip(&quad.values)
            .zip(ord3.mask.iter().zip(&quad.mask))
            .filter(|(_, (m1, m2))| **m1 && **m2)
            .map(|((a, b), _)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(
            max_diff > 0.01 * peak,
            "higher-order correction inactive: diff {max_diff} vs peak {peak}"
        );
    }

    #[test]
    fn smallphase_routes_agree() {
        let n = 200;
        let x: Vec<f64> = (0..n)
            .map(|i| 0.3 + 0.25 * ((i as f64) * 0.13).sin().powi(2) + 0.1 * ((i as f64) * 0.029).cos())
            .collect();
        let coeffs = taylor_coeffs(12.5, 0.05, 0.5, 6).unwrap();
        let a = pst_smallphase(&x, &coeffs, 1e-9).unwrap();
        let b = pst_smallphase_spectral(&x, &coeffs, 1e-9).unwrap();
        for (va, vb) in a.values.iter().zip(&b.values) {
            assert!((va - vb).abs() <= 1e-10);
        }
        assert_eq!(a.mask, b.mask);
    }

    #[test]
    fn responses_mask_samples_at_or_below_floor() {
        let mut x = vec![0.5; 32];
        x[3] = 0.0;
        let resp = pst_quadratic(&x, 1e-6).unwrap();
        assert!(!resp.mask[3]);
        assert_eq!(resp.values[3], 0.0);
        assert!(resp.mask[4]);
    }

    #[test]
    fn all_samples_below_floor_is_empty_domain() {
        let x = vec![0.0; 16];
        assert!(matches!(pst_quadratic(&x, 1e-6), Err(PstError::EmptyDomain)));
    }

    #[test]
    fn compare_oracle_identical_inputs() {
        let x = vec![0.1, -0.4, 0.2, 0.9];
        let mask = vec![true; 4];
        let report = compare_oracle(&x, &x, &mask).unwrap();
        assert_eq!(report.max_abs_deviation, 0.0);
        assert_eq!(report.normalized_deviation, 0.0);
        assert_eq!(report.correlation, 1.0);
        assert_eq!(report.valid_count(), 4);
    }

    #[test]
    fn compare_oracle_scaled_input() {
        let numerical = vec![0.1, -0.4, 0.2, 0.9];
        let analytic: Vec<f64> = numerical.iter().map(|&v| 2.0 * v).collect();
        let mask = vec![true; 4];
        let report = compare_oracle(&numerical, &analytic, &mask).unwrap();
        assert!((report.correlation - 1.0).abs() <= 1e-12);
        assert!((report.normalized_deviation - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn compare_oracle_rejects_empty_mask_and_mismatched_lengths() {
        let x = vec![1.0, 2.0];
        assert!(matches!(
            compare_oracle(&x, &x, &[false, false]),
            Err(PstError::EmptyDomain)
        ));
        assert!(matches!(
            compare_oracle(&x, &[1.0], &[true, true]),
            Err(PstError::InvalidSize(_))
        ));
    }

    #[test]
    fn smallphase_convergence_as_strength_shrinks() {
        // Normalized by strength, the numerical transform converges onto the
        // oracle as S shrinks. A gentle warp keeps the Taylor series accurate
        // over the whole occupied band, so the S-dependent nonlinearity is
        // what the check sees; circle harmonics avoid padding junctions.
        let n = 256;
        let signal: Vec<f64> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                0.5 + 0.15 * (5.0 * t).cos() + 0.1 * (19.0 * t).sin() + 0.08 * (40.0 * t).cos()
                    + 0.05 * (77.0 * t).sin()
            })
            .collect();
        let mut cfg = crate::transform::PstConfig::new(1.0, 0.1);
        cfg.pad_mode = crate::transform::PadMode::Periodic;
        cfg.pad_width = Some(0);
        let mut errors = Vec::new();
        for &s in &[0.1, 0.05] {
            cfg.strength = s;
            let numerical = crate::transform::pst1d(&signal, &cfg).unwrap();
            let coeffs = taylor_coeffs(1.0, s, 0.5, 6).unwrap();
            let oracle = pst_smallphase(&signal, &coeffs, 1e-9).unwrap();
            let err = numerical
                .iter()
                .zip(&oracle.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            errors.push(err / s);
        }
        assert!(
            errors[1] <= 0.6 * errors[0],
            "expected first-order convergence, got normalized errors {errors:?}"
        );
    }
}
