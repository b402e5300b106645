use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use diqkd::photonics::*;
use diqkd::Error;

const A_H: ModeLabel = ModeLabel::new(Site::A, Pol::H);
const A_V: ModeLabel = ModeLabel::new(Site::A, Pol::V);
const AP_H: ModeLabel = ModeLabel::new(Site::APrime, Pol::H);
const AP_V: ModeLabel = ModeLabel::new(Site::APrime, Pol::V);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn fock(modes: Vec<ModeLabel>, occ: Vec<u8>) -> StateMixture {
    let reg = Arc::new(ModeRegister::new(modes, 4).unwrap());
    StateMixture::pure(FockKet::basis(reg, occ).unwrap())
}

fn diag_prob(s: &StateMixture, occ: &[u8]) -> f64 {
    s.terms().iter().map(|t| t.weight * t.ket.amplitude(occ).norm_sqr()).sum()
}

#[test]
fn pair_states_are_normalized() {
    let reg = Arc::new(ModeRegister::new(SPDC_MODES.to_vec(), 6).unwrap());
    for n in 0..=5 {
        assert_abs_diff_eq!(psi_n(reg.clone(), n).unwrap().norm_sqr(), 1.0, epsilon = 1e-14);
    }
    let one = psi_n(reg, 1).unwrap();
    assert_abs_diff_eq!(one.amplitude(&[1, 0, 0, 1]).re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(one.amplitude(&[0, 1, 1, 0]).re, -1.0 / 2f64.sqrt(), epsilon = 1e-15);
}

#[test]
fn spdc_trace_matches_series() {
    let pbar = 0.1;
    let q: f64 = pbar / 2.0;
    let s = spdc_state(pbar, 3).unwrap();
    let series: f64 = (0..=3).map(|n| (n + 1) as f64 * q.powi(n)).sum();
    assert_abs_diff_eq!(s.trace(), series, epsilon = 1e-15);
    let total: f64 = (0..400).map(|n| spdc_pair_probability(pbar, n)).sum();
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
    let total: f64 = (0..400).map(|n| sp_probability(0.3, n)).sum();
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
}

#[test]
fn source_preconditions() {
    assert!(matches!(spdc_state(0.5, 2), Err(Error::OutOfRange { .. })));
    assert!(matches!(sp_state(A_H, 1.0, 2), Err(Error::OutOfRange { .. })));
    assert!(sp_state(A_H, 0.1, 0).is_err());
}

#[test]
fn order_tags_track_powers() {
    let s = spdc_state(0.2, 2).unwrap();
    let orders: Vec<_> = s.terms().iter().map(|t| t.order).collect();
    assert_eq!(orders, vec![(0, 0), (0, 1), (0, 2)]);
    assert_eq!(s.truncated(1).terms().len(), 2);
    let sp = sp_state(A_H, 0.2, 3).unwrap();
    assert_abs_diff_eq!(sp.component((2, 0)).trace(), 0.04, epsilon = 1e-15);
}

#[test]
fn hong_ou_mandel_dip() {
    let s = fock(vec![A_H, AP_H], vec![1, 1]);
    let out = apply_mode_map(&s, &ModeMap::beamsplitter(A_H, AP_H, 0.5).unwrap()).unwrap();
    assert!(diag_prob(&out, &[1, 1]) < 1e-28);
    assert_abs_diff_eq!(diag_prob(&out, &[2, 0]), 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(diag_prob(&out, &[0, 2]), 0.5, epsilon = 1e-14);
}

#[test]
fn non_unitary_map_is_rejected() {
    let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.1), c(0.0), c(1.0)]);
    assert!(matches!(ModeMap::new(vec![A_H, A_V], m), Err(Error::NonUnitary { .. })));
    assert!(ModeMap::beamsplitter(A_H, A_V, 1.2).is_err());
}

#[test]
fn cutoff_overflow_is_an_error() {
    let reg = Arc::new(ModeRegister::new(vec![A_H, AP_H], 1).unwrap());
    let s = StateMixture::pure(FockKet::basis(reg, vec![1, 1]).unwrap());
    assert!(apply_mode_map(&s, &ModeMap::beamsplitter(A_H, AP_H, 0.5).unwrap()).is_err());
}

#[test]
fn click_pattern_parsing() {
    assert_eq!(parse_pattern("0110").unwrap(), vec![false, true, true, false]);
    assert!(parse_pattern("01x").is_err());
}

#[test]
fn fock_loss_gives_binomial_clicks() {
    for n in 1..=4u8 {
        let s = fock(vec![A_H], vec![n]);
        let eta = 0.3;
        let p = click_probabilities(&s, &[A_H], &[eta]).unwrap();
        assert_abs_diff_eq!(p[1], 1.0 - (1.0 - eta).powi(n as i32), epsilon = 1e-14);
        let lossy = apply_loss(&s, A_H, eta).unwrap();
        for k in 0..=n {
            let binom = (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64);
            let expect = binom * eta.powi(k as i32) * (1.0 - eta).powi((n - k) as i32);
            assert_abs_diff_eq!(diag_prob(&lossy, &[k]), expect, epsilon = 1e-14);
        }
    }
}

/// SPDC pairs pushed through random passive optics.
fn scrambled(pbar: f64, theta: f64, phi: f64, tr: f64) -> StateMixture {
    let s = spdc_state(pbar, 2).unwrap().with_cutoff(4).unwrap();
    let s = apply_mode_map(&s, &ModeMap::half_wave_plate(A_H, A_V, theta).unwrap()).unwrap();
    let s = apply_mode_map(&s, &ModeMap::quarter_wave_plate(AP_H, AP_V, phi).unwrap()).unwrap();
    apply_mode_map(&s, &ModeMap::beamsplitter(A_H, AP_V, tr).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn passive_optics_preserve_trace(pbar in 0.0..0.49f64, theta in -3.2..3.2f64, phi in -3.2..3.2f64, tr in 0.0..=1.0f64) {
        let before = spdc_state(pbar, 2).unwrap().trace();
        let after = scrambled(pbar, theta, phi, tr).trace();
        prop_assert!((before - after).abs() < 1e-12 * before);
    }

    #[test]
    fn loss_preserves_trace_and_clicks_sum_to_it(pbar in 0.01..0.49f64, theta in -3.2..3.2f64, tr in 0.0..=1.0f64, eta in 0.0..=1.0f64) {
        let s = scrambled(pbar, theta, 0.3, tr);
        let lossy = apply_loss_all(&s, &[A_H, AP_V], eta).unwrap();
        prop_assert!((lossy.trace() - s.trace()).abs() < 1e-12 * s.trace());
        let p = click_probabilities(&s, &SPDC_MODES, &[eta, 0.9, 1.0, eta]).unwrap();
        prop_assert!(p.iter().all(|&x| x >= -1e-15));
        prop_assert!((p.iter().sum::<f64>() - s.trace()).abs() < 1e-12 * s.trace());
    }

    #[test]
    fn one_pass_detection_matches_loss_then_projection(
        pbar in 0.01..0.49f64, theta in -3.2..3.2f64, tr in 0.0..=1.0f64,
        e1 in 0.0..=1.0f64, e2 in 0.0..=1.0f64, pat in 0usize..4,
    ) {
        let s = scrambled(pbar, theta, 0.7, tr);
        let pattern = [pat & 2 != 0, pat & 1 != 0];
        let modes = [AP_H, AP_V];
        let (w1, r1) = lossy_threshold_detect(&s, &modes, &[e1, e2], &pattern).unwrap();
        let lossy = apply_loss(&apply_loss(&s, AP_H, e1).unwrap(), AP_V, e2).unwrap();
        let (w2, r2) = threshold_detect(&lossy, &modes, &pattern).unwrap();
        let w3 = click_probabilities(&s, &modes, &[e1, e2]).unwrap()[pat];
        prop_assert!((w1 - w2).abs() < 1e-13);
        prop_assert!((w1 - w3).abs() < 1e-13);
        let basis: Vec<Vec<u8>> = (0..=4u8).flat_map(|i| (0..=4u8).map(move |j| vec![i, j])).collect();
        let d = (r1.density_matrix(&basis) - r2.density_matrix(&basis)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(d < 1e-13);
    }

    #[test]
    fn half_wave_plate_follows_malus(theta in -3.2..3.2f64) {
        let s = fock(vec![A_H, A_V], vec![1, 0]);
        let out = apply_mode_map(&s, &ModeMap::half_wave_plate(A_H, A_V, theta).unwrap()).unwrap();
        prop_assert!((diag_prob(&out, &[1, 0]) - (2.0 * theta).cos().powi(2)).abs() < 1e-13);
    }
}

#[test]
fn quarter_wave_plate_at_45_degrees_makes_circular_light() {
    let s = fock(vec![A_H, A_V], vec![1, 0]);
    let out = apply_mode_map(&s, &ModeMap::quarter_wave_plate(A_H, A_V, FRAC_PI_4).unwrap()).unwrap();
    assert_abs_diff_eq!(diag_prob(&out, &[1, 0]), 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(diag_prob(&out, &[0, 1]), 0.5, epsilon = 1e-14);
}
