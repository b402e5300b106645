use std::f64::consts::SQRT_2;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use diqkd::behavior::*;
use diqkd::Error;

fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn tsirelson_point() {
    let t = tsirelson();
    assert_abs_diff_eq!(t.chsh(&Binning::binary()).unwrap(), 2.0 * SQRT_2, epsilon = 1e-14);
    assert!(t.signaling() < 1e-16);
    let lossy = lossy_tsirelson_one_sided(0.8).unwrap();
    let fold = Binning { a: vec![1.0, -1.0, 1.0], b: vec![1.0, -1.0] };
    assert_abs_diff_eq!(lossy.chsh(&fold).unwrap(), 0.8 * 2.0 * SQRT_2, epsilon = 1e-14);
}

#[test]
fn appendix_c_attack_reconstructs_lossy_tsirelson() {
    let (eta, attack) = appendix_c_attack();
    assert_abs_diff_eq!(eta, (11.0 + SQRT_2) / 17.0, epsilon = 1e-15);
    let w: f64 = attack.components.iter().map(|c| c.weight).sum();
    assert_abs_diff_eq!(w, 1.0, epsilon = 1e-15);
    let mix = attack.mixture().unwrap();
    let target = lossy_tsirelson_one_sided(eta).unwrap();
    for (a, b) in mix.probs.iter().zip(&target.probs) {
        assert!((a - b).abs() < 1e-12);
    }
    for (k, fold) in [(1, -1.0), (2, 1.0)] {
        let binning = Binning { a: vec![1.0, -1.0, fold], b: vec![1.0, -1.0] };
        assert_abs_diff_eq!(attack.components[k].behavior.chsh(&binning).unwrap(), 2.0 * SQRT_2, epsilon = 1e-9);
    }
}

#[test]
fn eta_c_cases() {
    assert_eq!(eta_c(1, 2).unwrap(), 0.5);
    assert_eq!(eta_c(3, 2).unwrap(), 0.5);
    assert_eq!(eta_c(2, 5).unwrap(), 1.0 / 3.0);
    assert!(eta_c(0, 2).is_err());
    assert_eq!(combined_attack_hae(0.3, 1, 2).unwrap(), 0.0);
    assert_abs_diff_eq!(combined_attack_hae(0.75, 1, 2).unwrap(), 0.5, epsilon = 1e-15);
}

// Closed form for a perfectly correlated bit with symmetric loss:
// H(A|B) = h(η) + η(1 − η).
#[test]
fn lossy_bit_entropy_closed_form() {
    for eta in [0.0, 0.3, 0.5, 0.8, 1.0] {
        let b = lossy_perfect_correlation(eta).unwrap();
        let ce = conditional_entropy(&b, 0, 0).unwrap();
        assert_abs_diff_eq!(ce, h(eta) + eta * (1.0 - eta), epsilon = 1e-12);
    }
}

#[test]
fn critical_efficiency_against_closed_form() {
    for (n_k, m) in [(1, 2), (2, 3), (3, 2), (4, 10)] {
        let ec = eta_c(n_k, m).unwrap();
        let oracle = bisect(|e| (e - ec) / (1.0 - ec) - h(e) - e * (1.0 - e), ec, 1.0);
        assert_abs_diff_eq!(critical_eta_star(n_k, m).unwrap(), oracle, epsilon = 1e-10);
    }
    let limit = bisect(|e| e * e - h(e), 0.5, 1.0);
    assert_abs_diff_eq!(critical_eta_star(1_000_000, 1_000_001).unwrap(), limit, epsilon = 2e-6);
}

#[test]
fn critical_efficiency_reference_endpoints() {
    assert_abs_diff_eq!(critical_eta_star(1, 2).unwrap(), 0.857, epsilon = 1e-3);
    assert_abs_diff_eq!(critical_eta_star(1_000_000, 1_000_001).unwrap(), 0.822, epsilon = 1e-3);
}

#[test]
fn gps_bound_limits() {
    let top = gps_bound(2.0 * SQRT_2, 0.0).unwrap();
    assert!(!top.clamped);
    assert_abs_diff_eq!(top.value, 0.0, epsilon = 1e-12);
    let local = gps_bound(2.0, 0.0).unwrap();
    assert_abs_diff_eq!(local.value, 1.0, epsilon = 1e-12);
    assert!(gps_bound(1.0, 0.1).unwrap().clamped);
    assert!(gps_bound(2.5, 1.0).is_err());
}

#[test]
fn entropy_helpers() {
    assert_abs_diff_eq!(binary_entropy(0.5), 1.0, epsilon = 1e-15);
    assert_eq!(binary_entropy(0.0), 0.0);
    assert_abs_diff_eq!(shannon(&[0.25; 4]), 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(chi(2.0 * SQRT_2), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(chi(2.0), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(chi(1.0), 1.0, epsilon = 1e-12);
    let u = Behavior::uniform(Scenario::new(1, 1, 3, 2));
    assert_abs_diff_eq!(conditional_entropy(&u, 0, 0).unwrap(), 3f64.log2(), epsilon = 1e-12);
    assert!(conditional_entropy(&u, 1, 0).is_err());
}

#[test]
fn validation_rejects_bad_input() {
    let s = Scenario::new(1, 1, 2, 2);
    assert!(matches!(Behavior::new(s, vec![0.5, 0.5, 0.5, 0.0]), Err(Error::NotNormalized { .. })));
    assert!(Behavior::new(s, vec![1.2, -0.2, 0.0, 0.0]).is_err());
    assert!(Behavior::new(s, vec![0.25; 3]).is_err());
    assert!(Behavior::new(Scenario::new(0, 1, 2, 2), vec![]).is_err());
    let mut bad = s;
    bad.phi_a = Some(2);
    assert!(Behavior::new(bad, vec![0.25; 4]).is_err());
    assert!(matches!(Behavior::uniform(Scenario::new(1, 2, 2, 2)).chsh(&Binning::binary()), Err(Error::ChshUndefined)));
}

#[test]
fn loss_twice_is_refused() {
    let b = lossy_perfect_correlation(0.9).unwrap();
    assert!(matches!(b.apply_local_loss(0.9, 0.9), Err(Error::AlreadyLossy)));
}

#[test]
fn json_and_csv_round_trip() {
    let b = lossy_tsirelson_one_sided(0.9).unwrap();
    assert_eq!(Behavior::from_json(&b.to_json().unwrap()).unwrap(), b);
    let csv = b.to_csv().unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x,y,a,b,p");
    assert_eq!(csv.lines().count(), 1 + b.scenario.len());
    let back = Behavior::from_csv(&csv, Some(2), None).unwrap();
    assert_eq!(back.scenario, b.scenario);
    for (x, y) in back.probs.iter().zip(&b.probs) {
        assert!((x - y).abs() <= 1e-15 * y.abs());
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    std::fs::write(&path, b.to_json().unwrap()).unwrap();
    assert_eq!(Behavior::read(&path).unwrap(), b);
    let strict = b.to_json().unwrap().replacen('{', "{\"extra\": 0,", 1);
    assert!(Behavior::from_json(&strict).is_err());
    let missing = "x,y,a,b,p\n0,0,0,0,1\n0,0,1,1,0\n";
    assert!(Behavior::from_csv(missing, None, None).is_err());
}

/// Random behaviors: a mixture of deterministic points and a noisy singlet.
fn random_behavior() -> impl Strategy<Value = Behavior> {
    (1usize..4, 1usize..4, 2usize..4, 2usize..4)
        .prop_flat_map(|(ma, mb, oa, ob)| {
            let det = (proptest::collection::vec(0..oa, ma), proptest::collection::vec(0..ob, mb), 0.0..1.0f64);
            (Just(Scenario::new(ma, mb, oa, ob)), proptest::collection::vec(det, 1..5), 0.0..1.0f64, -3.2..3.2f64)
        })
        .prop_map(|(s, dets, vis, angle)| {
            let total: f64 = dets.iter().map(|d| d.2).sum::<f64>() + 1.0;
            Behavior::from_fn(s, |a, b, x, y| {
                let mut p: f64 = dets.iter().filter(|d| d.0[x] == a && d.1[y] == b).map(|d| d.2).sum();
                // Singlet on outcomes 0/1 with angle-dependent correlation.
                if a < 2 && b < 2 {
                    let sign = if a == b { 1.0 } else { -1.0 };
                    p += (1.0 + sign * vis * (angle * (x as f64 - y as f64 + 0.5)).cos()) / 4.0;
                }
                p / total
            })
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn transformations_preserve_normalization_and_no_signaling(
        b in random_behavior(), w in 0.0..=1.0f64, ea in 0.0..=1.0f64, eb in 0.0..=1.0f64,
    ) {
        prop_assert!(b.signaling() < 1e-12);
        let noisy = b.white_noise_mix(w).unwrap();
        noisy.validate().unwrap();
        prop_assert!(noisy.signaling() < 1e-12);
        let lossy = b.apply_local_loss(ea, eb).unwrap();
        prop_assert!(lossy.signaling() < 1e-12);
        prop_assert_eq!(lossy.scenario.phi_a, Some(b.scenario.oa));
        let s = b.scenario;
        let sub = b.restrict(&[s.ma - 1], &[0]).unwrap();
        prop_assert_eq!(sub.p(0, 0, 0, 0), b.p(0, 0, s.ma - 1, 0));
        let back = Behavior::from_json(&b.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, b.clone());
    }

    #[test]
    fn conditioning_does_not_raise_entropy(b in random_behavior()) {
        let s = b.scenario;
        for x in 0..s.ma {
            for y in 0..s.mb {
                let ce = conditional_entropy(&b, x, y).unwrap();
                let ma: Vec<f64> = (0..s.oa).map(|a| b.marginal_a(a, x, y)).collect();
                prop_assert!(ce >= 0.0);
                prop_assert!(ce <= shannon(&ma) + 1e-12);
            }
        }
    }

    #[test]
    fn one_sided_loss_scales_chsh(eta in 0.0..=1.0f64) {
        // Folding no-clicks to +1 on one side scales the CHSH value by η.
        let b = tsirelson().apply_local_loss(eta, 1.0).unwrap();
        let fold = Binning { a: vec![1.0, -1.0, 1.0], b: vec![1.0, -1.0, 1.0] };
        prop_assert!((b.chsh(&fold).unwrap() - eta * 2.0 * SQRT_2).abs() < 1e-12);
    }
}
