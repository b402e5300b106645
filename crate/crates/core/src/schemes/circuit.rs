use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{SchemeConfig, SchemeKind};
use crate::behavior::{Behavior, Scenario};
use crate::error::{Error, Result};
use crate::photonics::{
    apply_loss, apply_mode_map, click_probabilities, lossy_threshold_detect, psi_n, sp_state, spdc_state_on,
    FockKet, ModeLabel, ModeMap, ModeRegister, Occupation, Pol, Site, StateMixture,
};

const A_H: ModeLabel = ModeLabel::new(Site::A, Pol::H);
const A_V: ModeLabel = ModeLabel::new(Site::A, Pol::V);
const AP_H: ModeLabel = ModeLabel::new(Site::APrime, Pol::H);
const AP_V: ModeLabel = ModeLabel::new(Site::APrime, Pol::V);
const B_H: ModeLabel = ModeLabel::new(Site::B, Pol::H);
const B_V: ModeLabel = ModeLabel::new(Site::B, Pol::V);
const BP_H: ModeLabel = ModeLabel::new(Site::BPrime, Pol::H);
const BP_V: ModeLabel = ModeLabel::new(Site::BPrime, Pol::V);

/// Modes left with the users after heralding.
pub const KEPT_MODES: [ModeLabel; 4] = [A_H, A_V, B_H, B_V];

/// Heralding detectors (c_H, c_V, d_H, d_V); c and d reuse the A' and B' slots.
const HERALD_MODES: [ModeLabel; 4] = [AP_H, AP_V, BP_H, BP_V];
const HERALD_PATTERN: [bool; 4] = [false, true, true, false];

const WORK_CUTOFF: u32 = 16;

/// HWP angles in front of the partial BSM on the A' and B' arms, and a
/// phase flip on Alice's kept V mode.
#[derive(Debug, Clone, Copy)]
struct CentralOptics {
    hwp_a: f64,
    hwp_b: f64,
    flip_a: bool,
}

// Plates at π/8 turn H/V into diagonal polarizations, so two photons from
// one arm bunch into equal polarizations and never fire the herald.
fn optics_for(kind: SchemeKind) -> CentralOptics {
    match kind {
        SchemeKind::Sh => CentralOptics { hwp_a: PI / 8.0, hwp_b: PI / 8.0, flip_a: true },
        SchemeKind::Ch => CentralOptics { hwp_a: PI / 8.0, hwp_b: PI / 8.0, flip_a: false },
    }
}

fn vacuum(modes: &[ModeLabel]) -> Result<StateMixture> {
    let reg = Arc::new(ModeRegister::with_default_cutoff(modes.to_vec())?);
    Ok(StateMixture::pure(FockKet::vacuum(reg)))
}

fn tensor_all(parts: &[StateMixture], max_order: u32) -> Result<StateMixture> {
    let mut acc = parts[0].with_cutoff(WORK_CUTOFF)?;
    for p in &parts[1..] {
        acc = acc.tensor(p, Some(max_order))?;
    }
    Ok(acc)
}

/// SPDC pair on (A, A') with two single-photon sources on Bob's H and V modes.
pub fn build_sh_initial(cfg: &SchemeConfig) -> Result<StateMixture> {
    let n = cfg.truncation;
    let spdc = spdc_state_on([A_H, A_V, AP_H, AP_V], cfg.pbar, n)?;
    tensor_all(&[spdc, sp_state(B_H, cfg.p, n + 1)?, sp_state(B_V, cfg.p, n + 1)?, vacuum(&[BP_H, BP_V])?], n)
}

/// Four single-photon sources on A_H, A_V, B_H, B_V.
pub fn build_ch_initial(cfg: &SchemeConfig) -> Result<StateMixture> {
    let n = cfg.truncation;
    tensor_all(
        &[
            sp_state(A_H, cfg.p, n + 1)?,
            sp_state(A_V, cfg.p, n + 1)?,
            vacuum(&[AP_H, AP_V])?,
            sp_state(B_H, cfg.p, n + 1)?,
            sp_state(B_V, cfg.p, n + 1)?,
            vacuum(&[BP_H, BP_V])?,
        ],
        n,
    )
}

fn map(s: StateMixture, m: ModeMap) -> Result<StateMixture> {
    apply_mode_map(&s, &m)
}

fn run_circuit(
    cfg: &SchemeConfig,
    initial: StateMixture,
    optics: CentralOptics,
    herald_only: bool,
) -> Result<(f64, StateMixture)> {
    let tr = cfg.transmittance;
    let mut s = initial;
    // Users' modes are traced out early when only the herald rate matters.
    let trace_kept = |mut s: StateMixture| -> Result<StateMixture> {
        if herald_only {
            for m in KEPT_MODES {
                s = apply_loss(&s, m, 0.0)?;
            }
            s = s.merged_diagonal();
        }
        Ok(s)
    };
    match cfg.scheme {
        SchemeKind::Sh => {
            s = map(s, ModeMap::beamsplitter(B_H, BP_H, tr)?)?;
            s = map(s, ModeMap::beamsplitter(B_V, BP_V, tr)?)?;
            s = trace_kept(s)?;
            for m in [AP_H, AP_V] {
                s = apply_loss(&s, m, cfg.effective_eta_t())?;
            }
        }
        SchemeKind::Ch => {
            // Transmitted light travels to the central station.
            for (k, c) in [(A_H, AP_H), (A_V, AP_V), (B_H, BP_H), (B_V, BP_V)] {
                s = map(s, ModeMap::beamsplitter(k, c, 1.0 - tr)?)?;
            }
            s = trace_kept(s)?;
            let arm = cfg.effective_eta_t().sqrt();
            for m in HERALD_MODES {
                s = apply_loss(&s, m, arm)?;
            }
            if herald_only {
                s = s.merged_diagonal();
            }
        }
    }
    s = map(s, ModeMap::half_wave_plate(AP_H, AP_V, optics.hwp_a)?)?;
    s = map(s, ModeMap::half_wave_plate(BP_H, BP_V, optics.hwp_b)?)?;
    let tau = (1.0 + cfg.t) / 2.0;
    s = map(s, ModeMap::beamsplitter(AP_H, BP_H, tau)?)?;
    s = map(s, ModeMap::beamsplitter(AP_V, BP_V, tau)?)?;
    let etas = [cfg.eta_h; 4];
    let (w, mut kept) = lossy_threshold_detect(&s, &HERALD_MODES, &etas, &HERALD_PATTERN)?;
    if optics.flip_a {
        kept = map(kept, ModeMap::phase(A_V, PI)?)?;
    }
    Ok((w, kept))
}

/// Unnormalized state on `KEPT_MODES` conditioned on the herald, with its weight.
#[derive(Debug, Clone)]
pub struct HeraldedState {
    pub p_herald: f64,
    pub state: StateMixture,
}

pub fn herald(cfg: &SchemeConfig) -> Result<HeraldedState> {
    cfg.validate()?;
    let initial = match cfg.scheme {
        SchemeKind::Sh => build_sh_initial(cfg)?,
        SchemeKind::Ch => build_ch_initial(cfg)?,
    };
    let (p_herald, state) = run_circuit(cfg, initial, optics_for(cfg.scheme), false)?;
    Ok(HeraldedState { p_herald, state })
}

pub fn herald_sh(cfg: &SchemeConfig) -> Result<HeraldedState> {
    if cfg.scheme != SchemeKind::Sh {
        return Err(Error::Invalid("expected an SH configuration".into()));
    }
    herald(cfg)
}

pub fn herald_ch(cfg: &SchemeConfig) -> Result<HeraldedState> {
    if cfg.scheme != SchemeKind::Ch {
        return Err(Error::Invalid("expected a CH configuration".into()));
    }
    herald(cfg)
}

/// Herald probability for definite source photon numbers: `[pairs, k_H, k_V]`
/// for SH, `[k_AH, k_AV, k_BH, k_BV]` for CH.
pub fn herald_probability_of_counts(cfg: &SchemeConfig, counts: &[u32]) -> Result<f64> {
    let fock = |m: ModeLabel, n: u32| -> Result<StateMixture> {
        let reg = Arc::new(ModeRegister::new(vec![m], WORK_CUTOFF)?);
        Ok(StateMixture::pure(FockKet::basis(reg, vec![n as u8])?))
    };
    let initial = match (cfg.scheme, counts) {
        (SchemeKind::Sh, &[n, kh, kv]) => {
            let reg = Arc::new(ModeRegister::new(vec![A_H, A_V, AP_H, AP_V], WORK_CUTOFF)?);
            let pair = StateMixture::pure(psi_n(reg, n)?);
            tensor_all(&[pair, fock(B_H, kh)?, fock(B_V, kv)?, vacuum(&[BP_H, BP_V])?], u32::MAX)?
        }
        (SchemeKind::Ch, &[ah, av, bh, bv]) => tensor_all(
            &[fock(A_H, ah)?, fock(A_V, av)?, vacuum(&[AP_H, AP_V])?, fock(B_H, bh)?, fock(B_V, bv)?, vacuum(&[BP_H, BP_V])?],
            u32::MAX,
        )?,
        _ => return Err(Error::Invalid("photon-number vector has the wrong length".into())),
    };
    Ok(run_circuit(cfg, initial, optics_for(cfg.scheme), true)?.0)
}

/// Occupations of |HH⟩, |HV⟩, |VH⟩, |VV⟩ on `KEPT_MODES`.
pub fn qubit_basis() -> [Occupation; 4] {
    [vec![1, 0, 1, 0], vec![1, 0, 0, 1], vec![0, 1, 1, 0], vec![0, 1, 0, 1]]
}

/// Normalized `(|ψ⁻⟩ + t|φ⁻⟩)/√(1+t²)` in the `qubit_basis` order.
pub fn target_state(t: f64) -> [f64; 4] {
    let n = (2.0 * (1.0 + t * t)).sqrt();
    [t / n, 1.0 / n, -1.0 / n, -t / n]
}

fn order_of_interest(kind: SchemeKind) -> (u32, u32) {
    match kind {
        SchemeKind::Sh => (0, 1),
        SchemeKind::Ch => (0, 0),
    }
}

/// Leading perturbative component of a heralded state: its weight and the
/// normalized two-qubit density matrix.
pub fn leading_component(kind: SchemeKind, h: &HeraldedState) -> (f64, DMatrix<Complex64>) {
    let comp = h.state.component(order_of_interest(kind));
    let w = comp.trace();
    let rho = comp.density_matrix(&qubit_basis());
    let tr: f64 = (0..4).map(|i| rho[(i, i)].re).sum();
    let rho = if tr > 0.0 { rho / Complex64::new(tr, 0.0) } else { rho };
    (w, rho)
}

/// Closed-form leading coefficient (before multiplying by p̄ for SH) and target state.
pub fn leading_order_state(kind: SchemeKind, cfg: &SchemeConfig) -> (f64, DMatrix<Complex64>) {
    let tr = cfg.transmittance;
    let eta = cfg.effective_eta_t();
    let coeff = match kind {
        SchemeKind::Sh => eta * tr * (1.0 - tr) / 8.0,
        SchemeKind::Ch => eta * tr * tr * (1.0 - tr) * (1.0 - tr) / 4.0,
    };
    let v = target_state(cfg.t);
    let rho = DMatrix::from_fn(4, 4, |i, j| Complex64::new(v[i] * v[j], 0.0));
    (coeff, rho)
}

#[derive(Debug, Clone)]
pub struct HeraldedResult {
    pub p_herald: f64,
    pub behavior: Behavior,
    pub leading_coeff: f64,
    pub leading_state: DMatrix<Complex64>,
}

fn analyzer(s: StateMixture, h: ModeLabel, v: ModeLabel, set: &super::MeasurementSetting) -> Result<StateMixture> {
    let s = map(s, ModeMap::quarter_wave_plate(h, v, set.phi)?)?;
    map(s, ModeMap::half_wave_plate(h, v, set.theta)?)
}

/// Joint click-pattern statistics of both analyzers; outcome `2·c_H + c_V`.
pub fn behavior(cfg: &SchemeConfig) -> Result<HeraldedResult> {
    let h = herald(cfg)?;
    behavior_from_herald(cfg, &h)
}

pub(crate) fn behavior_from_herald(cfg: &SchemeConfig, h: &HeraldedState) -> Result<HeraldedResult> {
    if h.p_herald <= 0.0 {
        return Err(Error::Invalid("heralding probability vanishes".into()));
    }
    let (ma, mb) = (cfg.settings_a.len(), cfg.settings_b.len());
    let mut sc = Scenario::new(ma, mb, 4, 4);
    sc.phi_a = Some(0);
    sc.phi_b = Some(0);
    let mut probs = vec![0.0; sc.len()];
    let mut alice = Vec::with_capacity(ma);
    for sa in &cfg.settings_a {
        alice.push(analyzer(h.state.clone(), A_H, A_V, sa)?);
    }
    for (x, sa_state) in alice.iter().enumerate() {
        for (y, sb) in cfg.settings_b.iter().enumerate() {
            let s = analyzer(sa_state.clone(), B_H, B_V, sb)?;
            let clicks = click_probabilities(&s, &KEPT_MODES, &[cfg.eta_d; 4])?;
            let total: f64 = clicks.iter().sum();
            for (k, c) in clicks.iter().enumerate() {
                probs[sc.index(k / 4, k % 4, x, y)] = c / total;
            }
        }
    }
    let behavior = Behavior::new(sc, probs)?;
    let (leading_coeff, leading_state) = leading_component(cfg.scheme, h);
    Ok(HeraldedResult { p_herald: h.p_herald, behavior, leading_coeff, leading_state })
}

/// Behavior of the normalized leading two-qubit state alone, with the
/// configured analyzers and detector efficiency.
pub fn leading_behavior(cfg: &SchemeConfig) -> Result<Behavior> {
    let h = herald(cfg)?;
    let (w, rho) = leading_component(cfg.scheme, &h);
    if w <= 0.0 {
        return Err(Error::Invalid("leading component vanishes".into()));
    }
    let reg = Arc::new(ModeRegister::new(KEPT_MODES.to_vec(), WORK_CUTOFF)?);
    let eig = rho.symmetric_eigen();
    let mut state = StateMixture::new(reg.clone());
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let col = eig.eigenvectors.column(k);
        let terms = qubit_basis().into_iter().zip(col.iter().copied());
        state.push(lambda, (0, 0), FockKet::from_terms(reg.clone(), terms)?);
    }
    Ok(behavior_from_herald(cfg, &HeraldedState { p_herald: w, state })?.behavior)
}

pub fn behavior_sh(cfg: &SchemeConfig) -> Result<HeraldedResult> {
    herald_sh(cfg).and_then(|h| behavior_from_herald(cfg, &h))
}

pub fn behavior_ch(cfg: &SchemeConfig) -> Result<HeraldedResult> {
    herald_ch(cfg).and_then(|h| behavior_from_herald(cfg, &h))
}
