use std::f64::consts::SQRT_2;

use serde::Serialize;

use diqkd::behavior::{
    appendix_c_attack, combined_attack_hae, conditional_entropy, critical_eta_star, lossy_perfect_correlation,
    lossy_tsirelson_one_sided, Binning,
};
use diqkd::certify::{local_membership, Level};
use diqkd::keyrate::{
    critical_local_efficiency, distance_sweep, maximize, maximize_key, sweep_to_csv, transmission, Budget,
    CriticalEfficiency, Criterion, FixedParams, Objective, Search, SweepRow, L_ATT_KM,
};
use diqkd::schemes::{amplifier_reference, SchemeKind};

use crate::{CliError, CliResult, Outcome, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Table1,
    Fig1,
    Fig3,
    AppendixC,
    Amplifier,
}

impl std::str::FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table1" => Ok(Target::Table1),
            "fig1" => Ok(Target::Fig1),
            "fig3" => Ok(Target::Fig3),
            "appendixC" | "appendixc" => Ok(Target::AppendixC),
            "amplifier" => Ok(Target::Amplifier),
            other => Err(format!("unknown target {other}")),
        }
    }
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::Fig1 => "fig1",
            Target::Fig3 => "fig3",
            Target::AppendixC => "appendixC",
            Target::Amplifier => "amplifier",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub budget: Budget,
    pub level: Level,
}

impl Default for Options {
    fn default() -> Self {
        Options { budget: Budget::default(), level: Level::OnePlusAB }
    }
}

pub fn run(target: Target, opts: &Options) -> CliResult<Outcome> {
    match target {
        Target::Table1 => table1(opts),
        Target::Fig1 => fig1(),
        Target::Fig3 => fig3(opts, &FIG3_GRID),
        Target::AppendixC => appendix_c(),
        Target::Amplifier => amplifier(),
    }
}

fn json<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Io(std::io::Error::other(e)))
}

pub fn appendix_c() -> CliResult<Outcome> {
    let t = "appendixC";
    let (eta, attack) = appendix_c_attack();
    let target = lossy_tsirelson_one_sided(eta)?;
    let mix = attack.mixture()?;
    let residual = mix.probs.iter().zip(&target.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let (p1_local, p1_w) = local_membership(&attack.components[0].behavior)?;
    let mut rows = vec![
        Row::within(t, "eta", eta, (11.0 + SQRT_2) / 17.0, 1e-15),
        Row::check(t, "reconstruction residual", residual, "0", "<1e-12", residual < 1e-12),
        Row::check(t, "p1 white-noise weight", p1_w, "local", "w* <= 1e-9", p1_local),
    ];
    // No-click folded into the outcome the component never produces.
    for (k, fold) in [(1, -1.0), (2, 1.0)] {
        let binning = Binning { a: vec![1.0, -1.0, fold], b: vec![1.0, -1.0] };
        let s = attack.components[k].behavior.chsh(&binning)?;
        rows.push(Row::within(t, &format!("p{} conclusive CHSH", k + 1), s, 2.0 * SQRT_2, 1e-9));
    }
    let summary = serde_json::json!({
        "eta": eta,
        "residual": residual,
        "weights": attack.components.iter().map(|c| c.weight).collect::<Vec<_>>(),
        "p1_w": p1_w,
    });
    Ok(Outcome { rows, files: vec![("appendixC.json".into(), json(&summary)?)] })
}

/// `n_k` used for the large-alphabet limit.
pub const FIG1_LIMIT_NK: u32 = 1_000_000;

pub fn fig1() -> CliResult<Outcome> {
    let t = "fig1";
    let mut data = String::from("n_k,m,eta_star\n");
    for n_k in 1..=10u32 {
        let m = n_k + 1;
        data.push_str(&format!("{n_k},{m},{}\n", critical_eta_star(n_k, m)?));
    }
    let first = critical_eta_star(1, 2)?;
    let limit = critical_eta_star(FIG1_LIMIT_NK, FIG1_LIMIT_NK + 1)?;
    let mut inset = String::from("eta,H_AE,H_AB\n");
    for i in 0..=100 {
        let eta = 0.5 + 0.005 * i as f64;
        let hae = combined_attack_hae(eta, 1, 2)?;
        let hab = conditional_entropy(&lossy_perfect_correlation(eta)?, 0, 0)?;
        inset.push_str(&format!("{eta},{hae},{hab}\n"));
    }
    let rows = vec![
        Row::within(t, "eta* (n_k = 1)", first, 0.857, 1e-3),
        Row::within(t, "eta* (large n_k)", limit, 0.822, 1e-3),
    ];
    let script = "set datafile separator ','\n\
        set xlabel 'n_k'\nset ylabel 'critical local efficiency'\n\
        plot 'fig1.csv' using 1:3 skip 1 with linespoints title 'eta*'\n\
        pause -1\n\
        set xlabel 'eta'\nset ylabel 'bits'\n\
        plot 'fig1_inset.csv' using 1:2 skip 1 with lines title 'H(A|E)', \
        '' using 1:3 skip 1 with lines title 'H(A|B)'\n";
    Ok(Outcome {
        rows,
        files: vec![
            ("fig1.csv".into(), data),
            ("fig1_inset.csv".into(), inset),
            ("fig1.gp".into(), script.into()),
        ],
    })
}

pub const AMP_PBAR: f64 = 1e-2;
pub const AMP_T: f64 = 1.0 - 1e-2;

/// Distance where the amplifier estimate changes sign.
pub fn amplifier_zero_crossing() -> CliResult<f64> {
    let r = |l: f64| -> CliResult<f64> { Ok(amplifier_reference(AMP_PBAR, AMP_T, transmission(l))?.r_estimate) };
    let (mut lo, mut hi) = (0.0, 20.0 * L_ATT_KM);
    if r(lo)? <= 0.0 || r(hi)? > 0.0 {
        return Err(CliError::Numerical(diqkd::Error::Invalid("amplifier estimate has no zero crossing".into())));
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if r(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn amplifier() -> CliResult<Outcome> {
    let t = "amplifier";
    let l0 = amplifier_zero_crossing()?;
    let ratio = l0 / L_ATT_KM;
    let big = amplifier_reference(1e9, AMP_T, 1.0)?.chsh_upper;
    let mut data = String::from("L_km,eta_t,chsh_upper,r_estimate\n");
    for i in 0..=60 {
        let l = 2.0 * i as f64;
        let a = amplifier_reference(AMP_PBAR, AMP_T, transmission(l))?;
        data.push_str(&format!("{l},{},{},{}\n", transmission(l), a.chsh_upper, a.r_estimate));
    }
    let rows = vec![
        Row::check(t, "zero crossing / L_att", ratio, "~1", "[0.5, 2]", (0.5..=2.0).contains(&ratio)),
        Row::within(t, "CHSH upper at large lambda*eta_t*pbar", big, 2.0 * SQRT_2, 1e-6),
    ];
    let script = "set datafile separator ','\nset xlabel 'L (km)'\nset ylabel 'r'\n\
        plot 'amplifier.csv' using 1:4 skip 1 with lines title 'amplifier estimate', 0 notitle\n";
    Ok(Outcome {
        rows,
        files: vec![("amplifier.csv".into(), data), ("amplifier.gp".into(), script.into())],
    })
}

/// Searches behind each table1 entry.
pub struct Table1Plan {
    pub diqkd_bracket: (f64, f64),
    pub nonlocal_bracket: (f64, f64),
    pub step: f64,
    pub resolution: f64,
}

pub const TABLE1_PLAN: Table1Plan =
    Table1Plan { diqkd_bracket: (0.90, 0.99), nonlocal_bracket: (0.60, 0.90), step: 0.01, resolution: 1e-3 };

pub fn table1_threshold(kind: SchemeKind, criterion: Criterion, opts: &Options) -> CliResult<CriticalEfficiency> {
    let p = &TABLE1_PLAN;
    let bracket = match criterion {
        Criterion::Diqkd => p.diqkd_bracket,
        Criterion::Nonlocality => p.nonlocal_bracket,
    };
    Ok(critical_local_efficiency(kind, criterion, bracket, p.step, p.resolution, opts.level, &opts.budget)?)
}

/// Noise robustness: best white-noise weight at unit efficiency.
pub fn table1_noise(kind: SchemeKind, opts: &Options) -> CliResult<f64> {
    let mut search = Search::new(FixedParams::new(kind, 1.0, 1.0), Objective::Nonlocality);
    search.level = opts.level;
    Ok(maximize(&search, &opts.budget, None)?.1.best_value)
}

/// Key per heralded round at unit efficiencies.
pub fn table1_key_fraction(kind: SchemeKind, opts: &Options) -> CliResult<f64> {
    let mut search = Search::new(FixedParams::new(kind, 1.0, 1.0), Objective::Rate);
    search.level = opts.level;
    Ok(maximize_key(&search, &opts.budget, None)?.r_down)
}

pub const TABLE1_PAPER: [(SchemeKind, f64, f64, f64, f64); 2] =
    [(SchemeKind::Ch, 0.943, 0.692, 0.357, 0.95), (SchemeKind::Sh, 0.949, 0.743, 0.312, 0.82)];

pub fn table1(opts: &Options) -> CliResult<Outcome> {
    let t = "table1";
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for (kind, diqkd, nonloc, noise, key) in TABLE1_PAPER {
        let d = table1_threshold(kind, Criterion::Diqkd, opts)?;
        let n = table1_threshold(kind, Criterion::Nonlocality, opts)?;
        let w = table1_noise(kind, opts)?;
        let r = table1_key_fraction(kind, opts)?;
        rows.push(Row::within(t, &format!("{kind} critical eta_l (diqkd)"), d.eta, diqkd, 5e-3));
        rows.push(Row::within(t, &format!("{kind} critical eta_l (nonlocality)"), n.eta, nonloc, 5e-3));
        rows.push(Row::within(t, &format!("{kind} noise robustness"), w, noise, 5e-3));
        rows.push(Row::within(t, &format!("{kind} key per heralded round"), r, key, 2e-2));
        details.push(serde_json::json!({ "scheme": kind, "diqkd": d, "nonlocality": n }));
    }
    Ok(Outcome { rows, files: vec![("table1_searches.json".into(), json(&details)?)] })
}

pub const FIG3_GRID: [f64; 11] = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0];
pub const FIG3_ETA_L: f64 = 0.95;

/// Distance where `K` falls through `level`, interpolating log K linearly.
pub fn crossing(rows: &[SweepRow], level: f64) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.k_bits_per_s >= level && b.k_bits_per_s < level {
            if b.k_bits_per_s <= 0.0 {
                return Some(b.l_km);
            }
            let (la, lb) = (a.k_bits_per_s.ln(), b.k_bits_per_s.ln());
            Some(a.l_km + (level.ln() - la) / (lb - la) * (b.l_km - a.l_km))
        } else {
            None
        }
    })
}

pub fn fig3_sweep(kind: SchemeKind, opts: &Options, grid: &[f64]) -> CliResult<Vec<SweepRow>> {
    let mut fixed = FixedParams::new(kind, FIG3_ETA_L, 1.0);
    fixed.free_pbar = true;
    let mut search = Search::new(fixed, Objective::KeyRate);
    search.level = opts.level;
    Ok(distance_sweep(&search, grid, &opts.budget)?.into_iter().map(|(r, _)| r).collect())
}

pub fn fig3(opts: &Options, grid: &[f64]) -> CliResult<Outcome> {
    let t = "fig3";
    let ch = fig3_sweep(SchemeKind::Ch, opts, grid)?;
    let sh = fig3_sweep(SchemeKind::Sh, opts, grid)?;
    let cross = crossing(&ch, 1.0);
    let monotone = |rows: &[SweepRow]| rows.windows(2).all(|w| w[1].k_bits_per_s <= w[0].k_bits_per_s * (1.0 + 1e-9));
    let below = ch.iter().zip(&sh).all(|(c, s)| s.k_bits_per_s < c.k_bits_per_s || c.k_bits_per_s == 0.0);
    let rows = vec![
        Row::check(
            t,
            "CH distance at K = 1 bit/s (km)",
            cross.unwrap_or(f64::NAN),
            "~50",
            "[40, 60]",
            cross.is_some_and(|l| (40.0..=60.0).contains(&l)),
        ),
        Row::check(t, "SH below CH at every L", f64::from(u8::from(below)), "true", "all L", below),
        Row::check(t, "CH nonincreasing in L", f64::from(u8::from(monotone(&ch))), "true", "all L", monotone(&ch)),
        Row::check(t, "SH nonincreasing in L", f64::from(u8::from(monotone(&sh))), "true", "all L", monotone(&sh)),
    ];
    let script = "set datafile separator ','\nset logscale y\nset xlabel 'L (km)'\nset ylabel 'K (bits/s)'\n\
        plot 'fig3_CH.csv' using 1:7 skip 1 with lines title 'CH', \
        'fig3_SH.csv' using 1:7 skip 1 with lines dashtype 2 title 'SH'\n";
    Ok(Outcome {
        rows,
        files: vec![
            ("fig3_CH.csv".into(), sweep_to_csv(&ch)?),
            ("fig3_SH.csv".into(), sweep_to_csv(&sh)?),
            ("fig3.gp".into(), script.into()),
        ],
    })
}
