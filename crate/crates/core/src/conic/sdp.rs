use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::{Sense, SolverStatus, Tolerances};

/// Symmetric matrix given by its upper-triangle entries `(i, j, v)`, `i ≤ j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((i, j, v));
    }

    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        m
    }

    fn expanded(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for &(i, j, v) in &self.entries {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v));
            }
        }
        out
    }
}

/// One equality row `⟨A, X⟩ + a·x + f·u = rhs`.
#[derive(Debug, Clone, Default)]
pub struct SdpConstraint {
    pub psd: Vec<(usize, SparseSym)>,
    pub lp: Vec<(usize, f64)>,
    pub free: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// `min/max ⟨C, X⟩ + c_l·x + c_f·u` over PSD blocks `X`, `x ≥ 0` and free `u`.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub sense: Sense,
    pub psd_blocks: Vec<usize>,
    pub lp_dim: usize,
    pub free_dim: usize,
    pub c_psd: Vec<SparseSym>,
    pub c_lp: Vec<f64>,
    pub c_free: Vec<f64>,
    pub constraints: Vec<SdpConstraint>,
}

impl SdpProblem {
    pub fn new(sense: Sense, psd_blocks: Vec<usize>, lp_dim: usize, free_dim: usize) -> Self {
        let c_psd = psd_blocks.iter().map(|_| SparseSym::new()).collect();
        SdpProblem {
            sense,
            psd_blocks,
            lp_dim,
            free_dim,
            c_psd,
            c_lp: vec![0.0; lp_dim],
            c_free: vec![0.0; free_dim],
            constraints: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolverStatus,
    pub x: Vec<DMatrix<f64>>,
    pub x_lp: Vec<f64>,
    pub u: Vec<f64>,
    /// Multipliers of the equality rows; slack is `S = C − Σ yᵢ Aᵢ` in the minimization form.
    pub y: Vec<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

struct Data {
    n_con: usize,
    blocks: Vec<usize>,
    lp_dim: usize,
    free_dim: usize,
    c: Vec<DMatrix<f64>>,
    c_lp: DVector<f64>,
    c_free: DVector<f64>,
    b: DVector<f64>,
    /// Per block: (constraint, expanded entries).
    by_block: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>,
    lp: Vec<Vec<(usize, f64)>>,
    free: DMatrix<f64>,
    comps: Vec<Vec<usize>>,
    local: Vec<(usize, usize)>,
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut k = i;
    while parent[k] != r {
        let next = parent[k];
        parent[k] = r;
        k = next;
    }
    r
}

impl Data {
    fn new(p: &SdpProblem) -> Self {
        let sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let m = p.constraints.len();
        let c = p
            .psd_blocks
            .iter()
            .zip(&p.c_psd)
            .map(|(&n, s)| s.to_dense(n) * sign)
            .collect();
        let mut by_block = vec![Vec::new(); p.psd_blocks.len()];
        let mut lp = vec![Vec::new(); m];
        let mut free = DMatrix::zeros(m, p.free_dim);
        let mut parent: Vec<usize> = (0..m).collect();
        let mut block_owner: Vec<Option<usize>> = vec![None; p.psd_blocks.len()];
        let mut lp_owner: Vec<Option<usize>> = vec![None; p.lp_dim];
        for (i, con) in p.constraints.iter().enumerate() {
            for (blk, a) in &con.psd {
                by_block[*blk].push((i, a.expanded()));
                match block_owner[*blk] {
                    None => block_owner[*blk] = Some(i),
                    Some(o) => {
                        let (ra, rb) = (find(&mut parent, o), find(&mut parent, i));
                        parent[ra] = rb;
                    }
                }
            }
            for &(k, v) in &con.lp {
                lp[i].push((k, v));
                match lp_owner[k] {
                    None => lp_owner[k] = Some(i),
                    Some(o) => {
                        let (ra, rb) = (find(&mut parent, o), find(&mut parent, i));
                        parent[ra] = rb;
                    }
                }
            }
            for &(f, v) in &con.free {
                free[(i, f)] += v;
            }
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut root_comp = vec![usize::MAX; m];
        let mut local = vec![(0, 0); m];
        for i in 0..m {
            let r = find(&mut parent, i);
            if root_comp[r] == usize::MAX {
                root_comp[r] = comps.len();
                comps.push(Vec::new());
            }
            let ci = root_comp[r];
            local[i] = (ci, comps[ci].len());
            comps[ci].push(i);
        }
        Data {
            n_con: m,
            blocks: p.psd_blocks.clone(),
            lp_dim: p.lp_dim,
            free_dim: p.free_dim,
            c,
            c_lp: DVector::from_iterator(p.lp_dim, p.c_lp.iter().map(|v| v * sign)),
            c_free: DVector::from_iterator(p.free_dim, p.c_free.iter().map(|v| v * sign)),
            b: DVector::from_iterator(m, p.constraints.iter().map(|c| c.rhs)),
            by_block,
            lp,
            free,
            comps,
            local,
        }
    }

    fn a_op(&self, x: &[DMatrix<f64>], xl: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_con);
        for (blk, list) in self.by_block.iter().enumerate() {
            for (i, ent) in list {
                out[*i] += ent.iter().map(|&(p, q, v)| v * x[blk][(p, q)]).sum::<f64>();
            }
        }
        for (i, row) in self.lp.iter().enumerate() {
            out[i] += row.iter().map(|&(k, v)| v * xl[k]).sum::<f64>();
        }
        out
    }

    fn a_adj(&self, y: &DVector<f64>) -> (Vec<DMatrix<f64>>, DVector<f64>) {
        let mut mats: Vec<DMatrix<f64>> = self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (blk, list) in self.by_block.iter().enumerate() {
            for (i, ent) in list {
                for &(p, q, v) in ent {
                    mats[blk][(p, q)] += v * y[*i];
                }
            }
        }
        let mut vl = DVector::zeros(self.lp_dim);
        for (i, row) in self.lp.iter().enumerate() {
            for &(k, v) in row {
                vl[k] += v * y[i];
            }
        }
        (mats, vl)
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn max_step_psd(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let l = Cholesky::new(x.clone())?.l();
    let w = l.solve_lower_triangular(dx)?;
    let w = l.solve_lower_triangular(&w.transpose())?;
    let lmin = SymmetricEigen::new(sym(&w)).eigenvalues.min();
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn max_step_lp(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

const REFINEMENT_STEPS: usize = 2;
const RAY_TOL: f64 = 1e-6;
const STALL_ITERATIONS: usize = 25;
const INACCURATE_FEAS: f64 = 1e-6;
const INACCURATE_RESIDUAL: f64 = 1e-1;

struct Iterate {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    xl: DVector<f64>,
    sl: DVector<f64>,
    y: DVector<f64>,
    u: DVector<f64>,
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
    dxl: DVector<f64>,
    dsl: DVector<f64>,
    dy: DVector<f64>,
    du: DVector<f64>,
}

struct Newton {
    zinv: Vec<DMatrix<f64>>,
    chol: Vec<Cholesky<f64, nalgebra::Dyn>>,
    /// M̃⁻¹B and the factorized border Schur complement.
    minv_b: DMatrix<f64>,
    border: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    rdl: DVector<f64>,
    rf: DVector<f64>,
}

impl Data {
    fn residuals(&self, it: &Iterate) -> Residuals {
        let rp = &self.b - self.a_op(&it.x, &it.xl) - &self.free * &it.u;
        let (aty, atyl) = self.a_adj(&it.y);
        let rd = (0..self.blocks.len()).map(|k| &self.c[k] - &aty[k] - &it.s[k]).collect();
        let rdl = &self.c_lp - atyl - &it.sl;
        let rf = &self.c_free - self.free.transpose() * &it.y;
        Residuals { rp, rd, rdl, rf }
    }

    fn factor(&self, it: &Iterate, tol: &Tolerances) -> Option<Newton> {
        let zinv: Vec<DMatrix<f64>> = it
            .s
            .iter()
            .map(|s| Cholesky::new(s.clone()).map(|c| c.inverse()))
            .collect::<Option<_>>()?;
        let mut mats: Vec<DMatrix<f64>> =
            self.comps.iter().map(|c| DMatrix::zeros(c.len(), c.len())).collect();
        for (blk, list) in self.by_block.iter().enumerate() {
            let n = self.blocks[blk];
            let xs = it.x[blk].as_slice();
            let zs = zinv[blk].as_slice();
            let mut g = vec![0.0; n * n];
            for (j, ent) in list {
                g.iter_mut().for_each(|v| *v = 0.0);
                // g = X A_j Z⁻¹, column-major; X and Z⁻¹ are symmetric.
                for &(p, q, v) in ent {
                    let xcol = &xs[p * n..(p + 1) * n];
                    let zrow = &zs[q * n..(q + 1) * n];
                    for (s, &zq) in zrow.iter().enumerate() {
                        let f = v * zq;
                        if f == 0.0 {
                            continue;
                        }
                        for (gv, &xv) in g[s * n..(s + 1) * n].iter_mut().zip(xcol) {
                            *gv += xv * f;
                        }
                    }
                }
                let (cj, lj) = self.local[*j];
                for (i, ent_i) in list {
                    let (ci, li) = self.local[*i];
                    if ci != cj || li > lj {
                        continue;
                    }
                    let val: f64 = ent_i.iter().map(|&(r, s, v)| v * g[s * n + r]).sum();
                    mats[ci][(li, lj)] += val;
                    if li != lj {
                        mats[ci][(lj, li)] += val;
                    }
                }
            }
        }
        let d: DVector<f64> = it.xl.component_div(&it.sl);
        for (i, row) in self.lp.iter().enumerate() {
            let (ci, li) = self.local[i];
            for (j, row_j) in self.lp.iter().enumerate() {
                let (cj, lj) = self.local[j];
                if ci != cj {
                    continue;
                }
                let mut v = 0.0;
                for &(k, a) in row {
                    for &(k2, a2) in row_j {
                        if k == k2 {
                            v += a * a2 * d[k];
                        }
                    }
                }
                mats[ci][(li, lj)] += v;
            }
        }
        let mut chol = Vec::with_capacity(mats.len());
        for mut m in mats {
            let scale = m.diagonal().iter().fold(1.0f64, |a, b| a.max(b.abs()));
            for i in 0..m.nrows() {
                m[(i, i)] += tol.regularization * scale;
            }
            let m = sym(&m);
            chol.push(Cholesky::new(m)?);
        }
        let mut newton = Newton { zinv, chol, minv_b: DMatrix::zeros(self.n_con, self.free_dim), border: None };
        if self.free_dim > 0 {
            let mb = self.solve_m_many(&newton, &self.free);
            let mut schur = self.free.transpose() * &mb;
            let scale = schur.diagonal().iter().fold(1.0f64, |a, b| a.max(b.abs()));
            for i in 0..self.free_dim {
                schur[(i, i)] += tol.regularization * scale;
            }
            newton.minv_b = mb;
            newton.border = Some(schur.lu());
        }
        Some(newton)
    }

    fn solve_m_many(&self, nw: &Newton, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let k = rhs.ncols();
        let mut out = DMatrix::zeros(self.n_con, k);
        for (ci, comp) in self.comps.iter().enumerate() {
            let r = DMatrix::from_fn(comp.len(), k, |a, b| rhs[(comp[a], b)]);
            let sol = nw.chol[ci].solve(&r);
            for (a, &i) in comp.iter().enumerate() {
                for b in 0..k {
                    out[(i, b)] = sol[(a, b)];
                }
            }
        }
        out
    }

    fn solve_m(&self, nw: &Newton, rhs: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_con);
        for (ci, comp) in self.comps.iter().enumerate() {
            let r = DVector::from_iterator(comp.len(), comp.iter().map(|&i| rhs[i]));
            let sol = nw.chol[ci].solve(&r);
            for (k, &i) in comp.iter().enumerate() {
                out[i] = sol[k];
            }
        }
        out
    }

    /// Newton direction for target `σμ` with optional second-order correction.
    fn direction(
        &self,
        it: &Iterate,
        res: &Residuals,
        nw: &Newton,
        sigma_mu: f64,
        corr: Option<&Direction>,
    ) -> Option<Direction> {
        let nb = self.blocks.len();
        let mut k_mats = Vec::with_capacity(nb);
        for b in 0..nb {
            let n = self.blocks[b];
            let z = &nw.zinv[b];
            let mut target = DMatrix::<f64>::identity(n, n) * sigma_mu;
            if let Some(c) = corr {
                target -= &c.dx[b] * &c.ds[b];
            }
            let k = sym(&(target * z)) - &it.x[b] - sym(&(&it.x[b] * &res.rd[b] * z));
            k_mats.push(k);
        }
        let dl = it.xl.component_div(&it.sl);
        let mut kl = DVector::zeros(self.lp_dim);
        for k in 0..self.lp_dim {
            let mut t = sigma_mu;
            if let Some(c) = corr {
                t -= c.dxl[k] * c.dsl[k];
            }
            kl[k] = t / it.sl[k] - it.xl[k] - dl[k] * res.rdl[k];
        }
        let h = &res.rp - self.a_op(&k_mats, &kl);
        let (mut dy, mut du) = self.solve_kkt(nw, &h, &res.rf)?;
        for _ in 0..REFINEMENT_STEPS {
            let r1 = &h - self.apply_m(it, nw, &dy) - &self.free * &du;
            let r2 = &res.rf - self.free.transpose() * &dy;
            let (cy, cu) = self.solve_kkt(nw, &r1, &r2)?;
            dy += cy;
            du += cu;
        }
        let (aty, atyl) = self.a_adj(&dy);
        let mut dx = Vec::with_capacity(nb);
        let mut ds = Vec::with_capacity(nb);
        for b in 0..nb {
            let dsb = &res.rd[b] - &aty[b];
            let dxb = &k_mats[b] + sym(&(&it.x[b] * &aty[b] * &nw.zinv[b]));
            dx.push(dxb);
            ds.push(dsb);
        }
        let dsl = &res.rdl - atyl;
        let dxl = &kl + dl.component_mul(&(self.lp_t_y(&dy)));
        if dy.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(Direction { dx, ds, dxl, dsl, dy, du })
    }

    /// Solves `M dy + B du = h`, `Bᵀ dy = rf` with the factored blocks.
    fn solve_kkt(&self, nw: &Newton, h: &DVector<f64>, rf: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        if let Some(border) = &nw.border {
            let mh = self.solve_m(nw, h);
            let rhs_u = self.free.transpose() * &mh - rf;
            let du = border.solve(&rhs_u)?;
            let dy = mh - &nw.minv_b * &du;
            Some((dy, du))
        } else {
            Some((self.solve_m(nw, h), DVector::zeros(0)))
        }
    }

    /// Unregularized Schur operator `y ↦ A(X Aᵀ(y) Z⁻¹) + A D Aᵀ y`.
    fn apply_m(&self, it: &Iterate, nw: &Newton, y: &DVector<f64>) -> DVector<f64> {
        let (aty, _) = self.a_adj(y);
        let prod: Vec<DMatrix<f64>> =
            (0..self.blocks.len()).map(|b| &it.x[b] * &aty[b] * &nw.zinv[b]).collect();
        let d: DVector<f64> = it.xl.component_div(&it.sl);
        let xl = d.component_mul(&self.lp_t_y(y));
        self.a_op(&prod, &xl)
    }

    fn lp_t_y(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.lp_dim);
        for (i, row) in self.lp.iter().enumerate() {
            for &(k, v) in row {
                out[k] += v * y[i];
            }
        }
        out
    }

    fn steps(&self, it: &Iterate, d: &Direction) -> Option<(f64, f64)> {
        let mut ap = max_step_lp(&it.xl, &d.dxl);
        let mut ad = max_step_lp(&it.sl, &d.dsl);
        for b in 0..self.blocks.len() {
            ap = ap.min(max_step_psd(&it.x[b], &d.dx[b])?);
            ad = ad.min(max_step_psd(&it.s[b], &d.ds[b])?);
        }
        Some((ap, ad))
    }
}

fn complementarity(it: &Iterate) -> f64 {
    it.x.iter().zip(&it.s).map(|(x, s)| inner(x, s)).sum::<f64>() + it.xl.dot(&it.sl)
}

/// Infeasible primal-dual interior-point method with the HKM direction and
/// Mehrotra predictor-corrector steps.
pub fn solve_sdp(problem: &SdpProblem, tol: &Tolerances) -> SdpSolution {
    let data = Data::new(problem);
    let nb = data.blocks.len();
    let dim: usize = data.blocks.iter().sum::<usize>() + data.lp_dim;
    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    let norm_a: f64 = problem
        .constraints
        .iter()
        .map(|c| {
            let s: f64 = c.psd.iter().flat_map(|(_, a)| a.entries.iter()).map(|e| e.2 * e.2).sum::<f64>()
                + c.lp.iter().map(|e| e.1 * e.1).sum::<f64>();
            s.sqrt()
        })
        .fold(0.0, f64::max);
    let norm_b = data.b.amax();
    let norm_c = data.c.iter().map(|c| c.amax()).fold(data.c_lp.amax().max(data.c_free.amax()), f64::max);
    let nmax = data.blocks.iter().copied().max().unwrap_or(1).max(1) as f64;
    let xi = (10.0f64).max(nmax.sqrt() * (1.0 + norm_b) / (1.0 + norm_a));
    let eta = (10.0f64).max((1.0 + norm_a.max(norm_c)) / nmax.sqrt());

    let mut it = Iterate {
        x: data.blocks.iter().map(|&n| DMatrix::identity(n, n) * xi).collect(),
        s: data.blocks.iter().map(|&n| DMatrix::identity(n, n) * eta).collect(),
        xl: DVector::from_element(data.lp_dim, xi),
        sl: DVector::from_element(data.lp_dim, eta),
        y: DVector::zeros(data.n_con),
        u: DVector::zeros(data.free_dim),
    };

    let objectives = |it: &Iterate| {
        let p = it.x.iter().zip(&data.c).map(|(x, c)| inner(x, c)).sum::<f64>()
            + data.c_lp.dot(&it.xl)
            + data.c_free.dot(&it.u);
        (p, data.b.dot(&it.y))
    };

    let mut status = SolverStatus::IterationLimit;
    let mut iterations = 0;
    let mut best: Option<(f64, Iterate)> = None;
    let mut best_gap: Option<(f64, Iterate)> = None;
    let mut last_progress = 0;
    for k in 0..tol.max_iterations {
        iterations = k;
        let res = data.residuals(&it);
        let (pobj, dobj) = objectives(&it);
        let pinf = res.rp.norm() / (1.0 + norm_b);
        let dinf = (res.rd.iter().map(|m| m.norm_squared()).sum::<f64>()
            + res.rdl.norm_squared()
            + res.rf.norm_squared())
        .sqrt()
            / (1.0 + norm_c);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let merit = gap.max(pinf).max(dinf);
        if best.as_ref().is_none_or(|(m, _)| merit < *m) {
            best = Some((merit, clone_iterate(&it)));
            last_progress = k;
        }
        let mu_now = complementarity(&it);
        let one_sided = pinf.min(dinf) <= INACCURATE_FEAS
            && pinf.max(dinf) <= INACCURATE_RESIDUAL
            && gap <= tol.gap.sqrt();
        if one_sided && best_gap.as_ref().is_none_or(|(m, _)| mu_now < 0.5 * *m) {
            best_gap = Some((mu_now, clone_iterate(&it)));
            last_progress = k;
        }
        if k > last_progress + STALL_ITERATIONS {
            status = SolverStatus::NumericalFailure;
            break;
        }
        if pinf <= tol.feasibility && dinf <= tol.feasibility && gap <= tol.gap {
            status = SolverStatus::Optimal;
            break;
        }
        let xnorm = it.x.iter().map(|m| m.amax()).fold(it.xl.amax().max(it.u.amax()), f64::max);
        // A diverging iterate that stays feasible is a ray certifying the other side empty.
        if xnorm > tol.divergence && pinf * (1.0 + norm_b) <= RAY_TOL * xnorm && pobj < 0.0 {
            status = SolverStatus::DualInfeasible;
            break;
        }
        let ynorm = it.y.amax();
        if ynorm > tol.divergence && dinf * (1.0 + norm_c) <= RAY_TOL * ynorm && dobj > 0.0 {
            status = SolverStatus::PrimalInfeasible;
            break;
        }

        let mu = complementarity(&it) / dim.max(1) as f64;
        let Some(nw) = data.factor(&it, tol) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let Some(pred) = data.direction(&it, &res, &nw, 0.0, None) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let Some((ap, ad)) = data.steps(&it, &pred) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut mu_aff = 0.0;
        for b in 0..nb {
            mu_aff += inner(&(&it.x[b] + &pred.dx[b] * ap), &(&it.s[b] + &pred.ds[b] * ad));
        }
        mu_aff += (&it.xl + &pred.dxl * ap).dot(&(&it.sl + &pred.dsl * ad));
        mu_aff /= dim.max(1) as f64;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };
        let Some(dir) = data.direction(&it, &res, &nw, sigma * mu, Some(&pred)) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let Some((ap, ad)) = data.steps(&it, &dir) else {
            status = SolverStatus::NumericalFailure;
            break;
        };
        let ap = (tol.step_fraction * ap).min(1.0);
        let ad = (tol.step_fraction * ad).min(1.0);
        for b in 0..nb {
            it.x[b] += &dir.dx[b] * ap;
            it.x[b] = sym(&it.x[b]);
            it.s[b] += &dir.ds[b] * ad;
            it.s[b] = sym(&it.s[b]);
        }
        it.xl += &dir.dxl * ap;
        it.u += &dir.du * ap;
        it.sl += &dir.dsl * ad;
        it.y += &dir.dy * ad;
        iterations = k + 1;
    }
    if status == SolverStatus::IterationLimit || status == SolverStatus::NumericalFailure {
        if let Some((m, b)) = best {
            if m <= 1e3 * tol.gap.max(tol.feasibility) {
                it = b;
                status = SolverStatus::Optimal;
            }
        }
    }
    if status == SolverStatus::IterationLimit || status == SolverStatus::NumericalFailure {
        if let Some((_, b)) = best_gap {
            it = b;
            status = SolverStatus::Inaccurate;
        }
    }
    let res = data.residuals(&it);
    let pinf = res.rp.norm() / (1.0 + norm_b);
    let dinf = (res.rd.iter().map(|m| m.norm_squared()).sum::<f64>() + res.rdl.norm_squared() + res.rf.norm_squared())
        .sqrt()
        / (1.0 + norm_c);
    let (pobj, dobj) = objectives(&it);
    let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
    SdpSolution {
        status,
        x: it.x,
        x_lp: it.xl.iter().copied().collect(),
        u: it.u.iter().copied().collect(),
        y: it.y.iter().copied().collect(),
        s: it.s,
        primal_objective: sign * pobj,
        dual_objective: sign * dobj,
        iterations,
        gap,
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
    }
}

fn clone_iterate(it: &Iterate) -> Iterate {
    Iterate {
        x: it.x.clone(),
        s: it.s.clone(),
        xl: it.xl.clone(),
        sl: it.sl.clone(),
        y: it.y.clone(),
        u: it.u.clone(),
    }
}
