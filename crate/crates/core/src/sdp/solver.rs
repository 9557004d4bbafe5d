//! Infeasible-start primal-dual interior-point method over a product of real
//! symmetric PSD cones, Nesterov-Todd scaling, Mehrotra predictor-corrector.
//!
//! Internally the problem is the minimization
//! `min ⟨C, X⟩  s.t. ⟨A_k, X⟩ = b_k, X ⪰ 0` with dual
//! `max bᵀy  s.t. Σ y_k A_k + S = C, S ⪰ 0`.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use super::{SolveOptions, SolverStatus};

/// Symmetric sparse matrix restricted to one block, both triangles stored.
#[derive(Debug, Clone)]
pub(crate) struct Part {
    pub block: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone)]
pub(crate) struct RealConstraint {
    pub parts: Vec<Part>,
}

impl RealConstraint {
    fn dot(&self, x: &[DMatrix<f64>]) -> f64 {
        self.parts
            .iter()
            .map(|p| p.entries.iter().map(|&(r, c, v)| v * x[p.block][(r, c)]).sum::<f64>())
            .sum()
    }

    fn add_to(&self, alpha: f64, out: &mut [DMatrix<f64>]) {
        for p in &self.parts {
            let m = &mut out[p.block];
            for &(r, c, v) in &p.entries {
                m[(r, c)] += alpha * v;
            }
        }
    }

    fn frobenius_sq(&self) -> f64 {
        self.parts.iter().flat_map(|p| p.entries.iter()).map(|e| e.2 * e.2).sum()
    }

    /// Entries keyed by a global index, sorted, for merge-based inner products.
    fn keyed(&self, offsets: &[usize], stride: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = self
            .parts
            .iter()
            .flat_map(|p| p.entries.iter().map(move |&(r, c, v)| (offsets[p.block] + r * stride + c, v)))
            .collect();
        out.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(out.len());
        for (k, v) in out {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += v,
                _ => merged.push((k, v)),
            }
        }
        merged
    }
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

#[derive(Debug, Clone)]
pub(crate) struct RealProblem {
    pub blocks: Vec<usize>,
    /// Cost of the minimization form.
    pub cost: Vec<DMatrix<f64>>,
    pub constraints: Vec<RealConstraint>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct RealOutcome {
    pub x: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub status: SolverStatus,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

/// Indices of a maximal linearly independent subset of the constraints, or
/// `None` when a dependent row has an inconsistent right-hand side.
fn independent_rows(p: &RealProblem) -> Option<Vec<usize>> {
    let m = p.constraints.len();
    let stride = p.blocks.iter().copied().max().unwrap_or(0);
    let mut offsets = Vec::with_capacity(p.blocks.len());
    let mut acc = 0;
    for &n in &p.blocks {
        offsets.push(acc);
        acc += n * stride;
    }
    let keyed: Vec<_> = p.constraints.iter().map(|c| c.keyed(&offsets, stride)).collect();
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let g = sparse_dot(&keyed[i], &keyed[j]);
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }

    // pivoted Cholesky
    let scale = (0..m).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let mut work = gram.clone();
    let mut l = DMatrix::<f64>::zeros(m, m);
    let mut remaining: Vec<usize> = (0..m).collect();
    let mut pivots = Vec::new();
    while !remaining.is_empty() {
        let (pos, &piv) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| work[(*a.1, *a.1)].total_cmp(&work[(*b.1, *b.1)]))
            .expect("nonempty");
        let d = work[(piv, piv)];
        if d <= 1e-10 * scale.max(1e-300) {
            break;
        }
        remaining.swap_remove(pos);
        let k = pivots.len();
        let root = d.sqrt();
        for &r in &remaining {
            l[(r, k)] = work[(r, piv)] / root;
        }
        for &r in &remaining {
            for &c in &remaining {
                work[(r, c)] -= l[(r, k)] * l[(c, k)];
            }
        }
        pivots.push(piv);
    }
    pivots.sort_unstable();
    if pivots.len() < m {
        let kept = DMatrix::from_fn(pivots.len(), pivots.len(), |i, j| gram[(pivots[i], pivots[j])]);
        let chol = Cholesky::new(kept)?;
        let b_kept = nalgebra::DVector::from_iterator(pivots.len(), pivots.iter().map(|&i| p.rhs[i]));
        for r in 0..m {
            if pivots.binary_search(&r).is_ok() {
                continue;
            }
            let g = nalgebra::DVector::from_iterator(pivots.len(), pivots.iter().map(|&i| gram[(i, r)]));
            let coef = chol.solve(&g);
            let predicted = coef.dot(&b_kept);
            if (predicted - p.rhs[r]).abs() > 1e-8 * (1.0 + p.rhs[r].abs()) {
                return None;
            }
        }
    }
    Some(pivots)
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

struct Scaling {
    g: DMatrix<f64>,
    w: DMatrix<f64>,
    d: Vec<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Scaling> {
    let l = Cholesky::new(x.clone())?.l();
    let mut t = l.transpose() * s * &l;
    symmetrize(&mut t);
    let eig = SymmetricEigen::new(t);
    let d: Vec<f64> = eig.eigenvalues.iter().map(|&w| w.max(1e-300).sqrt()).collect();
    let mut g = l * eig.eigenvectors;
    for (j, &dj) in d.iter().enumerate() {
        let f = 1.0 / dj.sqrt();
        g.column_mut(j).scale_mut(f);
    }
    let mut w = &g * g.transpose();
    symmetrize(&mut w);
    Some(Scaling { g, w, d })
}

/// Largest `α` with `D + α Δ ⪰ 0`, capped at `f64::INFINITY`.
fn max_step(d: &[f64], delta: &DMatrix<f64>) -> f64 {
    let n = d.len();
    let mut m = DMatrix::from_fn(n, n, |i, j| delta[(i, j)] / (d[i] * d[j]).sqrt());
    symmetrize(&mut m);
    let lmin = SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

enum SchurFactor {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let b = nalgebra::DVector::from_column_slice(rhs);
        let x = match self {
            SchurFactor::Chol(c) => c.solve(&b),
            SchurFactor::Lu(lu) => lu.solve(&b)?,
        };
        x.iter().all(|v| v.is_finite()).then(|| x.iter().copied().collect())
    }
}

/// `M_kj = Σ_b Tr(A_k W_b A_j W_b)`.
fn schur(p: &RealProblem, by_block: &[Vec<(usize, usize)>], scal: &[Scaling]) -> DMatrix<f64> {
    let m = p.constraints.len();
    let mut out = DMatrix::<f64>::zeros(m, m);
    for (b, members) in by_block.iter().enumerate() {
        let w = &scal[b].w;
        let n = w.nrows();
        let mut t = DMatrix::<f64>::zeros(n, n);
        for &(j, pj) in members {
            t.fill(0.0);
            for &(r, c, v) in &p.constraints[j].parts[pj].entries {
                // T += v · W[:, r] W[c, :]
                let wr = w.column(r).clone_owned();
                for s in 0..n {
                    let coef = v * w[(c, s)];
                    if coef != 0.0 {
                        t.column_mut(s).axpy(coef, &wr, 1.0);
                    }
                }
            }
            for &(k, pk) in members {
                if k < j {
                    continue;
                }
                let val: f64 = p.constraints[k].parts[pk].entries.iter().map(|&(r, c, v)| v * t[(c, r)]).sum();
                out[(k, j)] += val;
            }
        }
    }
    for j in 0..m {
        for k in (j + 1)..m {
            out[(j, k)] = out[(k, j)];
        }
    }
    out
}

struct Direction {
    dy: Vec<f64>,
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
    dx_hat: Vec<DMatrix<f64>>,
    ds_hat: Vec<DMatrix<f64>>,
}

fn direction(
    p: &RealProblem,
    scal: &[Scaling],
    factor: &SchurFactor,
    rp: &[f64],
    rd: &[DMatrix<f64>],
    r: &[DMatrix<f64>],
) -> Option<Direction> {
    let pm: Vec<DMatrix<f64>> = scal.iter().zip(r).map(|(s, r)| &s.g * r * s.g.transpose()).collect();
    let qm: Vec<DMatrix<f64>> = scal.iter().zip(rd).map(|(s, rd)| &s.w * rd * &s.w).collect();
    let rhs: Vec<f64> = p.constraints.iter().zip(rp).map(|(a, &rpk)| rpk - a.dot(&pm) + a.dot(&qm)).collect();
    let dy = factor.solve(&rhs)?;
    let mut ds: Vec<DMatrix<f64>> = rd.to_vec();
    for (a, &v) in p.constraints.iter().zip(&dy) {
        a.add_to(-v, &mut ds);
    }
    let mut dx = Vec::with_capacity(scal.len());
    let mut dx_hat = Vec::with_capacity(scal.len());
    let mut ds_hat = Vec::with_capacity(scal.len());
    for (b, s) in scal.iter().enumerate() {
        symmetrize(&mut ds[b]);
        let mut sh = s.g.transpose() * &ds[b] * &s.g;
        symmetrize(&mut sh);
        let xh = &r[b] - &sh;
        let mut x = &s.g * &xh * s.g.transpose();
        symmetrize(&mut x);
        dx.push(x);
        dx_hat.push(xh);
        ds_hat.push(sh);
    }
    Some(Direction { dy, dx, ds, dx_hat, ds_hat })
}

struct Snapshot {
    x: Vec<DMatrix<f64>>,
    y: Vec<f64>,
    merit: f64,
    gap: f64,
    pinf: f64,
    dinf: f64,
}

pub(crate) fn solve_real(p: &RealProblem, opts: &SolveOptions) -> RealOutcome {
    let Some(keep) = independent_rows(p) else {
        return RealOutcome {
            x: p.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect(),
            y: vec![0.0; p.constraints.len()],
            status: SolverStatus::Infeasible,
            iterations: 0,
            primal_infeasibility: f64::INFINITY,
            dual_infeasibility: f64::INFINITY,
        };
    };
    let reduced = RealProblem {
        blocks: p.blocks.clone(),
        cost: p.cost.clone(),
        constraints: keep.iter().map(|&i| p.constraints[i].clone()).collect(),
        rhs: keep.iter().map(|&i| p.rhs[i]).collect(),
    };
    let mut out = interior_point(&reduced, opts);
    let mut y = vec![0.0; p.constraints.len()];
    for (k, &i) in keep.iter().enumerate() {
        y[i] = out.y[k];
    }
    out.y = y;
    out
}

fn interior_point(p: &RealProblem, opts: &SolveOptions) -> RealOutcome {
    let m = p.constraints.len();
    let nb = p.blocks.len();
    let ntot: f64 = p.blocks.iter().sum::<usize>() as f64;
    let nmax = p.blocks.iter().copied().max().unwrap_or(1) as f64;

    let mut by_block: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nb];
    for (k, c) in p.constraints.iter().enumerate() {
        for (pi, part) in c.parts.iter().enumerate() {
            by_block[part.block].push((k, pi));
        }
    }

    let norm_a: Vec<f64> = p.constraints.iter().map(|c| c.frobenius_sq().sqrt()).collect();
    let norm_b = p.rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    let norm_c = p.cost.iter().map(|c| c.norm_squared()).sum::<f64>().sqrt();
    let xi = norm_a
        .iter()
        .zip(&p.rhs)
        .map(|(a, b)| nmax.sqrt() * (1.0 + b.abs()) / (1.0 + a))
        .fold(10f64.max(nmax.sqrt()), f64::max);
    let eta = norm_a.iter().copied().fold(10f64.max(nmax.sqrt()).max(norm_c), f64::max);

    let mut x: Vec<DMatrix<f64>> = p.blocks.iter().map(|&n| DMatrix::identity(n, n) * xi).collect();
    let mut s: Vec<DMatrix<f64>> = p.blocks.iter().map(|&n| DMatrix::identity(n, n) * eta).collect();
    let mut y = vec![0.0; m];

    let mut best: Option<Snapshot> = None;
    let mut status = SolverStatus::MaxIterations;
    let mut iterations = 0;
    let mut stalls = 0;
    let mut since_best = 0;

    for it in 0..=opts.max_iterations {
        iterations = it;
        let rp: Vec<f64> = p.constraints.iter().zip(&p.rhs).map(|(a, b)| b - a.dot(&x)).collect();
        let mut rd: Vec<DMatrix<f64>> = p.cost.iter().zip(&s).map(|(c, s)| c - s).collect();
        for (a, &v) in p.constraints.iter().zip(&y) {
            a.add_to(-v, &mut rd);
        }
        let pobj: f64 = p.cost.iter().zip(&x).map(|(c, x)| inner(c, x)).sum();
        let dobj: f64 = p.rhs.iter().zip(&y).map(|(b, y)| b * y).sum();
        let xs: f64 = x.iter().zip(&s).map(|(x, s)| inner(x, s)).sum();
        let mu = xs / ntot;
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + norm_b);
        let dinf = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt() / (1.0 + norm_c);
        let gap = (pobj - dobj).abs().max(xs.abs()) / (1.0 + pobj.abs() + dobj.abs());
        let merit = gap.max(pinf).max(dinf);
        if !merit.is_finite() {
            break;
        }
        if best.as_ref().is_none_or(|b| merit < 0.5 * b.merit) {
            since_best = 0;
        } else {
            since_best += 1;
        }
        if best.as_ref().is_none_or(|b| merit < b.merit) {
            best = Some(Snapshot { x: x.clone(), y: y.clone(), merit, gap, pinf, dinf });
        }
        if since_best >= 8 {
            break;
        }
        if merit <= opts.tolerance {
            status = SolverStatus::Optimal;
            break;
        }
        if it == opts.max_iterations || y.iter().any(|v| v.abs() > 1e14) {
            break;
        }

        let Some(scal) = x.iter().zip(&s).map(|(x, s)| nt_scaling(x, s)).collect::<Option<Vec<_>>>() else {
            break;
        };
        let mut schur_m = schur(p, &by_block, &scal);
        let factor = match Cholesky::new(schur_m.clone()) {
            Some(c) => SchurFactor::Chol(c),
            None => {
                let reg = 1e-14 * (0..m).map(|i| schur_m[(i, i)]).fold(0.0, f64::max);
                for i in 0..m {
                    schur_m[(i, i)] += reg;
                }
                SchurFactor::Lu(schur_m.lu())
            }
        };

        // predictor
        let r_aff: Vec<DMatrix<f64>> = scal.iter().map(|sc| DMatrix::from_diagonal(&(-nalgebra::DVector::from_column_slice(&sc.d)))).collect();
        let Some(aff) = direction(p, &scal, &factor, &rp, &rd, &r_aff) else {
            break;
        };
        let ap = scal.iter().zip(&aff.dx_hat).map(|(sc, dx)| max_step(&sc.d, dx)).fold(1.0, f64::min);
        let ad = scal.iter().zip(&aff.ds_hat).map(|(sc, ds)| max_step(&sc.d, ds)).fold(1.0, f64::min);
        let mut xs_aff = 0.0;
        for (b, sc) in scal.iter().enumerate() {
            let dmat = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&sc.d));
            let xa = &dmat + &aff.dx_hat[b] * ap;
            let sa = &dmat + &aff.ds_hat[b] * ad;
            xs_aff += inner(&xa, &sa);
        }
        let sigma = (xs_aff / ntot / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let r_cor: Vec<DMatrix<f64>> = scal
            .iter()
            .enumerate()
            .map(|(b, sc)| {
                let n = sc.d.len();
                let prod = &aff.dx_hat[b] * &aff.ds_hat[b];
                DMatrix::from_fn(n, n, |i, j| {
                    let corr = 0.5 * (prod[(i, j)] + prod[(j, i)]);
                    let diag = if i == j { sigma * mu - sc.d[i] * sc.d[i] } else { 0.0 };
                    2.0 * (diag - corr) / (sc.d[i] + sc.d[j])
                })
            })
            .collect();
        let Some(dir) = direction(p, &scal, &factor, &rp, &rd, &r_cor) else {
            break;
        };
        let ap = scal.iter().zip(&dir.dx_hat).map(|(sc, dx)| max_step(&sc.d, dx)).fold(f64::INFINITY, f64::min);
        let ad = scal.iter().zip(&dir.ds_hat).map(|(sc, ds)| max_step(&sc.d, ds)).fold(f64::INFINITY, f64::min);
        let ap = (opts.step_fraction * ap).min(1.0);
        let ad = (opts.step_fraction * ad).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        }
        for b in 0..nb {
            x[b] += &dir.dx[b] * ap;
            s[b] += &dir.ds[b] * ad;
            symmetrize(&mut x[b]);
            symmetrize(&mut s[b]);
        }
        for (yk, dyk) in y.iter_mut().zip(&dir.dy) {
            *yk += ad * dyk;
        }
    }

    let best = best.unwrap_or(Snapshot {
        x: x.clone(),
        y: y.clone(),
        merit: f64::INFINITY,
        gap: f64::INFINITY,
        pinf: f64::INFINITY,
        dinf: f64::INFINITY,
    });
    if status != SolverStatus::Optimal {
        status = if best.gap <= 1e-7 && best.pinf <= 1e-7 && best.dinf <= 1e-7 {
            SolverStatus::Optimal
        } else if best.pinf > 1e-6 {
            SolverStatus::Infeasible
        } else {
            SolverStatus::MaxIterations
        };
    }
    RealOutcome {
        x: best.x,
        y: best.y,
        status,
        iterations,
        primal_infeasibility: best.pinf,
        dual_infeasibility: best.dinf,
    }
}
