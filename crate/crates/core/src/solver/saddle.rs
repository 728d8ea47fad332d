//! Solver for `[[M, B^T], [B, 0]] (sigma; u) = (0; F)`.
//!
//! Small systems use a dense symmetric indefinite (Bunch-Kaufman)
//! factorization of the whole block matrix.
//! Larger ones use the augmented Lagrangian form: `M_r = M + r B^T W^{-1} B`
//! (with `W` the displacement mass) is symmetric positive definite and is
//! factored by sparse Cholesky; the Schur complement `B M_r^{-1} B^T` is then
//! solved by conjugate gradients preconditioned with `r W^{-1}`, whose
//! spectrum lies in `[r b / (1 + r b), 1)` for an inf-sup constant `b`.
//! A few rounds of iterative refinement against the original system follow.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::assembly::CsrMatrix;
use crate::error::{Error, Result};

/// Systems below this many unknowns are solved densely.
pub const DENSE_LIMIT: usize = 5000;
const PENALTY: f64 = 1e3;
const RESIDUAL_TOL: f64 = 1e-9;

pub struct SaddleSystem {
    /// Stress mass matrix (symmetric positive definite).
    pub m: CsrMatrix,
    /// Divergence matrix, displacement rows by stress columns.
    pub b: CsrMatrix,
    /// Load vector.
    pub f: Vec<f64>,
    /// Inverse displacement mass blocks; block `i` covers the consecutive
    /// displacement unknowns starting after the previous blocks.
    pub dual_blocks: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug)]
pub struct SaddleSolution {
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
    /// `||[M sigma + B^T u; B sigma - F]||`.
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SaddleSystem {
    pub fn n_sigma(&self) -> usize {
        self.m.nrows
    }

    pub fn n_u(&self) -> usize {
        self.b.nrows
    }

    /// Residual blocks `(g - M sigma - B^T u, F - B sigma)` for right-hand side `(g, F)`.
    fn residual(&self, g: &[f64], f: &[f64], sigma: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ms = self.m.mul_vec(sigma);
        let btu = self.b.mul_t_vec(u);
        let r1 = (0..self.n_sigma()).map(|i| g[i] - ms[i] - btu[i]).collect();
        let bs = self.b.mul_vec(sigma);
        let r2 = (0..self.n_u()).map(|i| f[i] - bs[i]).collect();
        (r1, r2)
    }

    fn apply_dual(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        let mut start = 0;
        for blk in &self.dual_blocks {
            let n = blk.nrows();
            for i in 0..n {
                out[start + i] = (0..n).map(|j| blk[(i, j)] * v[start + j]).sum();
            }
            start += n;
        }
        out
    }
}

/// Solves the saddle system; the residual is checked before returning.
pub fn solve_saddle(sys: &SaddleSystem) -> Result<SaddleSolution> {
    solve_saddle_with(sys, &vec![0.0; sys.n_sigma()])
}

/// Solves `[[M, B^T], [B, 0]] (sigma; u) = (g; F)`. A nonzero `g` carries
/// boundary displacement data.
pub fn solve_saddle_with(sys: &SaddleSystem, g: &[f64]) -> Result<SaddleSolution> {
    let (ns, nu) = (sys.n_sigma(), sys.n_u());
    if sys.f.len() != nu || g.len() != ns || sys.b.ncols != ns || sys.m.ncols != ns {
        return Err(Error::InvalidInput("inconsistent saddle system dimensions".into()));
    }
    let solver: Box<dyn Fn(&[f64], &[f64]) -> Result<(Vec<f64>, Vec<f64>)>> = if ns + nu < DENSE_LIMIT {
        Box::new(dense_solver(sys)?)
    } else {
        Box::new(augmented_solver(sys)?)
    };
    let (mut sigma, mut u) = solver(g, &sys.f)?;
    let tol = RESIDUAL_TOL * ((norm(&sys.f).powi(2) + norm(g).powi(2)).sqrt() + 1.0);
    let mut residual = f64::INFINITY;
    for _ in 0..6 {
        let (r1, r2) = sys.residual(g, &sys.f, &sigma, &u);
        residual = (norm(&r1).powi(2) + norm(&r2).powi(2)).sqrt();
        // Stop once converged, refining a little below the tolerance.
        if residual <= 1e-3 * tol {
            break;
        }
        let (ds, du) = solver(&r1, &r2)?;
        for (s, d) in sigma.iter_mut().zip(&ds) {
            *s += d;
        }
        for (x, d) in u.iter_mut().zip(&du) {
            *x += d;
        }
    }
    let (r1, r2) = sys.residual(g, &sys.f, &sigma, &u);
    residual = residual.min((norm(&r1).powi(2) + norm(&r2).powi(2)).sqrt());
    if !(residual <= tol) {
        return Err(Error::SingularSystem(format!("residual {residual:.3e} exceeds {tol:.3e}")));
    }
    Ok(SaddleSolution { sigma, u, residual })
}

fn dense_solver(sys: &SaddleSystem) -> Result<impl Fn(&[f64], &[f64]) -> Result<(Vec<f64>, Vec<f64>)>> {
    let (ns, nu) = (sys.n_sigma(), sys.n_u());
    let n = ns + nu;
    let mut k = Mat::<f64>::zeros(n, n);
    for i in 0..ns {
        let (c, v) = sys.m.row(i);
        for (&j, &a) in c.iter().zip(v) {
            k[(i, j)] += a;
        }
    }
    for i in 0..nu {
        let (c, v) = sys.b.row(i);
        for (&j, &a) in c.iter().zip(v) {
            k[(ns + i, j)] += a;
            k[(j, ns + i)] += a;
        }
    }
    // Bunch-Kaufman: the block matrix is symmetric indefinite.
    let lblt = k.lblt(Side::Lower);
    drop(k);
    Ok(move |g: &[f64], f: &[f64]| {
        let mut x = Mat::from_fn(n, 1, |i, _| if i < ns { g[i] } else { f[i - ns] });
        lblt.solve_in_place(x.as_mut());
        if (0..n).any(|i| !x[(i, 0)].is_finite()) {
            return Err(Error::SingularSystem("dense factorization breakdown".into()));
        }
        Ok(((0..ns).map(|i| x[(i, 0)]).collect(), (ns..n).map(|i| x[(i, 0)]).collect()))
    })
}

fn augmented_solver(sys: &SaddleSystem) -> Result<impl Fn(&[f64], &[f64]) -> Result<(Vec<f64>, Vec<f64>)> + '_> {
    let (ns, nu) = (sys.n_sigma(), sys.n_u());
    let mut mr = sys.m.clone();
    let mut start = 0;
    for blk in &sys.dual_blocks {
        let rows: Vec<usize> = (start..start + blk.nrows()).collect();
        start += blk.nrows();
        let mut cols: Vec<usize> = rows.iter().flat_map(|&r| sys.b.row(r).0.iter().copied()).collect();
        cols.sort_unstable();
        cols.dedup();
        let mut bk = DMatrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            let (c, v) = sys.b.row(r);
            for (&j, a) in c.iter().zip(v) {
                bk[(i, cols.binary_search(&j).unwrap())] = *a;
            }
        }
        let local = bk.transpose() * blk * &bk * PENALTY;
        for (i, &gi) in cols.iter().enumerate() {
            for (j, &gj) in cols.iter().enumerate() {
                mr.add(gi, gj, local[(i, j)]);
            }
        }
    }
    if start != nu {
        return Err(Error::InvalidInput("dual mass blocks do not cover the displacement unknowns".into()));
    }
    let symbolic = SymbolicSparseColMat::new_checked(ns, ns, mr.row_ptr.clone(), None, mr.col_idx.clone());
    let mat = SparseColMat::new(symbolic, mr.values.clone());
    drop(mr);
    let llt = mat
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::SingularSystem(format!("sparse Cholesky failed: {e:?}")))?;
    drop(mat);
    let solve_mr = move |rhs: &[f64]| -> Vec<f64> {
        let mut x = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        llt.solve_in_place(x.as_mut());
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    };
    Ok(move |g: &[f64], f: &[f64]| {
        // Augmented right-hand side g + r B^T W^{-1} f.
        let wf = sys.apply_dual(f);
        let btwf = sys.b.mul_t_vec(&wf);
        let gt: Vec<f64> = (0..ns).map(|i| g[i] + PENALTY * btwf[i]).collect();
        let mg = solve_mr(&gt);
        let bmg = sys.b.mul_vec(&mg);
        let h: Vec<f64> = (0..nu).map(|i| bmg[i] - f[i]).collect();
        let schur = |v: &[f64]| -> Vec<f64> { sys.b.mul_vec(&solve_mr(&sys.b.mul_t_vec(v))) };
        let precond = |v: &[f64]| -> Vec<f64> { sys.apply_dual(v).iter().map(|x| PENALTY * x).collect() };
        let u = pcg(schur, precond, &h, 1e-13, 300)
            .ok_or_else(|| Error::SingularSystem("Schur complement iteration did not converge".into()))?;
        let btu = sys.b.mul_t_vec(&u);
        let rhs: Vec<f64> = (0..ns).map(|i| gt[i] - btu[i]).collect();
        Ok((solve_mr(&rhs), u))
    })
}

/// Preconditioned conjugate gradients from a zero initial guess; `None` if
/// the relative residual does not reach `tol` within `max_iter` steps.
fn pcg<A, P>(a: A, p: P, b: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>>
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Some(x);
    }
    let mut r = b.to_vec();
    let mut z = p(&r);
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        let ad = a(&d);
        let dad = dot(&d, &ad);
        if !(dad > 0.0) {
            return None;
        }
        let alpha = rz / dad;
        for i in 0..n {
            x[i] += alpha * d[i];
            r[i] -= alpha * ad[i];
        }
        if norm(&r) <= tol * bnorm {
            return Some(x);
        }
        z = p(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            d[i] = z[i] + beta * d[i];
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> SaddleSystem {
        // M = tridiagonal SPD, B picks pairs of sums.
        let rows: Vec<Vec<usize>> = (0..n).map(|i| (i.saturating_sub(1)..(i + 2).min(n)).collect()).collect();
        let mut m = CsrMatrix::from_pattern(n, n, rows);
        for i in 0..n {
            m.add(i, i, 4.0);
            if i + 1 < n {
                m.add(i, i + 1, -1.0);
                m.add(i + 1, i, -1.0);
            }
        }
        let nu = n / 2;
        let mut b = CsrMatrix::from_pattern(nu, n, (0..nu).map(|i| vec![2 * i, 2 * i + 1]).collect());
        for i in 0..nu {
            b.add(i, 2 * i, 1.0);
            b.add(i, 2 * i + 1, 2.0);
        }
        let f = (0..nu).map(|i| (i as f64 * 0.37).sin()).collect();
        let dual_blocks = (0..nu).map(|_| DMatrix::from_element(1, 1, 1.0)).collect();
        SaddleSystem { m, b, f, dual_blocks }
    }

    #[test]
    fn dense_and_augmented_agree() {
        let sys = toy(200);
        let a = solve_saddle(&sys).unwrap();
        let dense = dense_solver(&sys).unwrap();
        let aug = augmented_solver(&sys).unwrap();
        let zeros = vec![0.0; 200];
        let (s1, u1) = dense(&zeros, &sys.f).unwrap();
        let (s2, u2) = aug(&zeros, &sys.f).unwrap();
        for i in 0..200 {
            assert!((s1[i] - s2[i]).abs() < 1e-9 && (a.sigma[i] - s1[i]).abs() < 1e-10);
        }
        for i in 0..100 {
            assert!((u1[i] - u2[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_load_gives_zero_solution() {
        let mut sys = toy(40);
        sys.f.iter_mut().for_each(|v| *v = 0.0);
        let s = solve_saddle(&sys).unwrap();
        assert!(s.sigma.iter().chain(&s.u).all(|v| *v == 0.0));
    }

    #[test]
    fn singular_system_is_reported() {
        let mut sys = toy(40);
        // Duplicate a constraint row: B loses full row rank.
        let r0: Vec<f64> = sys.b.row(0).1.to_vec();
        let mut b = CsrMatrix::from_pattern(20, 40, (0..20).map(|i| if i == 1 { vec![0, 1] } else { vec![2 * i, 2 * i + 1] }).collect());
        for i in 0..20 {
            let (c, v) = sys.b.row(i);
            let (c, v) = if i == 1 { (vec![0, 1], r0.clone()) } else { (c.to_vec(), v.to_vec()) };
            for (j, a) in c.iter().zip(v) {
                b.add(i, *j, a);
            }
        }
        sys.b = b;
        assert!(matches!(solve_saddle(&sys), Err(Error::SingularSystem(_))));
    }
}
