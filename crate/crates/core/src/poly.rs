//! Polynomials in barycentric coordinates and Lagrange nodal bases.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// All multi-indices of `n` entries summing to `k`, first entry descending.
pub fn lattice(n: usize, k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fill(&mut out, &mut cur, 0, k);
    out
}

fn fill(out: &mut Vec<Vec<u8>>, cur: &mut [u8], pos: usize, rest: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = rest as u8;
        out.push(cur.to_vec());
        return;
    }
    for a in (0..=rest).rev() {
        cur[pos] = a as u8;
        fill(out, cur, pos + 1, rest - a);
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Exact integral of `prod lambda_i^{a_i}` over a simplex of dimension `dim`
/// and measure `volume`.
pub fn monomial_moment(a: &[u8], dim: usize, volume: f64) -> f64 {
    let s: usize = a.iter().map(|&x| x as usize).sum();
    let num: f64 = a.iter().map(|&x| factorial(x as usize)).product();
    volume * factorial(dim) * num / factorial(s + dim)
}

/// Polynomial in the barycentric variables `lambda_0..lambda_{n-1}`, treated
/// as independent variables.
#[derive(Clone, Debug, PartialEq)]
pub struct BaryPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u8>, f64>,
}

impl BaryPoly {
    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; nvars], c);
        BaryPoly { nvars, terms }
    }

    /// `c0 + sum_i c[i] lambda_i`.
    pub fn linear(c0: f64, c: &[f64]) -> Self {
        let n = c.len();
        let mut p = BaryPoly::constant(n, c0);
        for (i, &ci) in c.iter().enumerate() {
            let mut a = vec![0; n];
            a[i] = 1;
            *p.terms.entry(a).or_insert(0.0) += ci;
        }
        p
    }

    pub fn mul(&self, other: &BaryPoly) -> BaryPoly {
        let mut terms = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        terms.retain(|_, c| *c != 0.0);
        BaryPoly { nvars: self.nvars, terms }
    }

    pub fn eval(&self, lam: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| c * a.iter().zip(lam).map(|(&e, &l)| l.powi(e as i32)).product::<f64>())
            .sum()
    }

    pub fn deriv(&self, i: usize) -> BaryPoly {
        let mut terms = BTreeMap::new();
        for (a, c) in &self.terms {
            if a[i] > 0 {
                let mut b = a.clone();
                b[i] -= 1;
                *terms.entry(b).or_insert(0.0) += c * a[i] as f64;
            }
        }
        BaryPoly { nvars: self.nvars, terms }
    }

    /// Exact integral over a simplex with `nvars = dim + 1`.
    pub fn integrate(&self, volume: f64) -> f64 {
        let dim = self.nvars - 1;
        self.terms.iter().map(|(a, c)| c * monomial_moment(a, dim, volume)).sum()
    }
}

/// Lagrange basis polynomial of degree `k` attached to lattice node `a`
/// (`sum a = k`): `prod_i prod_{j < a_i} (k lambda_i - j) / (j + 1)`.
pub fn lagrange_poly(k: usize, a: &[u8]) -> BaryPoly {
    let n = a.len();
    let mut p = BaryPoly::constant(n, 1.0);
    for (i, &ai) in a.iter().enumerate() {
        for j in 0..ai as usize {
            let mut c = vec![0.0; n];
            c[i] = k as f64 / (j + 1) as f64;
            p = p.mul(&BaryPoly::linear(-(j as f64) / (j + 1) as f64, &c));
        }
    }
    p
}

/// Nodal P_k basis on a simplex of dimension `dim`, with first and second
/// barycentric derivatives.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    pub dim: usize,
    pub degree: usize,
    pub nodes: Vec<Vec<u8>>,
    pub polys: Vec<BaryPoly>,
    pub d1: Vec<Vec<BaryPoly>>,
    pub d2: Vec<Vec<Vec<BaryPoly>>>,
}

impl LagrangeBasis {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if degree > 4 {
            return Err(Error::UnsupportedDegree(degree));
        }
        let nodes = lattice(dim + 1, degree);
        let polys: Vec<BaryPoly> = nodes.iter().map(|a| lagrange_poly(degree, a)).collect();
        let d1: Vec<Vec<BaryPoly>> =
            polys.iter().map(|p| (0..=dim).map(|i| p.deriv(i)).collect()).collect();
        let d2 = d1
            .iter()
            .map(|row| row.iter().map(|p| (0..=dim).map(|j| p.deriv(j)).collect()).collect())
            .collect();
        Ok(LagrangeBasis { dim, degree, nodes, polys, d1, d2 })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// `dim P_degree` in `dim` variables.
    pub fn count(dim: usize, degree: usize) -> usize {
        (1..=dim).fold(1, |acc, i| acc * (degree + i) / i)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Barycentric coordinates of lattice node `i`.
    pub fn node_bary(&self, i: usize) -> Vec<f64> {
        let k = self.degree.max(1) as f64;
        if self.degree == 0 {
            return vec![1.0 / (self.dim + 1) as f64; self.dim + 1];
        }
        self.nodes[i].iter().map(|&a| a as f64 / k).collect()
    }

    pub fn values(&self, lam: &[f64]) -> Vec<f64> {
        self.polys.iter().map(|p| p.eval(lam)).collect()
    }

    /// Physical gradients given barycentric gradients `grads`.
    pub fn gradients(&self, lam: &[f64], grads: &[[f64; 3]]) -> Vec<[f64; 3]> {
        self.d1
            .iter()
            .map(|row| {
                let mut g = [0.0; 3];
                for (l, p) in row.iter().enumerate() {
                    let v = p.eval(lam);
                    for c in 0..3 {
                        g[c] += v * grads[l][c];
                    }
                }
                g
            })
            .collect()
    }

    /// Physical Hessians given barycentric gradients `grads`.
    pub fn hessians(&self, lam: &[f64], grads: &[[f64; 3]]) -> Vec<[[f64; 3]; 3]> {
        self.d2
            .iter()
            .map(|rows| {
                let mut h = [[0.0; 3]; 3];
                for (l, row) in rows.iter().enumerate() {
                    for (m, p) in row.iter().enumerate() {
                        let v = p.eval(lam);
                        if v == 0.0 {
                            continue;
                        }
                        for a in 0..3 {
                            for b in 0..3 {
                                h[a][b] += v * grads[l][a] * grads[m][b];
                            }
                        }
                    }
                }
                h
            })
            .collect()
    }
}
