//! Locally optimal block preconditioned conjugate gradient (LOBPCG) for the
//! lowest eigenpairs of `A x = λ B x`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{dot, norm2, Matrix, SymMatrix};
use super::eigen::symmetric_eigen;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SymMatrix {
    fn dim(&self) -> usize {
        SymMatrix::dim(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y)
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        CsrMatrix::dim(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y)
    }
}

pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64], out: &mut [f64]);
}

/// No preconditioning.
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
    }
}

#[derive(Debug, Clone)]
pub struct LobpcgOptions {
    pub block: usize,
    /// Convergence when `‖r_i‖ ≤ tol · (scale + |θ_i| · b_scale)`.
    pub tol: f64,
    /// Accepted at `max_iter` if every residual is below this looser bound.
    pub fallback_tol: f64,
    pub scale: f64,
    pub b_scale: f64,
    pub max_iter: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct LobpcgResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

struct Basis<'a> {
    b: Option<&'a dyn LinearOperator>,
    q: Vec<Vec<f64>>,
    bq: Vec<Vec<f64>>,
}

impl<'a> Basis<'a> {
    fn new(b: Option<&'a dyn LinearOperator>) -> Self {
        Self { b, q: Vec::new(), bq: Vec::new() }
    }

    fn apply_b(&self, v: &[f64]) -> Vec<f64> {
        match self.b {
            Some(b) => {
                let mut out = vec![0.0; v.len()];
                b.apply(v, &mut out);
                out
            }
            None => v.to_vec(),
        }
    }

    /// Orthogonalizes `v` against the basis (two classical Gram–Schmidt
    /// passes) and appends it unless it is numerically dependent.
    fn push(&mut self, mut v: Vec<f64>) -> bool {
        let mut bv = self.apply_b(&v);
        let orig = dot(&v, &bv).max(0.0).sqrt();
        if orig == 0.0 || !orig.is_finite() {
            return false;
        }
        for _ in 0..2 {
            let coeffs: Vec<f64> = self.bq.iter().map(|bq| dot(bq, &v)).collect();
            for (c, q) in coeffs.iter().zip(&self.q) {
                super::dense::axpy(-c, q, &mut v);
            }
            bv = self.apply_b(&v);
        }
        let nrm = dot(&v, &bv).max(0.0).sqrt();
        if nrm <= 1e-10 * orig {
            return false;
        }
        super::dense::scale(&mut v, 1.0 / nrm);
        super::dense::scale(&mut bv, 1.0 / nrm);
        self.q.push(v);
        self.bq.push(bv);
        true
    }
}

pub fn lobpcg(
    a: &dyn LinearOperator,
    b: Option<&dyn LinearOperator>,
    prec: &dyn Preconditioner,
    k: usize,
    opts: &LobpcgOptions,
) -> Result<LobpcgResult> {
    lobpcg_from(a, b, prec, k, opts, &[])
}

/// As [`lobpcg`], seeding the block with `start` before random fill.
pub fn lobpcg_from(
    a: &dyn LinearOperator,
    b: Option<&dyn LinearOperator>,
    prec: &dyn Preconditioner,
    k: usize,
    opts: &LobpcgOptions,
    start: &[Vec<f64>],
) -> Result<LobpcgResult> {
    let n = a.dim();
    let bs = opts.block.max(k).min(n);
    if k == 0 || 3 * bs > n {
        return Err(Error::InvalidArgument(format!(
            "block size {bs} too large for dimension {n} (k = {k})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let apply_a = |x: &[f64]| {
        let mut y = vec![0.0; n];
        a.apply(x, &mut y);
        y
    };

    let mut basis = Basis::new(b);
    for v in start.iter().take(bs) {
        assert_eq!(v.len(), n, "start vector has wrong length");
        basis.push(v.clone());
    }
    while basis.q.len() < bs {
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        basis.push(v);
    }
    let mut x = basis.q;
    let mut bx = basis.bq;
    let mut ax: Vec<Vec<f64>> = x.iter().map(|v| apply_a(v)).collect();
    let (mut theta, rot) = rayleigh_ritz(&x, &ax, bs)?;
    x = combine(&x, &rot);
    ax = combine(&ax, &rot);
    bx = combine(&bx, &rot);
    let mut p: Vec<Vec<f64>> = Vec::new();

    let threshold = |t: f64, tol: f64| tol * (opts.scale + t.abs() * opts.b_scale);

    for iter in 0..=opts.max_iter {
        let residuals: Vec<Vec<f64>> = (0..bs)
            .map(|i| ax[i].iter().zip(&bx[i]).map(|(a, b)| a - theta[i] * b).collect())
            .collect();
        let rnorms: Vec<f64> = residuals.iter().map(|r| norm2(r)).collect();
        let converged = (0..k).all(|i| rnorms[i] <= threshold(theta[i], opts.tol));
        let give_up = iter == opts.max_iter;
        if converged || give_up {
            if give_up && !(0..k).all(|i| rnorms[i] <= threshold(theta[i], opts.fallback_tol)) {
                let worst = (0..k).map(|i| rnorms[i]).fold(0.0, f64::max);
                return Err(Error::NoConvergence { iterations: iter, residual: worst });
            }
            return Ok(LobpcgResult {
                values: theta[..k].to_vec(),
                vectors: x[..k].to_vec(),
                residuals: rnorms[..k].to_vec(),
                iterations: iter,
            });
        }

        let mut s = Basis::new(b);
        for (v, bv) in x.iter().zip(&bx) {
            s.q.push(v.clone());
            s.bq.push(bv.clone());
        }
        for (i, r) in residuals.iter().enumerate() {
            // Converged columns contribute nothing useful.
            if rnorms[i] <= threshold(theta[i], opts.tol) * 1e-2 {
                continue;
            }
            let mut w = vec![0.0; n];
            prec.apply(r, &mut w);
            s.push(w);
        }
        for v in p.drain(..) {
            s.push(v);
        }
        let mut as_: Vec<Vec<f64>> = ax.clone();
        for v in &s.q[bs..] {
            as_.push(apply_a(v));
        }
        let (t, c) = rayleigh_ritz(&s.q, &as_, bs)?;
        theta = t;
        x = combine(&s.q, &c);
        ax = combine(&as_, &c);
        bx = combine(&s.bq, &c);
        // New search directions: the part of the update outside the old X.
        let mut c_tail = c.clone();
        for i in 0..bs {
            for j in 0..c_tail.cols() {
                c_tail[(i, j)] = 0.0;
            }
        }
        if s.q.len() > bs {
            p = combine(&s.q, &c_tail);
        }
    }
    unreachable!()
}

/// Lowest `m` Ritz pairs of the projected pencil on an orthonormal basis.
fn rayleigh_ritz(q: &[Vec<f64>], aq: &[Vec<f64>], m: usize) -> Result<(Vec<f64>, Matrix)> {
    let s = q.len();
    let mut g = SymMatrix::dense(s);
    for i in 0..s {
        for j in 0..=i {
            let v = 0.5 * (dot(&q[i], &aq[j]) + dot(&q[j], &aq[i]));
            g.set(i, j, v);
        }
    }
    let eig = symmetric_eigen(&g)?;
    let mut c = Matrix::zeros(s, m);
    for j in 0..m {
        for i in 0..s {
            c[(i, j)] = eig.vectors[(i, j)];
        }
    }
    Ok((eig.values[..m].to_vec(), c))
}

fn combine(vs: &[Vec<f64>], c: &Matrix) -> Vec<Vec<f64>> {
    let n = vs[0].len();
    (0..c.cols())
        .map(|j| {
            let mut out = vec![0.0; n];
            for (i, v) in vs.iter().enumerate() {
                let cij = c[(i, j)];
                if cij != 0.0 {
                    super::dense::axpy(cij, v, &mut out);
                }
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<f64>);
    impl Preconditioner for Diag {
        fn apply(&self, r: &[f64], out: &mut [f64]) {
            for ((o, ri), d) in out.iter_mut().zip(r).zip(&self.0) {
                *o = ri / d;
            }
        }
    }

    #[test]
    fn lowest_of_path_laplacian() {
        let n = 60;
        let mut a = SymMatrix::banded(n, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
        }
        let opts = LobpcgOptions {
            block: 6,
            tol: 1e-12,
            fallback_tol: 1e-8,
            scale: a.norm1(),
            b_scale: 1.0,
            max_iter: 2000,
            seed: 7,
        };
        let res = lobpcg(&a, None, &IdentityPreconditioner, 3, &opts).unwrap();
        for k in 0..3 {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((res.values[k] - exact).abs() < 1e-10, "{} vs {}", res.values[k], exact);
        }
    }

    #[test]
    fn degenerate_pair_with_preconditioner() {
        let mut d: Vec<f64> = (0..90).map(|i| 1.0 + i as f64).collect();
        d[1] = 1.0;
        let a = SymMatrix::from_diagonal(&d);
        let opts = LobpcgOptions {
            block: 4,
            tol: 1e-12,
            fallback_tol: 1e-8,
            scale: 90.0,
            b_scale: 1.0,
            max_iter: 200,
            seed: 1,
        };
        let res = lobpcg(&a, None, &Diag(d.iter().map(|v| v + 0.5).collect()), 3, &opts).unwrap();
        assert!((res.values[0] - 1.0).abs() < 1e-12);
        assert!((res.values[1] - 1.0).abs() < 1e-12);
        assert!((res.values[2] - 3.0).abs() < 1e-12);
    }
}
