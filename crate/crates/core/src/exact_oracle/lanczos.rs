//! Largest singular value of a complex matrix stored as real and imaginary
//! parts, by Lanczos on `C^* C` with full reorthogonalization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative residual at which the top Ritz value is accepted.
const RESIDUAL_TOL: f64 = 1e-13;

struct Split<'a> {
    re: &'a DMatrix<f64>,
    im: Option<&'a DMatrix<f64>>,
}

impl Split<'_> {
    /// `(C^* C) x` for `x = xr + i xi`.
    fn gram_apply(&self, xr: &DVector<f64>, xi: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        match self.im {
            None => (self.re.tr_mul(&(self.re * xr)), self.re.tr_mul(&(self.re * xi))),
            Some(im) => {
                let yr = self.re * xr - im * xi;
                let yi = self.re * xi + im * xr;
                (self.re.tr_mul(&yr) + im.tr_mul(&yi), self.re.tr_mul(&yi) - im.tr_mul(&yr))
            }
        }
    }
}

/// Deterministic start vector with no special alignment to basis vectors.
fn start_vector(len: usize, phase: f64) -> DVector<f64> {
    let v = DVector::from_fn(len, |i, _| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_894_8 + phase).sin());
    let nv = v.norm();
    v / nv
}

/// Operator norm of `re + i im`.
pub fn split_norm(re: &DMatrix<f64>, im: Option<&DMatrix<f64>>) -> f64 {
    let cols = re.ncols();
    if cols == 0 || re.nrows() == 0 {
        return 0.0;
    }
    let scale = re.amax().max(im.map_or(0.0, |m| m.amax()));
    if scale == 0.0 {
        return 0.0;
    }
    let op = Split { re, im };
    // Real embedding [[Re, -Im], [Im, Re]] of C^* C: every eigenvalue twice.
    let dim = if im.is_some() { 2 * cols } else { cols };
    let split = |v: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        if im.is_some() {
            (v.rows(0, cols).into_owned(), v.rows(cols, cols).into_owned())
        } else {
            (v.clone(), DVector::zeros(cols))
        }
    };
    let join = |a: DVector<f64>, b: DVector<f64>| -> DVector<f64> {
        if im.is_some() {
            let mut v = DVector::zeros(2 * cols);
            v.rows_mut(0, cols).copy_from(&a);
            v.rows_mut(cols, cols).copy_from(&b);
            v
        } else {
            a
        }
    };
    let apply = |v: &DVector<f64>| {
        let (xr, xi) = split(v);
        let (yr, yi) = op.gram_apply(&xr, &xi);
        join(yr, yi)
    };

    let mut basis: Vec<DVector<f64>> = vec![start_vector(dim, 0.3)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut best = 0.0f64;
    for k in 0..dim {
        let mut w = apply(&basis[k]);
        let a = w.dot(&basis[k]);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = w.dot(q);
                w.axpy(-c, q, 1.0);
            }
        }
        let b = w.norm();
        let m = alpha.len();
        let last = b <= 1e-15 * scale * scale || k + 1 == dim;
        if !(last || m <= 8 || m.is_multiple_of(4)) {
            beta.push(b);
            basis.push(w / b);
            continue;
        }
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (imax, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        best = best.max(theta);
        let residual = b * eig.eigenvectors[(m - 1, imax)].abs();
        if residual <= RESIDUAL_TOL * theta.abs().max(f64::MIN_POSITIVE) || last {
            break;
        }
        beta.push(b);
        basis.push(w / b);
    }
    best.max(0.0).sqrt()
}
