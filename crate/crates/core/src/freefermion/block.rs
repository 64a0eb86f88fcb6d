use nalgebra::DMatrix;

use crate::model::ChainSpec;

/// The effective one-body matrix `M = [[A, B], [-B, -A]]` of an XY chain
/// together with its Jacobi blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHamiltonian {
    pub n: usize,
    /// Symmetric: fields on the diagonal, `-mu_j` next to it.
    pub a: DMatrix<f64>,
    /// Antisymmetric: `-mu_j gamma_j` above the diagonal, `+mu_j gamma_j` below.
    pub b: DMatrix<f64>,
    pub m: DMatrix<f64>,
}

impl BlockHamiltonian {
    /// True when the anisotropy block vanishes identically.
    pub fn is_block_diagonal(&self) -> bool {
        self.b.iter().all(|&x| x == 0.0)
    }

    /// Largest absolute entry of `M`.
    pub fn max_norm(&self) -> f64 {
        self.m.amax()
    }
}

pub fn build_block_hamiltonian(spec: &ChainSpec) -> BlockHamiltonian {
    let n = spec.n();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for (j, &v) in spec.nu().iter().enumerate() {
        a[(j, j)] = v;
    }
    for (j, (&mu, &g)) in spec.mu().iter().zip(spec.gamma()).enumerate() {
        a[(j, j + 1)] = -mu;
        a[(j + 1, j)] = -mu;
        b[(j, j + 1)] = -mu * g;
        b[(j + 1, j)] = mu * g;
    }
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    m.view_mut((0, n), (n, n)).copy_from(&b);
    m.view_mut((n, 0), (n, n)).copy_from(&(-&b));
    m.view_mut((n, n), (n, n)).copy_from(&(-&a));
    BlockHamiltonian { n, a, b, m }
}

/// `M` in the interleaved basis `(e_1, e_{n+1}, e_2, e_{n+2}, ...)`: a block
/// tridiagonal matrix with `nu_j J` on the diagonal and `-mu_j S(gamma_j)`
/// above it.
pub fn reorder_tight_binding(h: &BlockHamiltonian) -> DMatrix<f64> {
    let n = h.n;
    let old = |i: usize| if i % 2 == 0 { i / 2 } else { n + i / 2 };
    DMatrix::from_fn(2 * n, 2 * n, |r, c| h.m[(old(r), old(c))])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(mu: f64, gamma: f64, nu: Vec<f64>) -> ChainSpec {
        ChainSpec::uniform(mu, gamma, nu).unwrap()
    }

    #[test]
    fn single_site() {
        let h = build_block_hamiltonian(&chain(1.0, 0.0, vec![0.7]));
        assert_eq!(h.a, DMatrix::from_row_slice(1, 1, &[0.7]));
        assert_eq!(h.b, DMatrix::from_row_slice(1, 1, &[0.0]));
        assert_eq!(h.m, DMatrix::from_row_slice(2, 2, &[0.7, 0.0, 0.0, -0.7]));
        assert_eq!(reorder_tight_binding(&h), h.m);
    }

    #[test]
    fn two_site_isotropic() {
        let h = build_block_hamiltonian(&chain(1.0, 0.0, vec![0.0, 0.0]));
        assert_eq!(h.a, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]));
        assert!(h.is_block_diagonal());
        let r = reorder_tight_binding(&h);
        // diagonal blocks nu J = 0, off-diagonal block -S(0) = -diag(1, -1)
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                -1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(r, expected);
    }

    #[test]
    fn two_site_anisotropic_b_block() {
        let h = build_block_hamiltonian(&chain(1.0, 0.5, vec![0.0, 0.0]));
        assert_eq!(h.b, DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]));
    }

    #[test]
    fn structure_and_symmetry() {
        let spec = ChainSpec::new(vec![1.0, -0.4, 2.0], vec![0.3, -1.2, 0.0], vec![0.1, -0.5, 1.5, 0.2]).unwrap();
        let h = build_block_hamiltonian(&spec);
        assert_eq!(h.a, h.a.transpose());
        assert_eq!(h.b, -h.b.transpose());
        assert_eq!(h.m, h.m.transpose());
        let r = reorder_tight_binding(&h);
        // 2x2 blocks: nu_j J on the diagonal, -mu_j S(gamma_j) above it
        for j in 0..4 {
            let v = spec.nu()[j];
            assert_eq!(r.view((2 * j, 2 * j), (2, 2)).clone_owned(), DMatrix::from_row_slice(2, 2, &[v, 0.0, 0.0, -v]));
        }
        for j in 0..3 {
            let (mu, g) = (spec.mu()[j], spec.gamma()[j]);
            let s = DMatrix::from_row_slice(2, 2, &[1.0, g, -g, -1.0]) * (-mu);
            assert_eq!(r.view((2 * j, 2 * j + 2), (2, 2)).clone_owned(), s);
        }
    }
}
