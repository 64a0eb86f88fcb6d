use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::{dimension, site_bit, site_mask, SectorLayout, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::model::ObservableKind;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// 2x2 single-site matrix, indexed `[row][col]` in the (up, down) basis.
pub type SiteMatrix = [[C64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli_matrix(axis: Axis) -> SiteMatrix {
    match axis {
        Axis::X => [[ZERO, ONE], [ONE, ZERO]],
        Axis::Y => [[ZERO, -I], [I, ZERO]],
        Axis::Z => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

pub fn matrix_unit(r: usize, s: usize) -> SiteMatrix {
    let mut m = [[ZERO; 2]; 2];
    m[r][s] = ONE;
    m
}

/// Lowering operator `a = (sigma_x - i sigma_y)/2`, sending up to down.
pub fn lowering_matrix() -> SiteMatrix {
    matrix_unit(1, 0)
}

pub fn site_matrix(kind: ObservableKind) -> SiteMatrix {
    match kind {
        ObservableKind::A | ObservableKind::C => matrix_unit(1, 0),
        ObservableKind::ADagger | ObservableKind::CDagger => matrix_unit(0, 1),
        ObservableKind::ADaggerA => matrix_unit(0, 0),
        ObservableKind::AADagger => matrix_unit(1, 1),
        ObservableKind::SigmaX => pauli_matrix(Axis::X),
        ObservableKind::SigmaY => pauli_matrix(Axis::Y),
        ObservableKind::SigmaZ => pauli_matrix(Axis::Z),
        ObservableKind::MatrixUnit(r, s) => matrix_unit(r as usize, s as usize),
    }
}

fn check_site(site: usize, n: usize) -> Result<()> {
    if site == 0 || site > n {
        Err(Error::SiteOutOfRange { site, n })
    } else {
        Ok(())
    }
}

/// Product of single-site factors on distinct sites whose matrices have at
/// most one nonzero entry per row and per column. Every such operator maps
/// each basis state to a multiple of one basis state, which is how it is
/// stored.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOp {
    n: usize,
    image: Vec<Option<(usize, C64)>>,
    support: Option<(usize, usize)>,
}

impl LocalOp {
    pub fn identity(n: usize) -> Self {
        LocalOp {
            n,
            image: (0..dimension(n)).map(|s| Some((s, ONE))).collect(),
            support: None,
        }
    }

    pub fn from_factors(n: usize, factors: &[(usize, SiteMatrix)]) -> Result<Self> {
        let mut sites: Vec<usize> = Vec::with_capacity(factors.len());
        for (site, m) in factors {
            check_site(*site, n)?;
            if sites.contains(site) {
                return Err(Error::config(format!("site {site} repeated in a product")));
            }
            sites.push(*site);
            for k in 0..2 {
                let per_col = (0..2).filter(|&r| m[r][k] != ZERO).count();
                let per_row = (0..2).filter(|&c| m[k][c] != ZERO).count();
                if per_col > 1 || per_row > 1 {
                    return Err(Error::config("site factor is not a monomial matrix"));
                }
            }
        }
        let image = (0..dimension(n))
            .map(|state| {
                let mut out = state;
                let mut coef = ONE;
                for (site, m) in factors {
                    let b = site_bit(n, state, *site);
                    let r = (0..2).find(|&r| m[r][b] != ZERO)?;
                    coef *= m[r][b];
                    if r != b {
                        out ^= site_mask(n, *site);
                    }
                }
                Some((out, coef))
            })
            .collect();
        let support = match (sites.iter().min(), sites.iter().max()) {
            (Some(&lo), Some(&hi)) => Some((lo, hi)),
            _ => None,
        };
        Ok(LocalOp { n, image, support })
    }

    pub fn single(n: usize, site: usize, m: SiteMatrix) -> Result<Self> {
        Self::from_factors(n, &[(site, m)])
    }

    pub fn pauli(n: usize, site: usize, axis: Axis) -> Result<Self> {
        Self::single(n, site, pauli_matrix(axis))
    }

    /// `c_j = sigma_z_1 ... sigma_z_{j-1} a_j`.
    pub fn jordan_wigner_c(n: usize, j: usize) -> Result<Self> {
        Self::string_with(n, j, lowering_matrix())
    }

    pub fn jordan_wigner_c_dagger(n: usize, j: usize) -> Result<Self> {
        Self::string_with(n, j, matrix_unit(0, 1))
    }

    fn string_with(n: usize, j: usize, end: SiteMatrix) -> Result<Self> {
        check_site(j, n)?;
        let mut f: Vec<(usize, SiteMatrix)> = (1..j).map(|s| (s, pauli_matrix(Axis::Z))).collect();
        f.push((j, end));
        Self::from_factors(n, &f)
    }

    pub fn observable(n: usize, kind: ObservableKind, site: usize) -> Result<Self> {
        match kind {
            ObservableKind::C => Self::jordan_wigner_c(n, site),
            ObservableKind::CDagger => Self::jordan_wigner_c_dagger(n, site),
            k => Self::single(n, site, site_matrix(k)),
        }
    }

    /// Ordered product `O_{s_1} O_{s_2} ...` of one observable kind.
    pub fn observable_product(n: usize, kind: ObservableKind, sites: &[usize]) -> Result<Self> {
        let mut op = Self::identity(n);
        for &s in sites {
            op = op.compose(&Self::observable(n, kind, s)?);
        }
        Ok(op)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> Option<(usize, usize)> {
        self.support
    }

    /// Image of basis state `state`: `(target, coefficient)` or `None` if annihilated.
    pub fn image(&self, state: usize) -> Option<(usize, C64)> {
        self.image[state]
    }

    /// `self * other`.
    pub fn compose(&self, other: &LocalOp) -> LocalOp {
        assert_eq!(self.n, other.n);
        let image = other
            .image
            .iter()
            .map(|im| {
                let (mid, c1) = (*im)?;
                let (out, c2) = self.image[mid]?;
                Some((out, c2 * c1))
            })
            .collect();
        let support = match (self.support, other.support) {
            (None, s) | (s, None) => s,
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
        };
        LocalOp {
            n: self.n,
            image,
            support,
        }
    }

    pub fn adjoint(&self) -> LocalOp {
        let mut image = vec![None; self.image.len()];
        for (col, im) in self.image.iter().enumerate() {
            if let Some((row, c)) = im {
                image[*row] = Some((col, c.conj()));
            }
        }
        LocalOp {
            n: self.n,
            image,
            support: self.support,
        }
    }

    /// Exact equality of the represented matrices.
    pub fn same_matrix(&self, other: &LocalOp) -> bool {
        let clean = |v: &Option<(usize, C64)>| v.filter(|(_, c)| *c != ZERO);
        self.n == other.n && self.image.iter().zip(&other.image).all(|(a, b)| clean(a) == clean(b))
    }

    pub fn is_hermitian(&self) -> bool {
        self.same_matrix(&self.adjoint())
    }

    /// Exact test of `AB = BA` in the computational basis.
    pub fn commutes_with(&self, other: &LocalOp) -> bool {
        self.compose(other).same_matrix(&other.compose(self))
    }

    /// Operator norm: the largest coefficient modulus.
    pub fn norm(&self) -> f64 {
        self.image.iter().flatten().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.image.iter().flatten().all(|(_, c)| c.im == 0.0)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for (col, im) in self.image.iter().enumerate() {
            if let Some((row, c)) = im {
                out[*row] += c * v[col];
            }
        }
        out
    }

    /// For each column sector, the row sector it is sent to, or `None` when
    /// the whole sector is annihilated. Fails if one column sector spreads
    /// over several row sectors.
    pub fn sector_map(&self, layout: &SectorLayout) -> Option<Vec<Option<usize>>> {
        let mut map = vec![None; layout.sector_count()];
        for (col, im) in self.image.iter().enumerate() {
            if let Some((row, c)) = im {
                if *c == ZERO {
                    continue;
                }
                let (s, r) = (layout.sector_of(col), layout.sector_of(*row));
                match map[s] {
                    None => map[s] = Some(r),
                    Some(prev) if prev != r => return None,
                    _ => {}
                }
            }
        }
        Some(map)
    }

    pub fn to_dense(&self) -> Result<ManyBodyOperator> {
        check_dense(self.n)?;
        let dim = dimension(self.n);
        let mut m = DMatrix::zeros(dim, dim);
        for (col, im) in self.image.iter().enumerate() {
            if let Some((row, c)) = im {
                m[(*row, col)] += c;
            }
        }
        Ok(ManyBodyOperator {
            n: self.n,
            matrix: m,
            support: self.support,
        })
    }
}

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        Err(Error::Capacity { n, cap: DENSE_LIMIT })
    } else {
        Ok(())
    }
}

/// Dense operator on `(C^2)^{(x) n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyOperator {
    pub n: usize,
    pub matrix: DMatrix<C64>,
    /// Smallest site interval outside of which the operator is the identity;
    /// `None` for multiples of the identity or unknown supports.
    pub support: Option<(usize, usize)>,
}

impl ManyBodyOperator {
    pub fn new(n: usize, matrix: DMatrix<C64>, support: Option<(usize, usize)>) -> Result<Self> {
        check_dense(n)?;
        let dim = dimension(n);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::config(format!(
                "operator matrix is {}x{}, expected {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(ManyBodyOperator { n, matrix, support })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dense(n)?;
        let d = dimension(n);
        Ok(ManyBodyOperator {
            n,
            matrix: DMatrix::identity(d, d),
            support: None,
        })
    }

    pub fn pauli(site: usize, axis: Axis, n: usize) -> Result<Self> {
        check_dense(n)?;
        LocalOp::pauli(n, site, axis)?.to_dense()
    }

    pub fn jordan_wigner_c(j: usize, n: usize) -> Result<Self> {
        check_dense(n)?;
        LocalOp::jordan_wigner_c(n, j)?.to_dense()
    }

    pub fn observable(kind: ObservableKind, site: usize, n: usize) -> Result<Self> {
        check_dense(n)?;
        LocalOp::observable(n, kind, site)?.to_dense()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        ManyBodyOperator {
            n: self.n,
            matrix: self.matrix.adjoint(),
            support: self.support,
        }
    }

    fn merged_support(&self, other: &Self) -> Option<(usize, usize)> {
        match (self.support, other.support) {
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
            (a, b) => a.or(b),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        ManyBodyOperator {
            n: self.n,
            matrix: &self.matrix * &other.matrix,
            support: self.merged_support(other),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        ManyBodyOperator {
            n: self.n,
            matrix: &self.matrix + &other.matrix,
            support: self.merged_support(other),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        ManyBodyOperator {
            n: self.n,
            matrix: &self.matrix - &other.matrix,
            support: self.merged_support(other),
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        ManyBodyOperator {
            n: self.n,
            matrix: &self.matrix * z,
            support: self.support,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        let m = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        ManyBodyOperator {
            n: self.n,
            matrix: m,
            support: self.merged_support(other),
        }
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        let m = &self.matrix * &other.matrix + &other.matrix * &self.matrix;
        ManyBodyOperator {
            n: self.n,
            matrix: m,
            support: self.merged_support(other),
        }
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        if self.matrix.iter().all(|z| *z == ZERO) {
            return 0.0;
        }
        self.matrix.singular_values().max()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.matrix * x).as_slice().to_vec()
    }
}

/// `||AB - BA||` via a full singular value computation.
pub fn commutator_norm(a: &ManyBodyOperator, b: &ManyBodyOperator) -> f64 {
    a.commutator(b).operator_norm()
}

/// Anything that acts on state vectors of the full chain.
pub trait ApplyOperator {
    fn apply_to(&self, v: &[C64]) -> Vec<C64>;
}

impl ApplyOperator for LocalOp {
    fn apply_to(&self, v: &[C64]) -> Vec<C64> {
        self.apply(v)
    }
}

impl ApplyOperator for ManyBodyOperator {
    fn apply_to(&self, v: &[C64]) -> Vec<C64> {
        self.apply(v)
    }
}
