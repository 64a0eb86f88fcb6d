//! Operators in the energy eigenbasis, stored as sector blocks.
//!
//! In this frame Heisenberg evolution is a phase per matrix element,
//! `tau_t(X)_ab = exp(i (E_a - E_b) t) X_ab`, and operator norms are
//! unchanged, so commutator sweeps never go back to the spin basis.

use nalgebra::{DMatrix, DVector};

use super::hamiltonian::EvolutionContext;
use super::lanczos::split_norm;
use super::operator::LocalOp;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Block {
    row: usize,
    re: DMatrix<f64>,
    im: Option<DMatrix<f64>>,
}

/// Block operator: entry `s` holds the block from column sector `s`, if any.
#[derive(Debug, Clone)]
pub struct FrameOp {
    blocks: Vec<Option<Block>>,
    hermitian: bool,
}

/// Sector-wise cosines and sines of `E t`.
struct Phases {
    cos: Vec<DVector<f64>>,
    sin: Vec<DVector<f64>>,
}

impl Phases {
    fn new(ctx: &EvolutionContext, t: f64) -> Self {
        let count = ctx.layout().sector_count();
        let mut cos = Vec::with_capacity(count);
        let mut sin = Vec::with_capacity(count);
        for s in 0..count {
            let e = ctx.sector_energies(s);
            cos.push(e.map(|x| (x * t).cos()));
            sin.push(e.map(|x| (x * t).sin()));
        }
        Phases { cos, sin }
    }
}

fn mul_split(
    ar: &DMatrix<f64>,
    ai: Option<&DMatrix<f64>>,
    br: &DMatrix<f64>,
    bi: Option<&DMatrix<f64>>,
) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
    match (ai, bi) {
        (None, None) => (ar * br, None),
        (Some(ai), None) => (ar * br, Some(ai * br)),
        (None, Some(bi)) => (ar * br, Some(ar * bi)),
        (Some(ai), Some(bi)) => {
            let mut re = ar * br;
            re.gemm(-1.0, ai, bi, 1.0);
            let mut im = ar * bi;
            im.gemm(1.0, ai, br, 1.0);
            (re, Some(im))
        }
    }
}

impl FrameOp {
    /// `V^t A V` for an operator given in the computational basis.
    pub fn from_local(ctx: &EvolutionContext, op: &LocalOp) -> Result<Self> {
        let layout = ctx.layout();
        let map = op
            .sector_map(layout)
            .ok_or_else(|| Error::config("operator does not respect the chain's symmetry sectors"))?;
        let real = op.is_real();
        let mut blocks = Vec::with_capacity(map.len());
        for (s, target) in map.iter().enumerate() {
            let Some(r) = *target else {
                blocks.push(None);
                continue;
            };
            let vs = ctx.sector_vectors(s);
            let vr = ctx.sector_vectors(r);
            let mut av_re = DMatrix::zeros(layout.sector_dim(r), vs.ncols());
            let mut av_im = DMatrix::zeros(layout.sector_dim(r), vs.ncols());
            for (p, &state) in layout.members(s).iter().enumerate() {
                if let Some((row, c)) = op.image(state) {
                    let i = layout.position(row);
                    for k in 0..vs.ncols() {
                        let x = vs[(p, k)];
                        av_re[(i, k)] += c.re * x;
                        av_im[(i, k)] += c.im * x;
                    }
                }
            }
            let re = vr.tr_mul(&av_re);
            let im = if real { None } else { Some(vr.tr_mul(&av_im)) };
            blocks.push(Some(Block { row: r, re, im }));
        }
        Ok(FrameOp {
            blocks,
            hermitian: op.is_hermitian(),
        })
    }

    /// Heisenberg picture `exp(iHt) X exp(-iHt)`.
    pub fn evolve(&self, ctx: &EvolutionContext, t: f64) -> FrameOp {
        self.evolve_with(&Phases::new(ctx, t))
    }

    fn evolve_with(&self, ph: &Phases) -> FrameOp {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(s, b)| {
                let b = b.as_ref()?;
                let (cr, sr) = (&ph.cos[b.row], &ph.sin[b.row]);
                let (cc, sc) = (&ph.cos[s], &ph.sin[s]);
                let rows = b.re.nrows();
                let cols = b.re.ncols();
                let mut re = DMatrix::zeros(rows, cols);
                let mut im = DMatrix::zeros(rows, cols);
                for k in 0..cols {
                    for a in 0..rows {
                        // exp(i(Ea - Eb)t) = (ca + i sa)(cb - i sb)
                        let pr = cr[a] * cc[k] + sr[a] * sc[k];
                        let pi = sr[a] * cc[k] - cr[a] * sc[k];
                        let xr = b.re[(a, k)];
                        let xi = b.im.as_ref().map_or(0.0, |m| m[(a, k)]);
                        re[(a, k)] = xr * pr - xi * pi;
                        im[(a, k)] = xr * pi + xi * pr;
                    }
                }
                Some(Block {
                    row: b.row,
                    re,
                    im: Some(im),
                })
            })
            .collect();
        FrameOp {
            blocks,
            hermitian: self.hermitian,
        }
    }

    /// `self * other`.
    pub fn mul(&self, other: &FrameOp) -> FrameOp {
        let blocks = other
            .blocks
            .iter()
            .map(|b| {
                let b = b.as_ref()?;
                let a = self.blocks[b.row].as_ref()?;
                let (re, im) = mul_split(&a.re, a.im.as_ref(), &b.re, b.im.as_ref());
                Some(Block { row: a.row, re, im })
            })
            .collect();
        FrameOp {
            blocks,
            hermitian: false,
        }
    }

    pub fn adjoint(&self) -> FrameOp {
        let mut blocks: Vec<Option<Block>> = vec![None; self.blocks.len()];
        for (s, b) in self.blocks.iter().enumerate() {
            if let Some(b) = b {
                blocks[b.row] = Some(Block {
                    row: s,
                    re: b.re.transpose(),
                    im: b.im.as_ref().map(|m| -m.transpose()),
                });
            }
        }
        FrameOp {
            blocks,
            hermitian: self.hermitian,
        }
    }

    pub fn sub(&self, other: &FrameOp) -> Result<FrameOp> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            let block = match (a, b) {
                (None, None) => None,
                (Some(a), None) => Some(a.clone()),
                (None, Some(b)) => Some(Block {
                    row: b.row,
                    re: -&b.re,
                    im: b.im.as_ref().map(|m| -m),
                }),
                (Some(a), Some(b)) => {
                    if a.row != b.row {
                        return Err(Error::numerical("operator difference mixes symmetry sectors"));
                    }
                    let im = match (&a.im, &b.im) {
                        (None, None) => None,
                        (Some(x), None) => Some(x.clone()),
                        (None, Some(y)) => Some(-y),
                        (Some(x), Some(y)) => Some(x - y),
                    };
                    Some(Block {
                        row: a.row,
                        re: &a.re - &b.re,
                        im,
                    })
                }
            };
            blocks.push(block);
        }
        Ok(FrameOp {
            blocks,
            hermitian: false,
        })
    }

    /// `[self, other]`, using `YX = (XY)^*` when both factors are hermitian.
    pub fn commutator(&self, other: &FrameOp) -> Result<FrameOp> {
        let xy = self.mul(other);
        if self.hermitian && other.hermitian {
            xy.sub(&xy.adjoint())
        } else {
            xy.sub(&other.mul(self))
        }
    }

    /// Operator norm. Distinct column sectors land in distinct row sectors,
    /// so the norm is the largest block norm.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .map(|b| split_norm(&b.re, b.im.as_ref()))
            .fold(0.0, f64::max)
    }

    /// Element `<a| X |b>` for eigenstate `b` of column sector `s`: the column as
    /// `(row sector, re, im)`.
    pub fn column(&self, sector: usize, index: usize) -> Option<(usize, DVector<f64>, DVector<f64>)> {
        let b = self.blocks[sector].as_ref()?;
        let re = b.re.column(index).into_owned();
        let im = b.im.as_ref().map_or_else(|| DVector::zeros(re.len()), |m| m.column(index).into_owned());
        Some((b.row, re, im))
    }
}

/// Precomputed `A` and `B` for repeated `||[tau_t(A), B]||` evaluations.
#[derive(Debug, Clone)]
pub struct CommutatorProbe {
    a_local: LocalOp,
    b_local: LocalOp,
    a: FrameOp,
    b: FrameOp,
}

impl CommutatorProbe {
    pub fn new(ctx: &EvolutionContext, a: &LocalOp, b: &LocalOp) -> Result<Self> {
        Ok(CommutatorProbe {
            a_local: a.clone(),
            b_local: b.clone(),
            a: FrameOp::from_local(ctx, a)?,
            b: FrameOp::from_local(ctx, b)?,
        })
    }

    /// `||[tau_t(A), B]||`. At `t = 0` the commutator is formed exactly in
    /// the spin basis, so commuting observables give exactly zero.
    pub fn norm_at(&self, ctx: &EvolutionContext, t: f64) -> Result<f64> {
        if t == 0.0 && self.a_local.commutes_with(&self.b_local) {
            return Ok(0.0);
        }
        Ok(self.a.evolve(ctx, t).commutator(&self.b)?.norm())
    }

    pub fn a_norm(&self) -> f64 {
        self.a_local.norm()
    }

    pub fn b_norm(&self) -> f64 {
        self.b_local.norm()
    }
}

/// Norms `||[tau_t(A), B_i]||` for several `B_i` sharing one evolved `A`.
pub fn commutator_norms(ctx: &EvolutionContext, a: &FrameOp, a_local: &LocalOp, bs: &[(FrameOp, LocalOp)], t: f64) -> Result<Vec<f64>> {
    let at = if t == 0.0 { None } else { Some(a.evolve(ctx, t)) };
    bs.iter()
        .map(|(b, b_local)| match &at {
            None if a_local.commutes_with(b_local) => Ok(0.0),
            None => Ok(a.commutator(b)?.norm()),
            Some(at) => Ok(at.commutator(b)?.norm()),
        })
        .collect()
}
