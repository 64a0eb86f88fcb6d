use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::{dimension, site_bit, site_mask, SectorLayout, SectorRule, DENSE_LIMIT};
use super::operator::ManyBodyOperator;
use crate::error::{Error, Result};
use crate::model::{ChainSpec, ORACLE_CAP_LIMIT};

/// Relative spectral separation below which the ground state counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Matrix of the chain Hamiltonian restricted to `states`, which must be
/// closed under the dynamics.
fn sector_block(spec: &ChainSpec, states: &[usize], layout: &SectorLayout) -> DMatrix<f64> {
    let n = spec.n();
    let d = states.len();
    let mut h = DMatrix::zeros(d, d);
    for (col, &s) in states.iter().enumerate() {
        let mut diag = 0.0;
        for j in 1..=n {
            let sign = if site_bit(n, s, j) == 0 { 1.0 } else { -1.0 };
            diag += spec.nu()[j - 1] * sign;
        }
        h[(col, col)] += diag;
        for j in 1..n {
            let (b1, b2) = (site_bit(n, s, j), site_bit(n, s, j + 1));
            let flipped = s ^ site_mask(n, j) ^ site_mask(n, j + 1);
            let coef = if b1 != b2 {
                2.0 * spec.mu()[j - 1]
            } else {
                2.0 * spec.mu()[j - 1] * spec.gamma()[j - 1]
            };
            if coef != 0.0 {
                h[(layout.position(flipped), col)] += coef;
            }
        }
    }
    h
}

/// Dense Hamiltonian in the computational basis.
pub fn hamiltonian_matrix(spec: &ChainSpec) -> Result<DMatrix<f64>> {
    let n = spec.n();
    if n > DENSE_LIMIT {
        return Err(Error::Capacity { n, cap: DENSE_LIMIT });
    }
    let layout = SectorLayout::new(n, SectorRule::Single);
    Ok(sector_block(spec, layout.members(0), &layout))
}

/// Finest sector rule that the chain's dynamics preserves.
pub fn natural_rule(spec: &ChainSpec) -> SectorRule {
    if spec.conserves_number() {
        SectorRule::Number
    } else {
        SectorRule::Parity
    }
}

/// Diagonalized chain Hamiltonian, stored sector by sector.
#[derive(Debug, Clone)]
pub struct EvolutionContext {
    spec: ChainSpec,
    layout: SectorLayout,
    energies: Vec<DVector<f64>>,
    vectors: Vec<DMatrix<f64>>,
    spectrum: Vec<f64>,
    ground_sector: usize,
    ground_index: usize,
    pub ground_energy: f64,
    pub first_excited: f64,
}

/// Diagonalize the chain with the sector rule it naturally conserves.
pub fn build_hamiltonian(spec: &ChainSpec, cap: usize) -> Result<EvolutionContext> {
    EvolutionContext::with_rule(spec, cap, natural_rule(spec))
}

impl EvolutionContext {
    pub fn with_rule(spec: &ChainSpec, cap: usize, rule: SectorRule) -> Result<Self> {
        let n = spec.n();
        let cap = cap.min(ORACLE_CAP_LIMIT);
        if n > cap {
            return Err(Error::Capacity { n, cap });
        }
        if rule == SectorRule::Number && !spec.conserves_number() {
            return Err(Error::config("particle number is not conserved by an anisotropic chain"));
        }
        let layout = SectorLayout::new(n, rule);
        let mut energies = Vec::with_capacity(layout.sector_count());
        let mut vectors = Vec::with_capacity(layout.sector_count());
        for s in 0..layout.sector_count() {
            let h = sector_block(spec, layout.members(s), &layout);
            let (vals, mut vecs) = crate::linalg::symmetric_eigen(&h)
                .map_err(|_| Error::numerical(format!("oracle eigensolver failed in sector {s}")))?;
            for mut col in vecs.column_iter_mut() {
                let lead = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
                if lead < 0.0 {
                    col.neg_mut();
                }
            }
            energies.push(vals);
            vectors.push(vecs);
        }
        let mut spectrum: Vec<f64> = energies.iter().flat_map(|e| e.iter().copied()).collect();
        spectrum.sort_by(f64::total_cmp);
        let (mut ground_sector, mut ground_index, mut ground_energy) = (0, 0, f64::INFINITY);
        for (s, e) in energies.iter().enumerate() {
            if !e.is_empty() && e[0] < ground_energy {
                ground_sector = s;
                ground_index = 0;
                ground_energy = e[0];
            }
        }
        let first_excited = spectrum.get(1).copied().unwrap_or(f64::INFINITY);
        Ok(EvolutionContext {
            spec: spec.clone(),
            layout,
            energies,
            vectors,
            spectrum,
            ground_sector,
            ground_index,
            ground_energy,
            first_excited,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn layout(&self) -> &SectorLayout {
        &self.layout
    }

    /// All `2^n` eigenvalues, ascending.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn sector_energies(&self, sector: usize) -> &DVector<f64> {
        &self.energies[sector]
    }

    /// Columns are eigenvectors on the states of the sector.
    pub fn sector_vectors(&self, sector: usize) -> &DMatrix<f64> {
        &self.vectors[sector]
    }

    pub fn gap(&self) -> f64 {
        self.first_excited - self.ground_energy
    }

    pub fn is_degenerate(&self) -> bool {
        let scale = self.spectrum.iter().fold(1.0f64, |m, e| m.max(e.abs()));
        self.gap() <= DEGENERACY_TOL * scale
    }

    pub fn ground_vector(&self) -> DVector<f64> {
        let mut psi = DVector::zeros(dimension(self.n()));
        let v = self.vectors[self.ground_sector].column(self.ground_index);
        for (p, &s) in self.layout.members(self.ground_sector).iter().enumerate() {
            psi[s] = v[p];
        }
        psi
    }

    pub fn ground_vector_complex(&self) -> Vec<Complex64> {
        self.ground_vector().iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    /// Dense Hamiltonian as an operator.
    pub fn hamiltonian(&self) -> Result<ManyBodyOperator> {
        let h = hamiltonian_matrix(&self.spec)?;
        ManyBodyOperator::new(self.n(), h.map(|x| Complex64::new(x, 0.0)), Some((1, self.n())))
    }

    /// Orthogonal matrix of all eigenvectors (columns), grouped by sector and
    /// ascending within each sector, together with the matching energies.
    pub fn eigenbasis(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.n();
        if n > DENSE_LIMIT {
            return Err(Error::Capacity { n, cap: DENSE_LIMIT });
        }
        let dim = dimension(n);
        let mut v = DMatrix::zeros(dim, dim);
        let mut e = DVector::zeros(dim);
        let mut col = 0;
        for s in 0..self.layout.sector_count() {
            let members = self.layout.members(s);
            for k in 0..members.len() {
                e[col] = self.energies[s][k];
                for (p, &state) in members.iter().enumerate() {
                    v[(state, col)] = self.vectors[s][(p, k)];
                }
                col += 1;
            }
        }
        Ok((e, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_oracle::operator::{Axis, ManyBodyOperator};
    use nalgebra::SymmetricEigen;

    fn pauli_sum(spec: &ChainSpec) -> DMatrix<f64> {
        let n = spec.n();
        let p = |s, a| ManyBodyOperator::pauli(s, a, n).unwrap();
        let dim = dimension(n);
        let mut h = ManyBodyOperator::new(n, DMatrix::zeros(dim, dim), None).unwrap();
        for j in 1..n {
            let (mu, g) = (spec.mu()[j - 1], spec.gamma()[j - 1]);
            let xx = p(j, Axis::X).mul(&p(j + 1, Axis::X)).scale((mu * (1.0 + g)).into());
            let yy = p(j, Axis::Y).mul(&p(j + 1, Axis::Y)).scale((mu * (1.0 - g)).into());
            h = h.add(&xx).add(&yy);
        }
        for j in 1..=n {
            h = h.add(&p(j, Axis::Z).scale(spec.nu()[j - 1].into()));
        }
        assert!(h.matrix.iter().all(|z| z.im.abs() < 1e-15));
        h.matrix.map(|z| z.re)
    }

    fn sample_spec() -> ChainSpec {
        ChainSpec::new(vec![1.0, -0.7, 1.3, 0.4], vec![0.3, -0.5, 0.0, 0.9], vec![0.2, -1.1, 0.6, 0.0, 1.7]).unwrap()
    }

    #[test]
    fn rule_assembly_matches_pauli_sum() {
        let spec = sample_spec();
        let h = hamiltonian_matrix(&spec).unwrap();
        assert!((h - pauli_sum(&spec)).amax() < 1e-14);
    }

    #[test]
    fn single_site_field() {
        let spec = ChainSpec::isotropic_chain(1.0, vec![0.8]).unwrap();
        let ctx = build_hamiltonian(&spec, 10).unwrap();
        assert_eq!(ctx.spectrum(), &[-0.8, 0.8]);
        assert!((ctx.gap() - 1.6).abs() < 1e-15);
    }

    #[test]
    fn two_site_clean_spectrum() {
        let spec = ChainSpec::isotropic_chain(1.0, vec![0.0, 0.0]).unwrap();
        let ctx = build_hamiltonian(&spec, 10).unwrap();
        let e = ctx.spectrum();
        let want = [-2.0, 0.0, 0.0, 2.0];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let brute = SymmetricEigen::new(pauli_sum(&spec)).eigenvalues;
        let mut brute: Vec<f64> = brute.iter().copied().collect();
        brute.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn sector_rules_give_the_same_spectrum() {
        let iso = ChainSpec::isotropic_chain(1.0, vec![0.3, -0.2, 0.9, 0.1, -0.6]).unwrap();
        let a = EvolutionContext::with_rule(&iso, 10, SectorRule::Number).unwrap();
        let b = EvolutionContext::with_rule(&iso, 10, SectorRule::Parity).unwrap();
        let c = EvolutionContext::with_rule(&iso, 10, SectorRule::Single).unwrap();
        for ((x, y), z) in a.spectrum().iter().zip(b.spectrum()).zip(c.spectrum()) {
            assert!((x - y).abs() < 1e-12 && (x - z).abs() < 1e-12);
        }
        assert!(EvolutionContext::with_rule(&sample_spec(), 10, SectorRule::Number).is_err());
    }

    #[test]
    fn ground_vector_is_an_eigenvector() {
        let spec = sample_spec();
        let ctx = build_hamiltonian(&spec, 10).unwrap();
        let h = hamiltonian_matrix(&spec).unwrap();
        let psi = ctx.ground_vector();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let r = (&h * &psi - &psi * ctx.ground_energy).amax();
        assert!(r < 1e-10, "{r} {:?} {}", ctx.spectrum(), psi);
        let (e, v) = ctx.eigenbasis().unwrap();
        assert!((v.transpose() * &h * &v - DMatrix::from_diagonal(&e)).amax() < 1e-10);
    }

    #[test]
    fn capacity_is_enforced() {
        let spec = ChainSpec::isotropic_chain(1.0, vec![0.0; 9]).unwrap();
        assert!(matches!(build_hamiltonian(&spec, 8), Err(Error::Capacity { n: 9, cap: 8 })));
        assert!(build_hamiltonian(&spec, 9).is_ok());
    }
}
