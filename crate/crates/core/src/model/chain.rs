use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of one open XY chain: couplings `mu`, anisotropies `gamma`
/// (both on the `n - 1` bonds) and transverse fields `nu` (on the `n` sites).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n: usize,
    mu: Vec<f64>,
    gamma: Vec<f64>,
    nu: Vec<f64>,
}

impl ChainSpec {
    pub fn new(mu: Vec<f64>, gamma: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        let n = nu.len();
        if n == 0 {
            return Err(Error::config("chain needs at least one site"));
        }
        if mu.len() != n - 1 || gamma.len() != n - 1 {
            return Err(Error::config(format!(
                "chain of {n} sites needs {} couplings and anisotropies, got {} and {}",
                n - 1,
                mu.len(),
                gamma.len()
            )));
        }
        if let Some(j) = mu.iter().position(|&m| m == 0.0) {
            return Err(Error::config(format!(
                "coupling mu_{} vanishes; the chain would split",
                j + 1
            )));
        }
        if mu.iter().chain(&gamma).chain(&nu).any(|x| !x.is_finite()) {
            return Err(Error::config("chain coefficients must be finite"));
        }
        Ok(Self { n, mu, gamma, nu })
    }

    /// Constant coupling and anisotropy on every bond.
    pub fn uniform(mu: f64, gamma: f64, nu: Vec<f64>) -> Result<Self> {
        let bonds = nu.len().saturating_sub(1);
        Self::new(vec![mu; bonds], vec![gamma; bonds], nu)
    }

    /// Isotropic chain with constant coupling `mu`.
    pub fn isotropic_chain(mu: f64, nu: Vec<f64>) -> Result<Self> {
        Self::uniform(mu, 0.0, nu)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// All anisotropies vanish and all couplings are equal.
    pub fn isotropic(&self) -> bool {
        self.gamma.iter().all(|&g| g == 0.0) && self.mu.windows(2).all(|w| w[0] == w[1])
    }

    /// The Hamiltonian commutes with the number of down spins iff every
    /// anisotropy vanishes (couplings may vary).
    pub fn conserves_number(&self) -> bool {
        self.gamma.iter().all(|&g| g == 0.0)
    }

    /// Same couplings, new fields.
    pub fn with_nu(&self, nu: Vec<f64>) -> Result<Self> {
        if nu.len() != self.n {
            return Err(Error::config(format!(
                "expected {} field values, got {}",
                self.n,
                nu.len()
            )));
        }
        Self::new(self.mu.clone(), self.gamma.clone(), nu)
    }

    /// `max_j |mu_j| (1 + |gamma_j|)`, zero for a single site.
    pub fn hopping_bound(&self) -> f64 {
        self.mu
            .iter()
            .zip(&self.gamma)
            .map(|(m, g)| m.abs() * (1.0 + g.abs()))
            .fold(0.0, f64::max)
    }

    pub fn field_bound(&self) -> f64 {
        self.nu.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}
