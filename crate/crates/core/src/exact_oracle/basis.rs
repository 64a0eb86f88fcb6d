//! Computational basis of `n` spins.
//!
//! Site `j` (1-based) is stored in bit `n - j`, so site 1 is the most
//! significant bit and matrices agree with the Kronecker order
//! `M_1 (x) M_2 (x) ... (x) M_n`. Bit value 0 is spin up (`sigma_z = +1`).

use serde::{Deserialize, Serialize};

/// Largest chain handled by dense `2^n x 2^n` operator matrices.
pub const DENSE_LIMIT: usize = 12;

pub fn dimension(n: usize) -> usize {
    1usize << n
}

pub fn site_mask(n: usize, site: usize) -> usize {
    debug_assert!((1..=n).contains(&site));
    1usize << (n - site)
}

/// Bit of `state` at `site` (0 = up, 1 = down).
pub fn site_bit(n: usize, state: usize, site: usize) -> usize {
    (state >> (n - site)) & 1
}

/// Conserved charge used to split the Hilbert space into blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorRule {
    /// The whole space is one block.
    Single,
    /// Number of down spins modulo 2; conserved by every XY chain.
    Parity,
    /// Number of down spins; conserved when all anisotropies vanish.
    Number,
}

impl SectorRule {
    pub fn charge(self, state: usize) -> usize {
        match self {
            SectorRule::Single => 0,
            SectorRule::Parity => (state.count_ones() & 1) as usize,
            SectorRule::Number => state.count_ones() as usize,
        }
    }

    fn sector_count(self, n: usize) -> usize {
        match self {
            SectorRule::Single => 1,
            SectorRule::Parity => 2.min(dimension(n)),
            SectorRule::Number => n + 1,
        }
    }
}

/// Partition of basis states by a conserved charge. States inside a sector
/// keep ascending order.
#[derive(Debug, Clone)]
pub struct SectorLayout {
    n: usize,
    rule: SectorRule,
    members: Vec<Vec<usize>>,
    position: Vec<usize>,
}

impl SectorLayout {
    pub fn new(n: usize, rule: SectorRule) -> Self {
        let dim = dimension(n);
        let mut members = vec![Vec::new(); rule.sector_count(n)];
        let mut position = vec![0; dim];
        for s in 0..dim {
            let q = rule.charge(s);
            position[s] = members[q].len();
            members[q].push(s);
        }
        SectorLayout {
            n,
            rule,
            members,
            position,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rule(&self) -> SectorRule {
        self.rule
    }

    pub fn dim(&self) -> usize {
        dimension(self.n)
    }

    pub fn sector_count(&self) -> usize {
        self.members.len()
    }

    pub fn sector_of(&self, state: usize) -> usize {
        self.rule.charge(state)
    }

    /// Index of `state` within its sector.
    pub fn position(&self, state: usize) -> usize {
        self.position[state]
    }

    pub fn members(&self, sector: usize) -> &[usize] {
        &self.members[sector]
    }

    pub fn sector_dim(&self, sector: usize) -> usize {
        self.members[sector].len()
    }
}
