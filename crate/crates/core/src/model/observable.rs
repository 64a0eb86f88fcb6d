use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-site observable families. `C` and `CDagger` are Jordan-Wigner
/// fermions and carry a string of `sigma_z` on every site to their left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservableKind {
    A,
    ADagger,
    ADaggerA,
    AADagger,
    SigmaX,
    SigmaY,
    SigmaZ,
    C,
    CDagger,
    /// `e(r, s)`: the 2x2 matrix unit with a one at row `r`, column `s` (0-based).
    MatrixUnit(u8, u8),
}

impl ObservableKind {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let kind = match t {
            "a" => Self::A,
            "a_dagger" => Self::ADagger,
            "a_dagger_a" => Self::ADaggerA,
            "a_a_dagger" => Self::AADagger,
            "sigma_x" => Self::SigmaX,
            "sigma_y" => Self::SigmaY,
            "sigma_z" => Self::SigmaZ,
            "c" => Self::C,
            "c_dagger" => Self::CDagger,
            _ => {
                let inner = t
                    .strip_prefix("matrix_unit(")
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| Error::config(format!("unknown observable `{t}`")))?;
                let idx: Vec<u8> = inner
                    .split(',')
                    .map(|s| s.trim().parse::<u8>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::config(format!("bad matrix unit `{t}`")))?;
                match idx.as_slice() {
                    [r, s] if *r < 2 && *s < 2 => Self::MatrixUnit(*r, *s),
                    _ => return Err(Error::config(format!("bad matrix unit `{t}`"))),
                }
            }
        };
        Ok(kind)
    }

    pub fn name(&self) -> String {
        match self {
            Self::A => "a".into(),
            Self::ADagger => "a_dagger".into(),
            Self::ADaggerA => "a_dagger_a".into(),
            Self::AADagger => "a_a_dagger".into(),
            Self::SigmaX => "sigma_x".into(),
            Self::SigmaY => "sigma_y".into(),
            Self::SigmaZ => "sigma_z".into(),
            Self::C => "c".into(),
            Self::CDagger => "c_dagger".into(),
            Self::MatrixUnit(r, s) => format!("matrix_unit({r},{s})"),
        }
    }

    /// Whether the operator acts on sites left of its nominal site.
    pub fn has_string(&self) -> bool {
        matches!(self, Self::C | Self::CDagger)
    }
}

/// Left observable on the sites `left_sites` (the product of `kind_left` on
/// each of them) and right observable on site `right_site`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservablePair {
    pub left_sites: Vec<usize>,
    pub right_site: usize,
    pub kind_left: ObservableKind,
    pub kind_right: ObservableKind,
}

impl ObservablePair {
    pub fn new(left_sites: Vec<usize>, right_site: usize, kind_left: ObservableKind, kind_right: ObservableKind) -> Self {
        Self {
            left_sites,
            right_site,
            kind_left,
            kind_right,
        }
    }

    pub fn single(j: usize, k: usize, kind_left: ObservableKind, kind_right: ObservableKind) -> Self {
        Self::new(vec![j], k, kind_left, kind_right)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.left_sites.is_empty() {
            return Err(Error::config("left observable needs at least one site"));
        }
        if let Some(&bad) = self.left_sites.iter().find(|&&j| j == 0 || j > n) {
            return Err(Error::SiteOutOfRange { site: bad, n });
        }
        let mut sorted = self.left_sites.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.left_sites.len() {
            return Err(Error::config("left sites must be distinct"));
        }
        if self.right_site == 0 || self.right_site > n {
            return Err(Error::SiteOutOfRange {
                site: self.right_site,
                n,
            });
        }
        let jmax = *sorted.last().unwrap();
        if jmax >= self.right_site {
            return Err(Error::config(format!(
                "left support (max site {jmax}) must lie strictly left of the right site {}",
                self.right_site
            )));
        }
        if self.kind_right.has_string() {
            return Err(Error::config(
                "the right observable must be local; Jordan-Wigner fermions are not",
            ));
        }
        Ok(())
    }

    /// `min_{j in J} (k - j)`.
    pub fn distance(&self) -> usize {
        let jmax = self.left_sites.iter().copied().max().unwrap_or(0);
        self.right_site.saturating_sub(jmax)
    }
}
