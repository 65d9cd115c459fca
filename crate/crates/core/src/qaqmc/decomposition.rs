use crate::error::{Error, Result};
use crate::model::ModelSpec;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

/// One elementary operator of `G(s) = c(s) - H(s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    /// Diagonal bond operator on edge `b`.
    Bond(u32),
    /// Diagonal site constant `(1 - s) h`.
    Constant(u32),
    /// Spin flip `(1 - s) h sigma^x_i`.
    Flip(u32),
}

impl Op {
    #[inline]
    pub fn is_diagonal(self) -> bool {
        !matches!(self, Op::Flip(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BondTerm {
    pub i: u32,
    pub j: u32,
    /// `|J_e|`
    pub strength: f64,
    pub antiferro: bool,
}

impl BondTerm {
    /// Whether the bond operator has a nonzero matrix element: antiparallel
    /// spins for antiferromagnetic edges, parallel spins for ferromagnetic
    /// ones.
    #[inline]
    pub fn active(&self, spins: &[i8]) -> bool {
        let anti = spins[self.i as usize] != spins[self.j as usize];
        anti == self.antiferro && self.strength > 0.0
    }
}

/// Elementary operators and their matrix elements at one value of `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub s: f64,
    pub bonds: Vec<BondTerm>,
    /// `2 s |J_e|` on active configurations, per edge.
    pub bond_values: Vec<f64>,
    pub site_constant: f64,
    pub site_flip: f64,
    /// `c(s) = s sum_e |J_e| + (1 - s) h N`.
    pub shift: f64,
}

impl Decomposition {
    /// Matrix element of a diagonal bond operator in configuration `spins`.
    pub fn bond_element(&self, b: usize, spins: &[i8]) -> f64 {
        if self.bonds[b].active(spins) {
            self.bond_values[b]
        } else {
            0.0
        }
    }

    /// Diagonal of `G(s)` in configuration `spins`.
    pub fn diagonal(&self, spins: &[i8]) -> f64 {
        let bonds: f64 = (0..self.bonds.len()).map(|b| self.bond_element(b, spins)).sum();
        bonds + self.site_constant * spins.len() as f64
    }
}

pub fn bond_terms(model: &ModelSpec) -> Vec<BondTerm> {
    model
        .graph
        .edges()
        .iter()
        .map(|e| BondTerm { i: e.i, j: e.j, strength: e.coupling.abs(), antiferro: e.coupling > 0.0 })
        .collect()
}

pub fn build_elementary_decomposition(model: &ModelSpec, s: f64) -> Result<Decomposition> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidProtocol(format!("s = {s} outside [0, 1]")));
    }
    let bonds = bond_terms(model);
    let bond_values = bonds.iter().map(|b| 2.0 * s * b.strength).collect();
    let site = (1.0 - s) * model.field;
    Ok(Decomposition { s, bonds, bond_values, site_constant: site, site_flip: site, shift: model.shift(s) })
}

#[derive(Debug)]
enum BondPicker {
    Uniform,
    Alias(WeightedAliasIndex<f64>),
}

/// Static coupling data shared by all strings of one instance.
#[derive(Debug)]
pub(crate) struct Couplings {
    pub n: usize,
    pub field: f64,
    pub bonds: Vec<BondTerm>,
    pub total_abs: f64,
    picker: BondPicker,
}

impl Couplings {
    pub fn new(model: &ModelSpec) -> Self {
        let bonds = bond_terms(model);
        let total_abs = bonds.iter().map(|b| b.strength).sum();
        let uniform = bonds.windows(2).all(|w| w[0].strength == w[1].strength);
        let picker = if uniform || bonds.is_empty() {
            BondPicker::Uniform
        } else {
            BondPicker::Alias(
                WeightedAliasIndex::new(bonds.iter().map(|b| b.strength).collect())
                    .expect("bond strengths are finite and not all zero"),
            )
        };
        Self { n: model.n(), field: model.field, bonds, total_abs, picker }
    }

    /// Bond index drawn with probability proportional to `|J_e|`.
    #[inline]
    pub fn pick_bond<R: Rng>(&self, rng: &mut R) -> usize {
        match &self.picker {
            BondPicker::Uniform => rng.random_range(0..self.bonds.len()),
            BondPicker::Alias(a) => a.sample(rng),
        }
    }

    /// Matrix element of `op` acting on `spins` at parameter `s`.
    #[inline]
    pub fn element(&self, op: Op, s: f64, spins: &[i8]) -> f64 {
        match op {
            Op::Bond(b) => {
                let bond = &self.bonds[b as usize];
                if bond.active(spins) {
                    2.0 * s * bond.strength
                } else {
                    0.0
                }
            }
            Op::Constant(_) | Op::Flip(_) => (1.0 - s) * self.field,
        }
    }
}
