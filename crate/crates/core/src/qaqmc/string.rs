//! Operator-string configurations and their Monte Carlo updates.

use super::decomposition::{Couplings, Op};
use super::protocol::QuenchProtocol;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::rng::{rng_from_seed, SimRng};
use rand::Rng;
use std::sync::Arc;

/// `s` per string position.
#[derive(Clone, Debug)]
enum SlotSchedule {
    /// Forward schedule `s_1..s_m`; the string is its palindrome.
    Palindrome(Arc<[f64]>),
    Uniform(f64),
}

impl SlotSchedule {
    #[inline]
    fn s(&self, p: usize, len: usize) -> f64 {
        match self {
            SlotSchedule::Palindrome(s) => {
                if p < s.len() {
                    s[p]
                } else {
                    s[len - 1 - p]
                }
            }
            SlotSchedule::Uniform(s) => *s,
        }
    }
}

const UNDECIDED: u8 = 2;

/// A configuration of the sampled operator product: free boundary spins on
/// both ends and one elementary operator per slot.
#[derive(Clone, Debug)]
pub struct OperatorString {
    couplings: Arc<Couplings>,
    schedule: SlotSchedule,
    ops: Vec<Op>,
    left: Vec<i8>,
    right: Vec<i8>,
    rng: SimRng,
    spins: Vec<i8>,
    parent: Vec<u32>,
    seg_flip: Vec<u8>,
    cur: Vec<u32>,
    has_bond: Vec<bool>,
}

/// Fresh string for `protocol` on `model`.
pub fn init_string(model: &ModelSpec, protocol: &QuenchProtocol, seed: u64) -> Result<OperatorString> {
    OperatorString::new(Arc::new(Couplings::new(model)), protocol, seed)
}

#[inline]
fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = parent[x as usize];
    }
    x
}

impl OperatorString {
    pub(crate) fn new(couplings: Arc<Couplings>, protocol: &QuenchProtocol, seed: u64) -> Result<Self> {
        let n = couplings.n;
        let len = protocol.string_len();
        let schedule = match protocol.mode {
            super::QuenchMode::Hamiltonian => SlotSchedule::Palindrome(protocol.schedule().into()),
            super::QuenchMode::SimulationTime => SlotSchedule::Uniform(protocol.s_start),
        };
        let mut rng = rng_from_seed(seed);
        let left: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let mut ops = Vec::with_capacity(len);
        for p in 0..len {
            let s = schedule.s(p, len);
            if s < 1.0 {
                ops.push(Op::Constant((p % n) as u32));
            } else {
                // no site operators at s = 1; use any active bond
                let b = couplings
                    .bonds
                    .iter()
                    .position(|b| b.active(&left))
                    .ok_or_else(|| Error::InvalidProtocol("no active bond for an s = 1 slot".into()))?;
                ops.push(Op::Bond(b as u32));
            }
        }
        let right = left.clone();
        Ok(Self {
            couplings,
            schedule,
            ops,
            left,
            right,
            rng,
            spins: vec![0; n],
            parent: Vec::new(),
            seg_flip: Vec::new(),
            cur: vec![0; n],
            has_bond: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.couplings.n
    }

    /// Number of slots, `2m`.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn left(&self) -> &[i8] {
        &self.left
    }

    pub fn right(&self) -> &[i8] {
        &self.right
    }

    /// `s` at 0-based string position `p`.
    pub fn slot_s(&self, p: usize) -> f64 {
        self.schedule.s(p, self.ops.len())
    }

    /// Sets a uniform `s` on every slot (simulation-time dynamics).
    pub fn set_uniform_s(&mut self, s: f64) {
        self.schedule = SlotSchedule::Uniform(s);
    }

    /// Heat-bath resampling of every diagonal slot among the diagonal
    /// operators, with probabilities proportional to their matrix elements
    /// in the propagated configuration.
    pub fn diagonal_sweep(&mut self) {
        self.diagonal_sweep_recording(&[], &mut []);
    }

    /// Diagonal sweep that also copies the propagated configuration at each
    /// cut in `cuts` (ascending) into consecutive `n`-blocks of `out`. Cut `c`
    /// is the configuration after the first `c` operators.
    pub fn diagonal_sweep_recording(&mut self, cuts: &[usize], out: &mut [i8]) {
        let n = self.couplings.n;
        let len = self.ops.len();
        let field = self.couplings.field;
        let n_bonds = self.couplings.bonds.len();
        self.spins.copy_from_slice(&self.left);
        let mut next_cut = 0;
        while next_cut < cuts.len() && cuts[next_cut] == 0 {
            out[next_cut * n..(next_cut + 1) * n].copy_from_slice(&self.spins);
            next_cut += 1;
        }
        for p in 0..len {
            match self.ops[p] {
                Op::Flip(i) => self.spins[i as usize] = -self.spins[i as usize],
                _ => {
                    let s = self.schedule.s(p, len);
                    let w_site = (1.0 - s) * field;
                    let total_site = w_site * n as f64;
                    let total = total_site + 2.0 * s * self.couplings.total_abs;
                    debug_assert!(
                        self.couplings.element(self.ops[p], s, &self.spins) > 0.0,
                        "zero-weight diagonal operator at slot {p}"
                    );
                    loop {
                        let u = self.rng.random::<f64>() * total;
                        if u < total_site {
                            let i = ((u / w_site) as usize).min(n - 1);
                            self.ops[p] = Op::Constant(i as u32);
                            break;
                        }
                        if n_bonds == 0 {
                            continue;
                        }
                        let b = self.couplings.pick_bond(&mut self.rng);
                        if self.couplings.bonds[b].active(&self.spins) {
                            self.ops[p] = Op::Bond(b as u32);
                            break;
                        }
                    }
                }
            }
            while next_cut < cuts.len() && cuts[next_cut] == p + 1 {
                out[next_cut * n..(next_cut + 1) * n].copy_from_slice(&self.spins);
                next_cut += 1;
            }
        }
        debug_assert_eq!(self.spins, self.right);
    }

    /// Propagated configurations at `cuts` without changing the string.
    pub fn snapshot(&mut self, cuts: &[usize]) -> Vec<i8> {
        let n = self.couplings.n;
        let mut out = vec![0i8; cuts.len() * n];
        self.spins.copy_from_slice(&self.left);
        let mut next = 0;
        for p in 0..=self.ops.len() {
            while next < cuts.len() && cuts[next] == p {
                out[next * n..(next + 1) * n].copy_from_slice(&self.spins);
                next += 1;
            }
            if p < self.ops.len() {
                if let Op::Flip(i) = self.ops[p] {
                    self.spins[i as usize] = -self.spins[i as usize];
                }
            }
        }
        out
    }

    /// Labels world-line segments: a new segment starts at every site
    /// operator. Bond operators join the segments of their two sites when
    /// `join` is set and mark them as bond-carrying otherwise. Returns the
    /// number of segments.
    fn label_segments(&mut self, join: bool) -> usize {
        let n = self.couplings.n;
        self.parent.clear();
        self.parent.extend(0..n as u32);
        if !join {
            self.has_bond.clear();
            self.has_bond.resize(n, false);
        }
        for (i, c) in self.cur.iter_mut().enumerate() {
            *c = i as u32;
        }
        for &op in &self.ops {
            match op {
                Op::Bond(b) => {
                    let bond = &self.couplings.bonds[b as usize];
                    let (si, sj) = (self.cur[bond.i as usize], self.cur[bond.j as usize]);
                    if join {
                        let (ra, rb) = (find(&mut self.parent, si), find(&mut self.parent, sj));
                        if ra != rb {
                            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                            self.parent[hi as usize] = lo;
                        }
                    } else {
                        self.has_bond[si as usize] = true;
                        self.has_bond[sj as usize] = true;
                    }
                }
                Op::Constant(i) | Op::Flip(i) => {
                    let id = self.parent.len() as u32;
                    self.parent.push(id);
                    if !join {
                        self.has_bond.push(false);
                    }
                    self.cur[i as usize] = id;
                }
            }
        }
        self.parent.len()
    }

    /// Applies per-segment flips in `seg_flip`: toggles site operators whose
    /// two sides differ and flips the boundary spins of flipped segments.
    fn apply_segment_flips(&mut self) {
        let n = self.couplings.n;
        for i in 0..n {
            if self.seg_flip[i] == 1 {
                self.left[i] = -self.left[i];
            }
            self.cur[i] = i as u32;
        }
        let mut next = n as u32;
        for op in self.ops.iter_mut() {
            if let Op::Constant(i) | Op::Flip(i) = *op {
                let lower = self.cur[i as usize];
                if self.seg_flip[lower as usize] != self.seg_flip[next as usize] {
                    *op = match *op {
                        Op::Constant(i) => Op::Flip(i),
                        _ => Op::Constant(i),
                    };
                }
                self.cur[i as usize] = next;
                next += 1;
            }
        }
        for i in 0..n {
            if self.seg_flip[self.cur[i] as usize] == 1 {
                self.right[i] = -self.right[i];
            }
        }
    }

    /// Swendsen-Wang-type update: clusters of segments connected through
    /// bond operators are flipped independently with probability 1/2.
    pub fn cluster_update(&mut self) {
        let segs = self.label_segments(true);
        self.seg_flip.clear();
        self.seg_flip.resize(segs, UNDECIDED);
        // roots have the smallest index of their cluster, so they are decided first
        for k in 0..segs {
            let r = find(&mut self.parent, k as u32) as usize;
            if self.seg_flip[r] == UNDECIDED {
                self.seg_flip[r] = u8::from(self.rng.random::<bool>());
            }
            self.seg_flip[k] = self.seg_flip[r];
        }
        self.apply_segment_flips();
    }

    /// Local update: as many Metropolis proposals as there are segments,
    /// each flipping one uniformly chosen segment. A proposal is accepted
    /// exactly when no bond operator touches the segment (the weight ratio
    /// is then 1, otherwise 0).
    pub fn segment_update(&mut self) {
        let segs = self.label_segments(false);
        self.seg_flip.clear();
        self.seg_flip.resize(segs, 0);
        for _ in 0..segs {
            let k = self.rng.random_range(0..segs);
            if !self.has_bond[k] {
                self.seg_flip[k] ^= 1;
            }
        }
        self.apply_segment_flips();
    }

    /// `ln` of the configuration weight; `-inf` for illegal configurations.
    pub fn log_weight(&mut self) -> f64 {
        self.spins.copy_from_slice(&self.left);
        let len = self.ops.len();
        let mut lw = 0.0;
        for p in 0..len {
            let op = self.ops[p];
            lw += self.couplings.element(op, self.schedule.s(p, len), &self.spins).ln();
            if let Op::Flip(i) = op {
                self.spins[i as usize] = -self.spins[i as usize];
            }
        }
        if self.spins != self.right {
            return f64::NEG_INFINITY;
        }
        lw
    }

    /// Checks propagation closure and strict positivity of every matrix
    /// element.
    pub fn check_consistency(&mut self) -> Result<()> {
        self.spins.copy_from_slice(&self.left);
        let len = self.ops.len();
        for p in 0..len {
            let op = self.ops[p];
            let w = self.couplings.element(op, self.schedule.s(p, len), &self.spins);
            if !(w > 0.0) {
                return Err(Error::Inconsistent(format!("weight {w} for {op:?} at slot {p}")));
            }
            if let Op::Flip(i) = op {
                self.spins[i as usize] = -self.spins[i as usize];
            }
        }
        if self.spins != self.right {
            return Err(Error::Inconsistent("propagated left boundary differs from right".into()));
        }
        Ok(())
    }

    /// Hashable image of the configuration `(left boundary, operators)`.
    pub fn config_key(&self) -> (Vec<i8>, Vec<Op>) {
        (self.left.clone(), self.ops.clone())
    }
}
