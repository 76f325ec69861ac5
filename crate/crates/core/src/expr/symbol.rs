//! Coordinates of the jet space and the auxiliary indeterminates used by the
//! solvers, together with the global symbol order that makes canonical forms
//! reproducible.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// Symmetric spatial multi-index plus a power of the time direction.
///
/// Only multiplicities are stored: `counts[i - 1]` is the number of times the
/// spatial direction `i` occurs. `time` counts occurrences of direction 0.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex {
    counts: SmallVec<[u8; 4]>,
    time: u8,
}

impl MultiIndex {
    /// The empty index in `n` spatial dimensions; as a jet coordinate this is `u`.
    pub fn zero(n: usize) -> Self {
        MultiIndex {
            counts: SmallVec::from_elem(0, n),
            time: 0,
        }
    }

    /// Builds an index from a list of spatial directions (each in `1..=n`) and a time power.
    ///
    /// Panics if a direction is out of range.
    pub fn from_directions(n: usize, spatial: &[usize], time: u32) -> Self {
        let mut idx = MultiIndex::zero(n);
        for &i in spatial {
            assert!(i >= 1 && i <= n, "spatial direction {i} out of range 1..={n}");
            idx.counts[i - 1] += 1;
        }
        idx.time = u8::try_from(time).expect("time power too large");
        idx
    }

    /// Builds an index from explicit multiplicities.
    pub fn from_counts(counts: &[u32], time: u32) -> Self {
        MultiIndex {
            counts: counts
                .iter()
                .map(|&c| u8::try_from(c).expect("multiplicity too large"))
                .collect(),
            time: u8::try_from(time).expect("time power too large"),
        }
    }

    /// Number of spatial dimensions this index lives in.
    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Multiplicity of spatial direction `i` (1-based).
    pub fn count(&self, i: usize) -> u32 {
        u32::from(self.counts[i - 1])
    }

    pub fn counts(&self) -> impl Iterator<Item = u32> + '_ {
        self.counts.iter().map(|&c| u32::from(c))
    }

    pub fn spatial_order(&self) -> u32 {
        self.counts().sum()
    }

    pub fn time_power(&self) -> u32 {
        u32::from(self.time)
    }

    pub fn order(&self) -> u32 {
        self.spatial_order() + self.time_power()
    }

    pub fn is_spatial(&self) -> bool {
        self.time == 0
    }

    /// The index with direction `a` appended; `a = 0` is time.
    pub fn with_direction(&self, a: usize) -> Self {
        let mut out = self.clone();
        if a == 0 {
            out.time += 1;
        } else {
            out.counts[a - 1] += 1;
        }
        out
    }

    /// Removes one occurrence of direction `a`, if present.
    pub fn without_direction(&self, a: usize) -> Option<Self> {
        let mut out = self.clone();
        if a == 0 {
            out.time = out.time.checked_sub(1)?;
        } else {
            out.counts[a - 1] = out.counts[a - 1].checked_sub(1)?;
        }
        Some(out)
    }

    /// The purely spatial part of this index.
    pub fn spatial_part(&self) -> Self {
        MultiIndex {
            counts: self.counts.clone(),
            time: 0,
        }
    }

    /// Spatial directions in ascending order, repeated by multiplicity.
    pub fn directions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.spatial_order() as usize);
        for (i, &c) in self.counts.iter().enumerate() {
            out.extend(std::iter::repeat_n(i + 1, c as usize));
        }
        out
    }

    /// All directions (spatial ascending, then time) in application order.
    pub fn application_order(&self) -> Vec<usize> {
        let mut out = self.directions();
        out.extend(std::iter::repeat_n(0, self.time as usize));
        out
    }

    /// Every purely spatial index in `n` dimensions of order exactly `order`,
    /// ascending in the global order.
    pub fn spatial_of_order(n: usize, order: u32) -> Vec<Self> {
        let mut out = Vec::new();
        let mut counts = vec![0u32; n];
        fill_counts(&mut counts, 0, order, &mut out);
        out.sort();
        out
    }

    /// Every purely spatial index of order `<= max_order`, ascending.
    pub fn spatial_up_to(n: usize, max_order: u32) -> Vec<Self> {
        (0..=max_order).flat_map(|k| Self::spatial_of_order(n, k)).collect()
    }
}

fn fill_counts(counts: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        out.push(MultiIndex::from_counts(counts, 0));
        return;
    }
    if counts.is_empty() {
        if remaining == 0 {
            out.push(MultiIndex::from_counts(counts, 0));
        }
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        fill_counts(counts, pos + 1, remaining - c, out);
    }
    counts[pos] = 0;
}

impl Ord for MultiIndex {
    /// Order by total order, then time power, then the sorted direction
    /// sequence lexicographically.
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then(self.time.cmp(&other.time))
            .then_with(|| {
                // With equal spatial length, a larger multiplicity of an earlier
                // direction means a lexicographically smaller sequence.
                for (a, b) in self.counts.iter().zip(other.counts.iter()) {
                    if a != b {
                        return b.cmp(a);
                    }
                }
                self.counts.len().cmp(&other.counts.len())
            })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A coordinate or indeterminate that can appear in an [`Expr`](super::Expr).
///
/// Variant order is the global symbol order: base variables, then jet
/// variables, then ansatz unknowns, then auxiliary variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Symbol {
    /// `x^a`; `a = 0` is time.
    Base(u8),
    /// The jet coordinate `u_I`.
    Jet(MultiIndex),
    /// Undetermined coefficient of an ansatz.
    Unknown(u32),
    /// Auxiliary indeterminate. By convention `Aux(0)` is the line parameter
    /// `eps` and `Aux(i)` for `i >= 1` is the covector component `xi_i`.
    Aux(u32),
}

impl Symbol {
    pub fn t() -> Self {
        Symbol::Base(0)
    }

    /// Spatial coordinate `x^i`, `i >= 1`.
    pub fn x(i: usize) -> Self {
        Symbol::Base(u8::try_from(i).expect("coordinate index too large"))
    }

    pub fn u(n: usize) -> Self {
        Symbol::Jet(MultiIndex::zero(n))
    }

    pub fn jet(n: usize, spatial: &[usize], time: u32) -> Self {
        Symbol::Jet(MultiIndex::from_directions(n, spatial, time))
    }

    pub fn xi(i: usize) -> Self {
        Symbol::Aux(u32::try_from(i).expect("index too large"))
    }

    pub fn eps() -> Self {
        Symbol::Aux(0)
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Symbol::Base(_))
    }

    pub fn as_jet(&self) -> Option<&MultiIndex> {
        match self {
            Symbol::Jet(idx) => Some(idx),
            _ => None,
        }
    }

    /// True for jet coordinates carrying at least one time derivative.
    pub fn is_time_jet(&self) -> bool {
        matches!(self, Symbol::Jet(idx) if !idx.is_spatial())
    }

    /// Source-language name. With `one_dim` set, the single spatial
    /// coordinate prints as `x` and jets use the `u_xx` alias.
    pub fn name(&self, one_dim: bool) -> String {
        match self {
            Symbol::Base(0) => "t".to_string(),
            Symbol::Base(i) if one_dim && *i == 1 => "x".to_string(),
            Symbol::Base(i) => format!("x{i}"),
            Symbol::Jet(idx) => {
                if idx.order() == 0 {
                    return "u".to_string();
                }
                let mut s = String::from("u_");
                for d in idx.directions() {
                    if one_dim && idx.dim() == 1 {
                        s.push('x');
                    } else {
                        s.push_str(&d.to_string());
                    }
                }
                for _ in 0..idx.time_power() {
                    s.push('t');
                }
                s
            }
            Symbol::Unknown(id) => format!("c{id}"),
            Symbol::Aux(0) => "eps".to_string(),
            Symbol::Aux(i) => format!("xi{i}"),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name(false))
    }
}
