//! Elimination of time derivatives on the prolonged equation `u_t = G`.

use std::collections::BTreeMap;
use std::sync::Mutex;

use super::{ensure_spatial, total_derivative, JetError};
use crate::expr::{Expr, MultiIndex, Symbol};
use crate::parabolic::EvolutionEquation;

/// Highest jet order a table may be asked to reach.
pub const DEFAULT_ORDER_GUARD: u32 = 12;

/// Memoized values of `u_{I,t}` (t >= 1) in purely spatial jets.
///
/// Entries are computed on demand; the cache is behind a mutex so a table
/// can be shared between threads.
#[derive(Debug)]
pub struct ReplacementTable {
    n: usize,
    rhs: Expr,
    max_order: u32,
    guard: u32,
    cache: Mutex<BTreeMap<MultiIndex, Expr>>,
}

impl Clone for ReplacementTable {
    fn clone(&self) -> Self {
        ReplacementTable {
            n: self.n,
            rhs: self.rhs.clone(),
            max_order: self.max_order,
            guard: self.guard,
            cache: Mutex::new(self.cache.lock().unwrap().clone()),
        }
    }
}

impl ReplacementTable {
    /// Lazy table for `u_t = rhs` answering orders up to `max_order`.
    pub fn new(n: usize, rhs: Expr, max_order: u32) -> Result<Self, JetError> {
        Self::with_guard(n, rhs, max_order, DEFAULT_ORDER_GUARD)
    }

    pub fn with_guard(n: usize, rhs: Expr, max_order: u32, guard: u32) -> Result<Self, JetError> {
        if max_order > guard {
            return Err(JetError::OrderOverflow {
                requested: max_order,
                guard,
            });
        }
        ensure_spatial(&rhs)?;
        Ok(ReplacementTable {
            n,
            rhs,
            max_order,
            guard,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }

    /// The spatial expression equal to `u_{idx}` on solutions.
    pub fn entry(&self, idx: &MultiIndex) -> Result<Expr, JetError> {
        assert!(idx.time_power() >= 1, "entries exist only for time derivatives");
        if idx.order() > self.max_order {
            return Err(JetError::TableTooShallow {
                needed: idx.order(),
                available: self.max_order,
            });
        }
        self.compute(idx)
    }

    // Eliminating D_0 of a higher time derivative needs first-time-derivative
    // entries of larger spatial order; those may exceed `max_order` but not the guard.
    fn compute(&self, idx: &MultiIndex) -> Result<Expr, JetError> {
        if idx.order() > self.guard {
            return Err(JetError::OrderOverflow {
                requested: idx.order(),
                guard: self.guard,
            });
        }
        if let Some(e) = self.cache.lock().unwrap().get(idx) {
            return Ok(e.clone());
        }
        let value = if idx.order() == 1 {
            self.rhs.clone()
        } else if idx.time_power() >= 2 {
            let parent = idx.without_direction(0).unwrap();
            self.eliminate(&total_derivative(&self.compute(&parent)?, 0))?
        } else {
            let last = *idx.directions().last().unwrap();
            let parent = idx.without_direction(last).unwrap();
            total_derivative(&self.compute(&parent)?, last)
        };
        self.cache.lock().unwrap().insert(idx.clone(), value.clone());
        Ok(value)
    }

    /// Computes every entry of order `<= max_order`.
    pub fn fill(&self) -> Result<(), JetError> {
        for order in 1..=self.max_order {
            for t in 1..=order {
                for spatial in MultiIndex::spatial_of_order(self.n, order - t) {
                    let counts: Vec<u32> = spatial.counts().collect();
                    self.entry(&MultiIndex::from_counts(&counts, t))?;
                }
            }
        }
        Ok(())
    }

    /// Snapshot of the entries computed so far.
    pub fn cached(&self) -> BTreeMap<MultiIndex, Expr> {
        self.cache.lock().unwrap().clone()
    }

    /// Replaces every time jet in `e` by its table entry.
    pub fn reduce(&self, e: &Expr) -> Result<Expr, JetError> {
        self.substitute_time_jets(e, false)
    }

    fn eliminate(&self, e: &Expr) -> Result<Expr, JetError> {
        self.substitute_time_jets(e, true)
    }

    fn substitute_time_jets(&self, e: &Expr, internal: bool) -> Result<Expr, JetError> {
        let mut bindings = BTreeMap::new();
        for s in e.symbols() {
            if let Symbol::Jet(idx) = &s {
                if !idx.is_spatial() {
                    let value = if internal { self.compute(idx)? } else { self.entry(idx)? };
                    bindings.insert(s, value);
                }
            }
        }
        if bindings.is_empty() {
            return Ok(e.clone());
        }
        Ok(e.substitute(&bindings)?)
    }
}

/// Builds the table for `eq` with every entry up to `max_order` computed.
pub fn build_replacement_table(eq: &EvolutionEquation, max_order: u32) -> Result<ReplacementTable, JetError> {
    if max_order == 0 {
        return Err(JetError::TableTooShallow {
            needed: 1,
            available: 0,
        });
    }
    let table = ReplacementTable::new(eq.dim(), eq.rhs().clone(), max_order)?;
    table.fill()?;
    Ok(table)
}

/// Restricts `e` to solutions by eliminating all time derivatives.
pub fn reduce_to_spatial(e: &Expr, table: &ReplacementTable) -> Result<Expr, JetError> {
    table.reduce(e)
}
