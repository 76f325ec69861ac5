//! Jet coordinates and the operators that act on them.
//!
//! Jet variables `u_{I,t}` are [`Symbol::Jet`] values carrying a
//! [`MultiIndex`]. Direction `0` is time throughout; `1..=n` are spatial.

mod divergence;
mod table;
mod tableau;

use thiserror::Error;

use crate::expr::{Expr, ExprError, Monomial, Poly, Rational};
pub use crate::expr::{MultiIndex, Symbol};

pub use divergence::{euler_operator, invert_divergence, FluxBounds};
pub use table::{build_replacement_table, reduce_to_spatial, ReplacementTable, DEFAULT_ORDER_GUARD};
pub use tableau::{deprolongation_dimension, parabolic_system_dimension, tableau_dimension, traceless_sym_dimension};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error("requested jet order {requested} exceeds the guard {guard}")]
    OrderOverflow { requested: u32, guard: u32 },
    #[error("replacement table holds orders up to {available}, {needed} was requested")]
    TableTooShallow { needed: u32, available: u32 },
    #[error("time derivative {0} present where only spatial jets are allowed")]
    TimeJetPresent(String),
    #[error("residual is not a total divergence within the given bounds")]
    NotInDivergenceImage,
    #[error("expected a polynomial in base and jet coordinates with rational coefficients: {0}")]
    NotPolynomial(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Total derivative `D_a = d/dx^a + sum_I u_{Ia} d/du_I`.
pub fn total_derivative(e: &Expr, a: usize) -> Expr {
    let dn = total_derivative_poly(e.numerator(), a);
    if e.is_polynomial() {
        return Expr::from_poly(dn);
    }
    e.quotient_rule(&dn, &total_derivative_poly(e.denominator(), a))
}

pub(crate) fn total_derivative_poly(p: &Poly, a: usize) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        for (s, k) in m.factors() {
            let replacement = match s {
                Symbol::Base(b) if usize::from(*b) == a => None,
                Symbol::Jet(idx) => Some(Symbol::Jet(idx.with_direction(a))),
                _ => continue,
            };
            let (_, rest) = m.take(s);
            let mut factors: Vec<(Symbol, u32)> = rest.factors().to_vec();
            if *k > 1 {
                factors.push((s.clone(), k - 1));
            }
            if let Some(r) = replacement {
                factors.push((r, 1));
            }
            out.add_term(Monomial::from_factors(factors), c * Rational::from_integer((*k).into()));
        }
    }
    out
}

/// Applies `D_a` for every direction in `idx`, spatial ascending then time.
pub fn iterated_total_derivative(e: &Expr, idx: &MultiIndex) -> Expr {
    idx.application_order()
        .into_iter()
        .fold(e.clone(), |acc, a| total_derivative(&acc, a))
}

/// Highest total order of any jet variable in `e`, `None` if there is none.
pub fn jet_order(e: &Expr) -> Option<u32> {
    e.symbols()
        .iter()
        .filter_map(|s| s.as_jet().map(MultiIndex::order))
        .max()
}

/// Highest spatial order among the jet variables of `e`, 0 if there is none.
pub fn spatial_order(e: &Expr) -> u32 {
    e.symbols()
        .iter()
        .filter_map(|s| s.as_jet().map(MultiIndex::spatial_order))
        .max()
        .unwrap_or(0)
}

/// Fails with [`JetError::TimeJetPresent`] if `e` mentions a time jet.
pub fn ensure_spatial(e: &Expr) -> Result<(), JetError> {
    match e.symbols().into_iter().find(Symbol::is_time_jet) {
        Some(s) => Err(JetError::TimeJetPresent(s.to_string())),
        None => Ok(()),
    }
}

/// Spatial jet variables of order `<= max_order`, ascending.
pub fn spatial_jets(n: usize, max_order: u32) -> Vec<Symbol> {
    MultiIndex::spatial_up_to(n, max_order)
        .into_iter()
        .map(Symbol::Jet)
        .collect()
}
