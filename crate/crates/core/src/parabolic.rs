//! Evolution equations `u_t = G(x, t, u, grad u, Hess u)`, their symbol, and
//! the Monge-Ampere tests.
//!
//! Hessian entries are unordered-pair coordinates `u_ij`, so the symbol
//! matrix carries `1/2 dG/du_ij` off the diagonal. With that convention
//! `sigma(xi) = sum g^ij xi_i xi_j` is exactly the first variation of `G`
//! along `u_ij + eps xi_i xi_j`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::expr::{ratio, Expr, ExprError, Rational, Symbol};
use crate::linalg::{determinant, inverse_dense, solve_dense};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParabolicError {
    #[error("right-hand side contains the time derivative {0}")]
    TimeDerivativeOnRhs(String),
    #[error("right-hand side contains {0}, which is not a jet of order <= 2 in {1} spatial dimensions")]
    InvalidSymbol(String, usize),
    #[error("the traceless residue needs at least two spatial dimensions")]
    PreconditionSpatialDim,
    #[error("the symbol is not invertible at the reference jet")]
    SingularSymbol,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A second-order evolution equation together with the 2-jet at which
/// pointwise properties are certified.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionEquation {
    n: usize,
    rhs: Expr,
    reference: BTreeMap<Symbol, Rational>,
}

impl EvolutionEquation {
    /// Equation with the zero reference jet.
    pub fn new(n: usize, rhs: Expr) -> Result<Self, ParabolicError> {
        Self::with_reference(n, rhs, [])
    }

    /// Equation with a reference jet; symbols of `rhs` left unbound take the value 0.
    pub fn with_reference(
        n: usize,
        rhs: Expr,
        reference: impl IntoIterator<Item = (Symbol, Rational)>,
    ) -> Result<Self, ParabolicError> {
        assert!(n >= 1, "spatial dimension must be positive");
        for s in rhs.symbols() {
            let ok = match &s {
                Symbol::Base(a) => usize::from(*a) <= n,
                Symbol::Jet(idx) => {
                    if !idx.is_spatial() {
                        return Err(ParabolicError::TimeDerivativeOnRhs(s.to_string()));
                    }
                    idx.dim() == n && idx.order() <= 2
                }
                _ => false,
            };
            if !ok {
                return Err(ParabolicError::InvalidSymbol(s.to_string(), n));
            }
        }
        let mut bindings: BTreeMap<Symbol, Rational> = reference.into_iter().collect();
        for s in rhs.symbols() {
            bindings.entry(s).or_insert_with(Rational::zero);
        }
        Ok(EvolutionEquation {
            n,
            rhs,
            reference: bindings,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }

    pub fn reference_jet(&self) -> &BTreeMap<Symbol, Rational> {
        &self.reference
    }

    /// The Hessian coordinate `u_ij`.
    pub fn hessian(&self, i: usize, j: usize) -> Symbol {
        Symbol::jet(self.n, &[i, j], 0)
    }

    fn at_reference(&self, e: &Expr) -> Result<Expr, ParabolicError> {
        Ok(e.evaluate_partial(&self.reference)?)
    }
}

/// Symmetric matrix of the principal symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolForm {
    pub g: Vec<Vec<Expr>>,
}

impl SymbolForm {
    /// `sigma(xi) = sum_ij g^ij xi_i xi_j`.
    pub fn quadratic_form(&self) -> Expr {
        let n = self.g.len();
        let mut acc = Expr::zero();
        for i in 0..n {
            for j in 0..n {
                let xi = &Expr::symbol(Symbol::xi(i + 1)) * &Expr::symbol(Symbol::xi(j + 1));
                acc = &acc + &(&self.g[i][j] * &xi);
            }
        }
        acc
    }

    /// Entries evaluated at `values`.
    pub fn evaluate(&self, values: &BTreeMap<Symbol, Rational>) -> Result<Vec<Vec<Rational>>, ExprError> {
        self.g
            .iter()
            .map(|r| r.iter().map(|e| e.evaluate(values)).collect())
            .collect()
    }
}

pub fn symbol_form(eq: &EvolutionEquation) -> SymbolForm {
    let n = eq.dim();
    let half = ratio(1, 2);
    let g = (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    let d = eq.rhs().diff(&eq.hessian(i, j));
                    if i == j {
                        d
                    } else {
                        d.scale(&half)
                    }
                })
                .collect()
        })
        .collect();
    SymbolForm { g }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parabolicity {
    StrictlyParabolic,
    WeaklyParabolic,
    NotParabolic,
}

impl Parabolicity {
    pub fn label(self) -> &'static str {
        match self {
            Parabolicity::StrictlyParabolic => "strict",
            Parabolicity::WeaklyParabolic => "weak",
            Parabolicity::NotParabolic => "not",
        }
    }
}

fn rational_det(m: &[Vec<Rational>], rows: &[usize]) -> Rational {
    let sub: Vec<Vec<Expr>> = rows
        .iter()
        .map(|&i| rows.iter().map(|&j| Expr::constant(m[i][j].clone())).collect())
        .collect();
    determinant(&sub).as_constant().expect("constant matrix")
}

/// Sylvester test at the reference jet: definite iff all leading principal
/// minors are positive, semidefinite iff all principal minors are nonnegative.
pub fn parabolicity_check(eq: &EvolutionEquation) -> Parabolicity {
    let g = symbol_form(eq)
        .evaluate(eq.reference_jet())
        .expect("reference jet binds every symbol");
    classify_symmetric(&g)
}

pub(crate) fn classify_symmetric(g: &[Vec<Rational>]) -> Parabolicity {
    let n = g.len();
    let leading: Vec<usize> = (0..n).collect();
    if (1..=n).all(|k| rational_det(g, &leading[..k]).is_positive()) {
        return Parabolicity::StrictlyParabolic;
    }
    let all_nonneg = (1u32..(1 << n)).all(|mask| {
        let rows: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        !rational_det(g, &rows).is_negative()
    });
    if all_nonneg {
        Parabolicity::WeaklyParabolic
    } else {
        Parabolicity::NotParabolic
    }
}

/// `q(xi) = d^2/d eps^2 G(..., u_ij + eps xi_i xi_j)` at `eps = 0`.
pub fn quartic_form(eq: &EvolutionEquation) -> Expr {
    let n = eq.dim();
    let eps = Expr::symbol(Symbol::eps());
    let mut bindings = BTreeMap::new();
    for i in 1..=n {
        for j in i..=n {
            let shift = &(&eps * &Expr::symbol(Symbol::xi(i))) * &Expr::symbol(Symbol::xi(j));
            bindings.insert(eq.hessian(i, j), &Expr::symbol(eq.hessian(i, j)) + &shift);
        }
    }
    let shifted = eq.rhs().substitute(&bindings).expect("polynomial shift");
    let second = shifted.diff(&Symbol::eps()).diff(&Symbol::eps());
    second
        .substitute(&BTreeMap::from([(Symbol::eps(), Expr::zero())]))
        .expect("polynomial substitution")
}

/// True iff `G` is a combination of Hessian minors with lower-order
/// coefficients, detected by the vanishing of the rank-one second variation.
pub fn is_minor_affine(eq: &EvolutionEquation) -> bool {
    quartic_form(eq).is_zero()
}

/// How coefficients are treated by [`ma_traceless_residue`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ResidueMode {
    /// Evaluate the symbol and the quartic at the reference jet.
    #[default]
    AtReference,
    /// Keep coefficients as rational functions of the jet.
    Symbolic,
}

/// Decomposition `q = q0 + sigma * h` with `q0` trace-free for the symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct TracelessResidue {
    pub residue: Expr,
    pub cofactor: Expr,
    pub sigma: Expr,
    pub quartic: Expr,
    /// Inverse symbol used for the trace.
    pub inverse_symbol: Vec<Vec<Expr>>,
}

impl TracelessResidue {
    /// `sum_ij (g^-1)_ij d^2 p / dxi_i dxi_j`.
    pub fn trace(&self, p: &Expr) -> Expr {
        trace_with(&self.inverse_symbol, p)
    }
}

fn trace_with(ginv: &[Vec<Expr>], p: &Expr) -> Expr {
    let n = ginv.len();
    let mut acc = Expr::zero();
    for i in 0..n {
        for j in 0..n {
            if ginv[i][j].is_zero() {
                continue;
            }
            let d = p.diff(&Symbol::xi(i + 1)).diff(&Symbol::xi(j + 1));
            acc = &acc + &(&ginv[i][j] * &d);
        }
    }
    acc
}

fn xi_vars(n: usize) -> BTreeSet<Symbol> {
    (1..=n).map(Symbol::xi).collect()
}

/// Splits the quartic into its symbol-traceless part and a multiple of the symbol.
pub fn ma_traceless_residue(eq: &EvolutionEquation, mode: ResidueMode) -> Result<TracelessResidue, ParabolicError> {
    let n = eq.dim();
    if n < 2 {
        return Err(ParabolicError::PreconditionSpatialDim);
    }
    let form = symbol_form(eq);
    let at_ref = form.evaluate(eq.reference_jet())?;
    let det_ref = rational_det(&at_ref, &(0..n).collect::<Vec<_>>());
    if det_ref.is_zero() {
        return Err(ParabolicError::SingularSymbol);
    }
    let (g, quartic) = match mode {
        ResidueMode::AtReference => (
            at_ref
                .iter()
                .map(|r| r.iter().cloned().map(Expr::constant).collect())
                .collect::<Vec<Vec<Expr>>>(),
            eq.at_reference(&quartic_form(eq))?,
        ),
        ResidueMode::Symbolic => (form.g.clone(), quartic_form(eq)),
    };
    let ginv = inverse_dense(&g).ok_or(ParabolicError::SingularSymbol)?;
    let sigma = SymbolForm { g: g.clone() }.quadratic_form();

    let basis: Vec<Expr> = (1..=n)
        .flat_map(|k| (k..=n).map(move |l| (k, l)))
        .map(|(k, l)| &Expr::symbol(Symbol::xi(k)) * &Expr::symbol(Symbol::xi(l)))
        .collect();
    let vars = xi_vars(n);
    let images: Vec<_> = basis
        .iter()
        .map(|m| trace_with(&ginv, &(&sigma * m)).poly_coefficients(&vars))
        .collect::<Result<_, _>>()?;
    let target = trace_with(&ginv, &quartic).poly_coefficients(&vars)?;
    let monomials: Vec<_> = basis
        .iter()
        .map(|m| m.numerator().leading_term().unwrap().0.clone())
        .collect();
    let a: Vec<Vec<Expr>> = monomials
        .iter()
        .map(|row| {
            images
                .iter()
                .map(|img| img.get(row).cloned().unwrap_or_default())
                .collect()
        })
        .collect();
    let b: Vec<Expr> = monomials
        .iter()
        .map(|row| target.get(row).cloned().unwrap_or_default())
        .collect();
    let h = solve_dense(&a, &b).ok_or(ParabolicError::SingularSymbol)?;
    let cofactor: Expr = h.iter().zip(&basis).map(|(c, m)| c * m).sum();
    let residue = &quartic - &(&sigma * &cofactor);
    Ok(TracelessResidue {
        residue,
        cofactor,
        sigma,
        quartic,
        inverse_symbol: ginv,
    })
}

/// Outcome of the Monge-Ampere tests.
#[derive(Clone, Debug, PartialEq)]
pub struct MaReport {
    pub minor_affine: bool,
    pub quartic: Expr,
    pub traceless_residue: Option<Expr>,
    pub residue_vanishes: Option<bool>,
    pub n1_affine: Option<bool>,
    pub singular_symbol: bool,
}

pub fn ma_classify(eq: &EvolutionEquation, mode: ResidueMode) -> MaReport {
    let quartic = quartic_form(eq);
    let minor_affine = quartic.is_zero();
    if eq.dim() == 1 {
        let uxx = eq.hessian(1, 1);
        let affine = eq.rhs().diff(&uxx).diff(&uxx).is_zero();
        return MaReport {
            minor_affine,
            quartic,
            traceless_residue: None,
            residue_vanishes: None,
            n1_affine: Some(affine),
            singular_symbol: false,
        };
    }
    match ma_traceless_residue(eq, mode) {
        Ok(r) => MaReport {
            minor_affine,
            quartic,
            residue_vanishes: Some(r.residue.is_zero()),
            traceless_residue: Some(r.residue),
            n1_affine: None,
            singular_symbol: false,
        },
        Err(_) => MaReport {
            minor_affine,
            quartic,
            traceless_residue: None,
            residue_vanishes: None,
            n1_affine: None,
            singular_symbol: true,
        },
    }
}

impl MaReport {
    /// The dimension-appropriate Monge-Ampere verdict, if one could be reached.
    pub fn is_monge_ampere(&self) -> Option<bool> {
        if self.minor_affine {
            return Some(true);
        }
        self.n1_affine.or(self.residue_vanishes)
    }
}

/// Bindings `u_ij -> (A^T H A)_ij` realizing a constant linear change of
/// spatial coordinates on the Hessian.
pub fn congruence_bindings(n: usize, a: &[Vec<i64>]) -> BTreeMap<Symbol, Expr> {
    let h = |i: usize, j: usize| Expr::symbol(Symbol::jet(n, &[i.min(j) + 1, i.max(j) + 1], 0));
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            let mut acc = Expr::zero();
            for k in 0..n {
                for l in 0..n {
                    let c = a[k][i] * a[l][j];
                    if c != 0 {
                        acc = &acc + &(&Expr::int(c) * &h(k, l));
                    }
                }
            }
            out.insert(Symbol::jet(n, &[i + 1, j + 1], 0), acc);
        }
    }
    out
}
