//! Conservation laws of evolution equations.
//!
//! A law is a density `T` and spatial fluxes `X^i` with
//! `D_t T + sum_i D_i X^i = 0` on solutions. For purely spatial `T` this holds
//! for some flux exactly when the Euler operator annihilates the on-shell
//! time derivative of `T`, which is linear in the coefficients of a density
//! ansatz. Densities depending on jets of order at most two are enough for
//! parabolic equations, so that is the default search space.
//!
//! Laws are identified by their characteristic `Q = E(T)`: densities that
//! differ by a divergence share it, and a law is trivial when it vanishes.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{Expr, ExprError, Monomial, Poly, Rational, Symbol};
use crate::jets::{
    euler_operator, invert_divergence, spatial_jets, spatial_order, total_derivative, FluxBounds, JetError,
    ReplacementTable, DEFAULT_ORDER_GUARD,
};
use crate::linalg::{Echelon, SparseRow};
use crate::parabolic::{ma_classify, parabolicity_check, EvolutionEquation, MaReport, Parabolicity, ResidueMode};

/// Jet order up to which densities are known to suffice.
pub const SAFE_JET_ORDER: u32 = 2;

/// Largest ansatz accepted by [`generate_ansatz`].
pub const DEFAULT_ANSATZ_GUARD: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClawsError {
    #[error("density order {0} exceeds 2; pass the unsafe-order override to allow it")]
    OrderNotPermitted(u32),
    #[error("ansatz has {count} monomials, more than the guard of {guard}")]
    AnsatzTooLarge { count: usize, guard: usize },
    #[error("the equation is not parabolic at the reference jet")]
    NotParabolic,
    #[error("density must be linear and homogeneous in the ansatz unknowns")]
    NotLinearAnsatz,
    #[error("law has no flux to verify")]
    MissingFlux,
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Bounds for the polynomial density ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub max_jet_order: u32,
    /// Degree bound in the jet variables `u, u_i, u_ij, ...`.
    pub jet_degree: u32,
    /// Degree bound in `t, x^1, ..., x^n`.
    pub base_degree: u32,
    /// Allows `max_jet_order > 2`.
    pub unsafe_order: bool,
    pub max_terms: usize,
}

impl Default for AnsatzSpec {
    fn default() -> Self {
        AnsatzSpec {
            max_jet_order: SAFE_JET_ORDER,
            jet_degree: 1,
            base_degree: 0,
            unsafe_order: false,
            max_terms: DEFAULT_ANSATZ_GUARD,
        }
    }
}

impl AnsatzSpec {
    pub fn new(max_jet_order: u32, jet_degree: u32, base_degree: u32) -> Self {
        AnsatzSpec {
            max_jet_order,
            jet_degree,
            base_degree,
            ..AnsatzSpec::default()
        }
    }

    pub fn allow_unsafe_order(mut self) -> Self {
        self.unsafe_order = true;
        self
    }
}

/// `T = sum_k c_k m_k` with fresh unknowns `c_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ansatz {
    pub density: Expr,
    pub unknowns: Vec<Symbol>,
    pub monomials: Vec<Monomial>,
}

/// All monomials of degree `<= degree` in `vars`, ascending.
fn monomials_up_to(vars: &[Symbol], degree: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one()];
    let mut frontier = vec![(Monomial::one(), 0usize)];
    for _ in 0..degree {
        let mut next = Vec::new();
        for (m, start) in &frontier {
            for (k, v) in vars.iter().enumerate().skip(*start) {
                let m2 = m.mul(&Monomial::var(v.clone()));
                out.push(m2.clone());
                next.push((m2, k));
            }
        }
        frontier = next;
    }
    out.sort();
    out
}

pub fn generate_ansatz(eq: &EvolutionEquation, spec: &AnsatzSpec) -> Result<Ansatz, ClawsError> {
    if spec.max_jet_order > SAFE_JET_ORDER && !spec.unsafe_order {
        return Err(ClawsError::OrderNotPermitted(spec.max_jet_order));
    }
    let n = eq.dim();
    let jets = spatial_jets(n, spec.max_jet_order);
    let base: Vec<Symbol> = (0..=n).map(|a| Symbol::Base(a as u8)).collect();
    let jet_monomials = monomials_up_to(&jets, spec.jet_degree);
    let base_monomials = monomials_up_to(&base, spec.base_degree);
    let count = jet_monomials.len() * base_monomials.len();
    if count > spec.max_terms {
        return Err(ClawsError::AnsatzTooLarge {
            count,
            guard: spec.max_terms,
        });
    }
    let mut monomials = Vec::with_capacity(count);
    for jm in &jet_monomials {
        for bm in &base_monomials {
            monomials.push(jm.mul(bm));
        }
    }
    let unknowns: Vec<Symbol> = (1..=count as u32).map(Symbol::Unknown).collect();
    let mut density = Poly::zero();
    for (c, m) in unknowns.iter().zip(&monomials) {
        density.add_term(m.mul(&Monomial::var(c.clone())), Rational::from_integer(1.into()));
    }
    Ok(Ansatz {
        density: Expr::from_poly(density),
        unknowns,
        monomials,
    })
}

/// Homogeneous linear equations in the ansatz unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterminingSystem {
    pub unknowns: Vec<Symbol>,
    /// Each row is the coefficient of `labels[k]` in the Euler operator of the
    /// on-shell time derivative of the density.
    pub equations: Vec<SparseRow>,
    pub labels: Vec<Monomial>,
}

impl DeterminingSystem {
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        solve_exact(self)
    }
}

/// Splits a density linear in `Unknown` symbols into its per-unknown parts.
fn split_linear(density: &Expr) -> Result<(Vec<Symbol>, Vec<Expr>), ClawsError> {
    let unknowns: BTreeSet<Symbol> = density
        .symbols()
        .into_iter()
        .filter(|s| matches!(s, Symbol::Unknown(_)))
        .collect();
    let parts = density
        .poly_coefficients(&unknowns)
        .map_err(|_| ClawsError::NotLinearAnsatz)?;
    let mut by_unknown: BTreeMap<Symbol, Expr> = BTreeMap::new();
    for (m, c) in parts {
        match m.factors() {
            [(s, 1)] => {
                by_unknown.insert(s.clone(), c);
            }
            _ => return Err(ClawsError::NotLinearAnsatz),
        }
    }
    Ok(by_unknown.into_iter().unzip())
}

/// `reduce(D_t T)` for a purely spatial density.
pub fn on_shell_time_derivative(density: &Expr, table: &ReplacementTable) -> Result<Expr, ClawsError> {
    Ok(table.reduce(&total_derivative(density, 0))?)
}

pub fn assemble_determining_system(
    eq: &EvolutionEquation,
    table: &ReplacementTable,
    density: &Expr,
) -> Result<DeterminingSystem, ClawsError> {
    debug_assert_eq!(table.dim(), eq.dim());
    let (unknowns, parts) = split_linear(density)?;
    let columns: Vec<BTreeMap<Monomial, Rational>> = parts
        .par_iter()
        .map(|part| -> Result<_, ClawsError> {
            let r = on_shell_time_derivative(part, table)?;
            let e = euler_operator(&r)?;
            let all = e.symbols();
            let coeffs = e.poly_coefficients(&all)?;
            coeffs
                .into_iter()
                .map(|(m, c)| {
                    c.as_constant()
                        .map(|c| (m, c))
                        .ok_or_else(|| ExprError::NotPolynomialIn(e.to_string()).into())
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let mut rows: BTreeMap<Monomial, SparseRow> = BTreeMap::new();
    for (k, col) in columns.into_iter().enumerate() {
        for (m, c) in col {
            rows.entry(m).or_default().push((k, c));
        }
    }
    let (labels, equations) = rows.into_iter().unzip();
    Ok(DeterminingSystem {
        unknowns,
        equations,
        labels,
    })
}

/// Null-space basis by exact elimination; pivots are the first nonzero column.
pub fn solve_exact(system: &DeterminingSystem) -> Vec<Vec<Rational>> {
    let mut e = Echelon::new(system.unknowns.len());
    for row in &system.equations {
        e.insert(row.iter().cloned());
    }
    e.nullspace()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservationLaw {
    pub density: Expr,
    /// `None` when no flux was found within the reconstruction bounds.
    pub flux: Option<Vec<Expr>>,
    pub characteristic: Expr,
}

/// Characteristic `Q = E(T)` of a purely spatial density.
pub fn characteristic(density: &Expr) -> Result<Expr, ClawsError> {
    Ok(euler_operator(density)?)
}

/// Highest spatial jet order in the on-shell characteristic.
pub fn jacobi_potential_order(law: &ConservationLaw, table: &ReplacementTable) -> Result<u32, ClawsError> {
    Ok(spatial_order(&table.reduce(&law.characteristic)?))
}

/// Checks `reduce(D_t T) + sum_i D_i X^i = 0` exactly.
pub fn verify(table: &ReplacementTable, density: &Expr, flux: &[Expr]) -> Result<bool, ClawsError> {
    let mut acc = on_shell_time_derivative(density, table)?;
    for (i, x) in flux.iter().enumerate() {
        acc = &acc + &total_derivative(x, i + 1);
    }
    Ok(acc.is_zero())
}

/// Verifies a law; a law without flux cannot be verified.
pub fn verify_law(table: &ReplacementTable, law: &ConservationLaw) -> Result<bool, ClawsError> {
    let flux = law.flux.as_ref().ok_or(ClawsError::MissingFlux)?;
    verify(table, &law.density, flux)
}

/// Reconstructs fluxes for a density already known to be conserved.
pub fn reconstruct_flux(
    eq: &EvolutionEquation,
    table: &ReplacementTable,
    density: &Expr,
) -> Result<Vec<Expr>, ClawsError> {
    let residual = -&on_shell_time_derivative(density, table)?;
    let bounds = FluxBounds::for_residual(&residual);
    Ok(invert_divergence(&residual, eq.dim(), &bounds)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub laws: Vec<ConservationLaw>,
    pub parabolicity: Parabolicity,
    pub unknowns: usize,
    pub equations: usize,
    /// Dimension of the solution space before removing trivial densities.
    pub nullity: usize,
    pub warnings: Vec<String>,
}

/// Table deep enough for densities of the given order.
pub fn table_for(eq: &EvolutionEquation) -> Result<ReplacementTable, ClawsError> {
    Ok(ReplacementTable::new(eq.dim(), eq.rhs().clone(), DEFAULT_ORDER_GUARD)?)
}

/// Searches the ansatz for nontrivial conservation laws.
///
/// Returned laws have linearly independent characteristics in reduced row
/// echelon form under the monomial order, so each characteristic has leading
/// coefficient 1 and no two are proportional.
pub fn find_conservation_laws(
    eq: &EvolutionEquation,
    spec: &AnsatzSpec,
    force: bool,
) -> Result<SearchResult, ClawsError> {
    let mut warnings = Vec::new();
    let parabolicity = parabolicity_check(eq);
    match parabolicity {
        Parabolicity::NotParabolic if !force => return Err(ClawsError::NotParabolic),
        Parabolicity::NotParabolic => {
            warnings.push("symbol is not parabolic at the reference jet; continuing because forced".into())
        }
        Parabolicity::WeaklyParabolic => warnings.push("symbol is degenerate at the reference jet".into()),
        Parabolicity::StrictlyParabolic => {}
    }
    if spec.max_jet_order > SAFE_JET_ORDER && spec.unsafe_order {
        warnings.push(format!("density order raised to {} by override", spec.max_jet_order));
    }
    let table = table_for(eq)?;
    let ansatz = generate_ansatz(eq, spec)?;
    let system = assemble_determining_system(eq, &table, &ansatz.density)?;
    let basis = solve_exact(&system);

    let densities: Vec<Expr> = basis
        .iter()
        .map(|v| {
            let mut p = Poly::zero();
            for (c, m) in v.iter().zip(&ansatz.monomials) {
                p.add_term(m.clone(), c.clone());
            }
            Expr::from_poly(p)
        })
        .collect();
    let characteristics: Vec<Expr> = densities
        .par_iter()
        .map(|t| Ok(table.reduce(&characteristic(t)?)?))
        .collect::<Result<_, ClawsError>>()?;

    // Row-reduce [Q_k | e_k]: rows with a nonzero Q part are independent
    // characteristics, the tail records which densities produce them.
    let mut q_monomials: BTreeSet<Monomial> = BTreeSet::new();
    for q in &characteristics {
        if !q.is_polynomial() {
            return Err(ExprError::NotPolynomialIn(q.to_string()).into());
        }
        q_monomials.extend(q.numerator().terms().map(|(m, _)| m.clone()));
    }
    let columns: Vec<Monomial> = q_monomials.into_iter().rev().collect();
    let position: BTreeMap<&Monomial, usize> = columns.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut echelon = Echelon::new(columns.len() + densities.len());
    for (k, q) in characteristics.iter().enumerate() {
        let mut row: SparseRow = q.numerator().terms().map(|(m, c)| (position[m], c.clone())).collect();
        row.sort_by_key(|(c, _)| *c);
        row.push((columns.len() + k, Rational::from_integer(1.into())));
        echelon.insert(row);
    }

    let mut laws = Vec::new();
    for row in echelon.rows() {
        if row.first().is_none_or(|(c, _)| *c >= columns.len()) {
            continue;
        }
        let mut q = Poly::zero();
        let mut density = Expr::zero();
        for (c, v) in &row {
            if *c < columns.len() {
                q.add_term(columns[*c].clone(), v.clone());
            } else {
                density = &density + &densities[c - columns.len()].scale(v);
            }
        }
        let characteristic = Expr::from_poly(q);
        let flux = match reconstruct_flux(eq, &table, &density) {
            Ok(x) => Some(x),
            Err(ClawsError::Jet(JetError::NotInDivergenceImage)) => {
                warnings.push(format!(
                    "flux reconstruction failed for characteristic {}",
                    characteristic.render(eq.dim() == 1)
                ));
                None
            }
            Err(e) => return Err(e),
        };
        let law = ConservationLaw {
            density,
            flux,
            characteristic,
        };
        let order = jacobi_potential_order(&law, &table)?;
        if order > SAFE_JET_ORDER {
            warnings.push(format!(
                "characteristic {} has jet order {order}",
                law.characteristic.render(eq.dim() == 1)
            ));
        }
        laws.push(law);
    }

    Ok(SearchResult {
        laws,
        parabolicity,
        unknowns: system.unknowns.len(),
        equations: system.equations.len(),
        nullity: basis.len(),
        warnings,
    })
}

/// Result of checking found laws against the Monge-Ampere classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct MaCrossCheck {
    pub report: MaReport,
    pub violations: Vec<String>,
}

impl MaCrossCheck {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// An equation with a nontrivial law must be Monge-Ampere; any violation
/// points at a bug in the search or in the classifier.
pub fn cross_validate_ma(eq: &EvolutionEquation, laws: &[ConservationLaw]) -> MaCrossCheck {
    let report = ma_classify(eq, ResidueMode::AtReference);
    let mut violations = Vec::new();
    if !laws.is_empty() {
        match report.is_monge_ampere() {
            Some(true) => {}
            Some(false) => violations.push(format!(
                "{} nontrivial law(s) found but the classifier rejects the equation",
                laws.len()
            )),
            None => {
                // The pointwise residue is unavailable at a singular symbol; fall back to
                // the symbolic residue before declaring a violation.
                let symbolic = ma_classify(eq, ResidueMode::Symbolic);
                if symbolic.is_monge_ampere() != Some(true) {
                    violations.push(format!(
                        "{} nontrivial law(s) found but no Monge-Ampere verdict could be reached",
                        laws.len()
                    ));
                }
            }
        }
    }
    MaCrossCheck { report, violations }
}

impl ConservationLaw {
    pub fn is_trivial(&self) -> bool {
        self.characteristic.is_zero()
    }
}
