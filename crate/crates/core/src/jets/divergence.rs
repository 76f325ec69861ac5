//! Spatial variational derivative and reconstruction of fluxes.
//!
//! A polynomial residual `R` is a total spatial divergence `sum_i D_i X^i`
//! exactly when its Euler operator vanishes. Fluxes are recovered by solving
//! for undetermined coefficients, one homogeneous component at a time: each
//! `D_i` preserves the jet degree and the power of `t`, and shifts the
//! multi-weight `w_j = (count of j in jet indices) - (power of x^j)` by `e_i`.
//! Grading the ansatz this way keeps every linear system small.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::{ensure_spatial, iterated_total_derivative, total_derivative_poly, JetError};
use crate::expr::{Expr, Monomial, MultiIndex, Poly, Rational, Symbol};
use crate::linalg::{solve_particular, SparseRow};

/// Euler operator `E(e) = sum_I (-1)^|I| D_I (de/du_I)` over the spatial jets of `e`.
pub fn euler_operator(e: &Expr) -> Result<Expr, JetError> {
    ensure_spatial(e)?;
    let mut acc = Expr::zero();
    for s in e.symbols() {
        let Symbol::Jet(idx) = &s else { continue };
        let partial = e.diff(&s);
        let term = iterated_total_derivative(&partial, idx);
        acc = if idx.spatial_order() % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    Ok(acc)
}

/// Limits for the flux ansatz used by [`invert_divergence`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FluxBounds {
    /// Highest spatial jet order allowed in a flux component.
    pub max_jet_order: u32,
    /// Highest total degree in the spatial coordinates `x^1..x^n`.
    pub max_base_degree: u32,
}

impl FluxBounds {
    /// Bounds that suffice for typical residuals: flux order up to the
    /// residual's order, coordinate degree one above the residual's.
    pub fn for_residual(r: &Expr) -> Self {
        let mut order = 0;
        let mut base = 0;
        for (m, _) in r.numerator().terms() {
            let mut deg = 0;
            for (s, k) in m.factors() {
                match s {
                    Symbol::Jet(idx) => order = order.max(idx.spatial_order()),
                    Symbol::Base(b) if *b > 0 => deg += k,
                    _ => {}
                }
            }
            base = base.max(deg);
        }
        FluxBounds {
            max_jet_order: order,
            max_base_degree: base + 1,
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct Grade {
    jet_degree: u32,
    time_degree: u32,
    weight: Vec<i64>,
}

fn grade_of(m: &Monomial, n: usize) -> Grade {
    let mut g = Grade {
        jet_degree: 0,
        time_degree: 0,
        weight: vec![0; n],
    };
    for (s, k) in m.factors() {
        match s {
            Symbol::Base(0) => g.time_degree += k,
            Symbol::Base(b) => g.weight[usize::from(*b) - 1] -= i64::from(*k),
            Symbol::Jet(idx) => {
                g.jet_degree += k;
                for (j, c) in idx.counts().enumerate() {
                    g.weight[j] += i64::from(c * k);
                }
            }
            _ => unreachable!("checked by caller"),
        }
    }
    g
}

/// Finds fluxes with `sum_i D_i X^i = r`.
///
/// `r` must be a polynomial in `t`, `x^i` and spatial jets with rational
/// coefficients. Flux orders are tried from `order(r) - 1` upwards to
/// `bounds.max_jet_order`; the first order that admits a solution wins.
pub fn invert_divergence(r: &Expr, n: usize, bounds: &FluxBounds) -> Result<Vec<Expr>, JetError> {
    ensure_spatial(r)?;
    if !r.is_polynomial() {
        return Err(JetError::NotPolynomial(r.to_string()));
    }
    let mut components: BTreeMap<Grade, Poly> = BTreeMap::new();
    let mut order = 0;
    for (m, c) in r.numerator().terms() {
        for s in m.symbols() {
            match s {
                Symbol::Base(b) if usize::from(*b) <= n => {}
                Symbol::Jet(idx) if idx.dim() == n => order = order.max(idx.spatial_order()),
                _ => return Err(JetError::NotPolynomial(format!("unexpected symbol {s}"))),
            }
        }
        components
            .entry(grade_of(m, n))
            .or_default()
            .add_term(m.clone(), c.clone());
    }

    let mut flux = vec![Poly::zero(); n];
    let lowest = order.saturating_sub(1);
    let mut enumerator = JetProducts::new(n);
    for (grade, part) in &components {
        let solved = (lowest..=bounds.max_jet_order.max(lowest))
            .find_map(|k| solve_component(grade, part, n, k, bounds, &mut enumerator));
        let pieces = solved.ok_or(JetError::NotInDivergenceImage)?;
        for (i, p) in pieces.into_iter().enumerate() {
            flux[i] += &p;
        }
    }
    Ok(flux.into_iter().map(Expr::from_poly).collect())
}

fn solve_component(
    grade: &Grade,
    part: &Poly,
    n: usize,
    max_order: u32,
    bounds: &FluxBounds,
    enumerator: &mut JetProducts,
) -> Option<Vec<Poly>> {
    // Candidate monomials for each flux component.
    let mut unknowns: Vec<(usize, Monomial)> = Vec::new();
    for i in 1..=n {
        let mut target = grade.weight.clone();
        target[i - 1] -= 1;
        for (jets, counts) in enumerator.products(grade.jet_degree, max_order) {
            let exps: Vec<i64> = counts.iter().zip(&target).map(|(c, w)| *c as i64 - w).collect();
            if exps.iter().any(|e| *e < 0) || exps.iter().sum::<i64>() > i64::from(bounds.max_base_degree) {
                continue;
            }
            let mut factors: Vec<(Symbol, u32)> = jets.clone();
            factors.push((Symbol::t(), grade.time_degree));
            for (j, e) in exps.iter().enumerate() {
                factors.push((Symbol::x(j + 1), *e as u32));
            }
            unknowns.push((i, Monomial::from_factors(factors)));
        }
    }
    if unknowns.is_empty() {
        return None;
    }

    let mut rows: BTreeMap<Monomial, SparseRow> = BTreeMap::new();
    for (col, (i, m)) in unknowns.iter().enumerate() {
        let d = total_derivative_poly(&Poly::term(m.clone(), Rational::from_integer(1.into())), *i);
        for (dm, c) in d.terms() {
            rows.entry(dm.clone()).or_default().push((col, c.clone()));
        }
    }
    for (m, _) in part.terms() {
        rows.entry(m.clone()).or_default();
    }
    let equations = rows.into_iter().map(|(m, row)| {
        let rhs = part.coefficient(&m);
        (row, rhs)
    });
    let x = solve_particular(unknowns.len(), equations)?;
    let mut out = vec![Poly::zero(); n];
    for ((i, m), c) in unknowns.into_iter().zip(x) {
        if !c.is_zero() {
            out[i - 1].add_term(m, c);
        }
    }
    Some(out)
}

/// A jet-variable product with exponents, and its summed multiplicity vector.
type JetProduct = (Vec<(Symbol, u32)>, Vec<u32>);

/// Enumerates products of `d` spatial jet variables with order bounded,
/// together with the summed multiplicity vector.
struct JetProducts {
    n: usize,
    cache: BTreeMap<(u32, u32), Vec<JetProduct>>,
}

impl JetProducts {
    fn new(n: usize) -> Self {
        JetProducts {
            n,
            cache: BTreeMap::new(),
        }
    }

    fn products(&mut self, degree: u32, max_order: u32) -> Vec<JetProduct> {
        let n = self.n;
        self.cache
            .entry((degree, max_order))
            .or_insert_with(|| {
                let vars = MultiIndex::spatial_up_to(n, max_order);
                let mut out = Vec::new();
                let mut chosen: Vec<usize> = Vec::new();
                multisets(vars.len(), degree as usize, 0, &mut chosen, &mut |pick| {
                    let mut counts = vec![0u32; n];
                    let mut factors: Vec<(Symbol, u32)> = Vec::new();
                    for &v in pick {
                        for (j, c) in vars[v].counts().enumerate() {
                            counts[j] += c;
                        }
                        factors.push((Symbol::Jet(vars[v].clone()), 1));
                    }
                    out.push((factors, counts));
                });
                out
            })
            .clone()
    }
}

fn multisets(nvars: usize, size: usize, start: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chosen.len() == size {
        f(chosen);
        return;
    }
    for v in start..nvars {
        chosen.push(v);
        multisets(nvars, size, v, chosen, f);
        chosen.pop();
    }
}
