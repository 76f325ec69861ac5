//! Canonical exact-arithmetic expressions.
//!
//! An [`Expr`] is a rational function `num / den` over [`Poly`] with the
//! denominator monic and coprime to the numerator. Two expressions are equal as
//! rational functions exactly when their canonical forms are equal, so `==`
//! and [`Expr::is_zero`] are decision procedures.

mod poly;
mod symbol;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

pub use poly::{rat, ratio, Monomial, Poly, Rational};
pub use symbol::{MultiIndex, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("division by an expression that normalizes to zero")]
    DivisionByZero,
    #[error("expression is not polynomial in {{{0}}}")]
    NotPolynomialIn(String),
    #[error("symbol {0} has no value")]
    Unbound(String),
}

/// Uninterpreted expression tree, as produced by a parser.
#[derive(Clone, Debug, PartialEq)]
pub enum RawExpr {
    Num(Rational),
    Sym(Symbol),
    Neg(Box<RawExpr>),
    Add(Box<RawExpr>, Box<RawExpr>),
    Sub(Box<RawExpr>, Box<RawExpr>),
    Mul(Box<RawExpr>, Box<RawExpr>),
    Div(Box<RawExpr>, Box<RawExpr>),
    Pow(Box<RawExpr>, i32),
}

/// Brings a raw tree to canonical form.
pub fn normalize(raw: &RawExpr) -> Result<Expr, ExprError> {
    Ok(match raw {
        RawExpr::Num(c) => Expr::constant(c.clone()),
        RawExpr::Sym(s) => Expr::symbol(s.clone()),
        RawExpr::Neg(a) => -&normalize(a)?,
        RawExpr::Add(a, b) => &normalize(a)? + &normalize(b)?,
        RawExpr::Sub(a, b) => &normalize(a)? - &normalize(b)?,
        RawExpr::Mul(a, b) => &normalize(a)? * &normalize(b)?,
        RawExpr::Div(a, b) => normalize(a)?.try_div(&normalize(b)?)?,
        RawExpr::Pow(a, k) => normalize(a)?.pow(*k)?,
    })
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    pub fn zero() -> Self {
        Expr::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Expr::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(rat(n))
    }

    pub fn constant(c: Rational) -> Self {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn symbol(s: Symbol) -> Self {
        Expr::from_poly(Poly::var(s))
    }

    pub fn from_poly(p: Poly) -> Self {
        Expr {
            num: p,
            den: Poly::one(),
        }
    }

    /// Canonicalizes `num / den`.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Expr::zero());
        }
        if let Some(c) = den.as_constant() {
            return Ok(Expr::from_poly(num.scale(&c.recip())));
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading_term().expect("nonzero denominator").1.recip();
        Ok(Expr {
            num: num.scale(&lc),
            den: den.scale(&lc),
        })
    }

    /// Canonical form of `num / den` for coprime parts.
    fn from_coprime(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = den.as_constant() {
            return Expr::from_poly(num.scale(&c.recip()));
        }
        let lc = den.leading_term().expect("nonzero denominator").1.recip();
        Expr {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_polynomial() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut s = self.num.symbols();
        s.extend(self.den.symbols());
        s
    }

    pub fn contains_symbol(&self, s: &Symbol) -> bool {
        self.num.contains_symbol(s) || self.den.contains_symbol(s)
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        Expr {
            num: self.num.scale(c),
            den: if c.is_zero() { Poly::one() } else { self.den.clone() },
        }
    }

    pub fn try_div(&self, rhs: &Expr) -> Result<Expr, ExprError> {
        if rhs.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if let Some(c) = rhs.as_constant() {
            return Ok(self.scale(&c.recip()));
        }
        Expr::from_parts(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        Expr::one().try_div(self)
    }

    /// Integer power; negative exponents divide.
    pub fn pow(&self, k: i32) -> Result<Expr, ExprError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let k = k.unsigned_abs();
        Ok(Expr {
            num: base.num.pow(k),
            den: base.den.pow(k),
        })
    }

    /// Formal partial derivative with respect to `s`.
    pub fn diff(&self, s: &Symbol) -> Expr {
        if self.is_polynomial() {
            return Expr::from_poly(self.num.diff(s));
        }
        self.quotient_rule(&self.num.diff(s), &self.den.diff(s))
    }

    /// `(n/d)'` from the derivatives `dn`, `dd` of the parts, under any derivation.
    pub(crate) fn quotient_rule(&self, dn: &Poly, dd: &Poly) -> Expr {
        if dd.is_zero() {
            return Expr::from_parts(dn.clone(), self.den.clone()).expect("nonzero denominator");
        }
        // Factors shared by d and d' would otherwise be cancelled from d^2 by a larger gcd.
        let g = self.den.gcd(dd);
        let d = exact(&self.den, &g);
        let num = &(dn * &d) - &(&self.num * &exact(dd, &g));
        Expr::from_parts(num, &self.den * &d).expect("nonzero denominator")
    }

    /// Simultaneous substitution.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Expr>) -> Result<Expr, ExprError> {
        let relevant: BTreeMap<&Symbol, &Expr> = bindings.iter().filter(|(s, _)| self.contains_symbol(s)).collect();
        if relevant.is_empty() {
            return Ok(self.clone());
        }
        if relevant.values().all(|v| v.is_polynomial()) {
            let polys: BTreeMap<Symbol, Poly> = relevant.into_iter().map(|(s, v)| (s.clone(), v.num.clone())).collect();
            let num = self.num.substitute(&polys);
            let den = self.den.substitute(&polys);
            return Expr::from_parts(num, den);
        }
        let num = substitute_rational(&self.num, &relevant)?;
        let den = substitute_rational(&self.den, &relevant)?;
        num.try_div(&den)
    }

    /// Evaluates with rational values for every symbol.
    pub fn evaluate(&self, values: &BTreeMap<Symbol, Rational>) -> Result<Rational, ExprError> {
        let unbound = |p: &Poly| {
            p.symbols()
                .into_iter()
                .find(|s| !values.contains_key(s))
                .map(|s| ExprError::Unbound(s.to_string()))
        };
        let n = self.num.evaluate(values).ok_or_else(|| unbound(&self.num).unwrap())?;
        let d = self.den.evaluate(values).ok_or_else(|| unbound(&self.den).unwrap())?;
        if d.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(n / d)
    }

    /// Replaces the bound symbols by rational values, keeping the rest symbolic.
    pub fn evaluate_partial(&self, values: &BTreeMap<Symbol, Rational>) -> Result<Expr, ExprError> {
        let bindings: BTreeMap<Symbol, Expr> = values
            .iter()
            .filter(|(s, _)| self.contains_symbol(s))
            .map(|(s, v)| (s.clone(), Expr::constant(v.clone())))
            .collect();
        self.substitute(&bindings)
    }

    /// Coefficients of `self` as a polynomial in `vars`.
    ///
    /// The returned map satisfies `self = sum(coeff * monomial)` and no
    /// coefficient mentions a symbol of `vars`.
    pub fn poly_coefficients(&self, vars: &BTreeSet<Symbol>) -> Result<BTreeMap<Monomial, Expr>, ExprError> {
        if self.den.symbols().iter().any(|s| vars.contains(s)) {
            return Err(ExprError::NotPolynomialIn(
                vars.iter().map(Symbol::to_string).collect::<Vec<_>>().join(", "),
            ));
        }
        let mut parts: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in self.num.terms() {
            let (inside, outside) = m.split(vars);
            parts.entry(inside).or_default().add_term(outside, c.clone());
        }
        parts
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(m, p)| Ok((m, Expr::from_parts(p, self.den.clone())?)))
            .collect()
    }

    /// Source-syntax rendering; `one_dim` selects the `x`/`u_xx` aliases.
    pub fn render(&self, one_dim: bool) -> String {
        if self.is_polynomial() {
            return self.num.render(one_dim);
        }
        let num = self.num.render(one_dim);
        let num = if self.num.len() > 1 { format!("({num})") } else { num };
        let den = self.den.render(one_dim);
        let single_factor = self.den.len() == 1
            && self
                .den
                .leading_term()
                .is_some_and(|(m, c)| c.is_one() && m.factors().len() == 1);
        let den = if single_factor { den } else { format!("({den})") };
        format!("{num}/{den}")
    }
}

fn substitute_rational(p: &Poly, bindings: &BTreeMap<&Symbol, &Expr>) -> Result<Expr, ExprError> {
    let mut acc = Expr::zero();
    for (m, c) in p.terms() {
        let mut term = Expr::constant(c.clone());
        let mut kept = Vec::new();
        for (s, k) in m.factors() {
            match bindings.get(s) {
                Some(v) => term = &term * &v.pow(*k as i32)?,
                None => kept.push((s.clone(), *k)),
            }
        }
        term = &term * &Expr::from_poly(Poly::term(Monomial::from_factors(kept), Rational::one()));
        acc = &acc + &term;
    }
    Ok(acc)
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::symbol(s)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::constant(c)
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if self.is_polynomial() && rhs.is_polynomial() {
            return Expr::from_poly(&self.num + &rhs.num);
        }
        if self.den == rhs.den {
            return Expr::from_parts(&self.num + &rhs.num, self.den.clone()).expect("nonzero denominator");
        }
        // Henrici: with g = gcd(b, d), only g can share factors with the new numerator.
        let g = self.den.gcd(&rhs.den);
        if g.is_one() {
            let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
            return Expr::from_coprime(num, &self.den * &rhs.den);
        }
        let b = exact(&self.den, &g);
        let d = exact(&rhs.den, &g);
        let num = &(&self.num * &d) + &(&rhs.num * &b);
        let h = num.gcd(&g);
        Expr::from_coprime(exact(&num, &h), &(&b * &d) * &exact(&g, &h))
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_polynomial() && rhs.is_polynomial() {
            return Expr::from_poly(&self.num * &rhs.num);
        }
        // Both operands are reduced, so only cross gcds can cancel.
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let num = &exact(&self.num, &g1) * &exact(&rhs.num, &g2);
        let den = &exact(&self.den, &g2) * &exact(&rhs.den, &g1);
        Expr::from_coprime(num, den)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

fn exact(p: &Poly, d: &Poly) -> Poly {
    if d.is_one() {
        return p.clone();
    }
    p.div_exact(d).expect("gcd divides")
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Expr {
            type Output = Expr;
            fn $f(self, rhs: Expr) -> Expr {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $f(self, rhs: &Expr) -> Expr {
                (&self).$f(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $f(self, rhs: Expr) -> Expr {
                self.$f(&rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::ops::AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        *self = &*self + rhs;
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}
