//! Sparse multivariate polynomials over the rationals.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`] under graded
//! lexicographic order, where the smallest [`Symbol`] is the most significant
//! variable. That order is a monomial order, so the leading term is simply the
//! last entry and exact division by the standard reduction loop terminates.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::symbol::Symbol;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// A power product of symbols; factors are sorted by symbol and have positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial {
    degree: u32,
    factors: Vec<(Symbol, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(s: Symbol) -> Self {
        Monomial::pow(s, 1)
    }

    pub fn pow(s: Symbol, k: u32) -> Self {
        if k == 0 {
            return Monomial::one();
        }
        Monomial {
            degree: k,
            factors: vec![(s, k)],
        }
    }

    /// Builds a monomial from arbitrary factors, merging repeats and dropping zero exponents.
    pub fn from_factors(factors: impl IntoIterator<Item = (Symbol, u32)>) -> Self {
        let mut map: BTreeMap<Symbol, u32> = BTreeMap::new();
        for (s, k) in factors {
            *map.entry(s).or_insert(0) += k;
        }
        let factors: Vec<_> = map.into_iter().filter(|(_, k)| *k > 0).collect();
        Monomial {
            degree: factors.iter().map(|(_, k)| k).sum(),
            factors,
        }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.factors
    }

    pub fn exponent(&self, s: &Symbol) -> u32 {
        match self.factors.binary_search_by(|(t, _)| t.cmp(s)) {
            Ok(i) => self.factors[i].1,
            Err(_) => 0,
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.factors.iter().map(|(s, _)| s)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, ka) = &self.factors[i];
            let (b, kb) = &other.factors[j];
            match a.cmp(b) {
                Ordering::Less => {
                    factors.push((a.clone(), *ka));
                    i += 1;
                }
                Ordering::Greater => {
                    factors.push((b.clone(), *kb));
                    j += 1;
                }
                Ordering::Equal => {
                    factors.push((a.clone(), ka + kb));
                    i += 1;
                    j += 1;
                }
            }
        }
        factors.extend_from_slice(&self.factors[i..]);
        factors.extend_from_slice(&other.factors[j..]);
        Monomial {
            degree: self.degree + other.degree,
            factors,
        }
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut factors = Vec::with_capacity(self.factors.len());
        let mut j = 0;
        for (s, k) in &self.factors {
            if j < other.factors.len() && other.factors[j].0 < *s {
                return None;
            }
            if j < other.factors.len() && other.factors[j].0 == *s {
                let kb = other.factors[j].1;
                j += 1;
                match k.cmp(&kb) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => factors.push((s.clone(), k - kb)),
                }
            } else {
                factors.push((s.clone(), *k));
            }
        }
        if j < other.factors.len() {
            return None;
        }
        Some(Monomial {
            degree: self.degree - other.degree,
            factors,
        })
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial::from_factors(
            self.factors
                .iter()
                .filter_map(|(s, k)| {
                    let kb = other.exponent(s);
                    (kb > 0).then(|| (s.clone(), (*k).min(kb)))
                })
                .collect::<Vec<_>>(),
        )
    }

    /// Splits into the part built from `vars` and the remainder.
    pub fn split(&self, vars: &BTreeSet<Symbol>) -> (Monomial, Monomial) {
        let (inside, outside): (Vec<_>, Vec<_>) = self.factors.iter().cloned().partition(|(s, _)| vars.contains(s));
        (Monomial::from_sorted(inside), Monomial::from_sorted(outside))
    }

    /// Removes `s` entirely, returning its exponent and the remaining monomial.
    pub fn take(&self, s: &Symbol) -> (u32, Monomial) {
        let k = self.exponent(s);
        if k == 0 {
            return (0, self.clone());
        }
        let rest: Vec<_> = self.factors.iter().filter(|(t, _)| t != s).cloned().collect();
        (k, Monomial::from_sorted(rest))
    }

    fn from_sorted(factors: Vec<(Symbol, u32)>) -> Monomial {
        Monomial {
            degree: factors.iter().map(|(_, k)| k).sum(),
            factors,
        }
    }

    /// Source-syntax rendering, e.g. `x^2*u_x`.
    pub fn render(&self, one_dim: bool) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        self.factors
            .iter()
            .map(|(s, k)| {
                if *k == 1 {
                    s.name(one_dim)
                } else {
                    format!("{}^{}", s.name(one_dim), k)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            let (mut i, mut j) = (0, 0);
            while i < self.factors.len() && j < other.factors.len() {
                let (a, ka) = &self.factors[i];
                let (b, kb) = &other.factors[j];
                match a.cmp(b) {
                    // `self` has a positive exponent at a more significant variable.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ka != kb {
                            return ka.cmp(kb);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
            (self.factors.len() - i).cmp(&(other.factors.len() - j))
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

/// A polynomial with rational coefficients; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn var(s: Symbol) -> Self {
        Poly::term(Monomial::var(s), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value of a constant polynomial (zero included).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.last_key_value()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms.keys().flat_map(|m| m.symbols().cloned()).collect()
    }

    pub fn contains_symbol(&self, s: &Symbol) -> bool {
        self.terms.keys().any(|m| m.exponent(s) > 0)
    }

    pub fn degree_in(&self, s: &Symbol) -> u32 {
        self.terms.keys().map(|m| m.exponent(s)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(t, a)| (t.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = &out * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        out
    }

    /// Formal partial derivative.
    pub fn diff(&self, s: &Symbol) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (k, rest) = m.take(s);
            if k == 0 {
                continue;
            }
            let m2 = rest.mul(&Monomial::pow(s.clone(), k - 1));
            out.add_term(m2, c * rat(i64::from(k)));
        }
        out
    }

    /// Scales so that the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading_term() {
            None => Poly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// View as a univariate polynomial in `s`: exponent -> coefficient.
    pub fn coefficients_in(&self, s: &Symbol) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (k, rest) = m.take(s);
            out.entry(k).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Simultaneous substitution of polynomials for symbols.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Poly>) -> Poly {
        let mut powers: BTreeMap<(Symbol, u32), Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut factor = Poly::one();
            for (s, k) in m.factors() {
                match bindings.get(s) {
                    Some(v) => {
                        let p = powers.entry((s.clone(), *k)).or_insert_with(|| v.pow(*k)).clone();
                        factor = &factor * &p;
                    }
                    None => kept.push((s.clone(), *k)),
                }
            }
            let kept = Monomial::from_sorted(kept);
            out += &factor.mul_monomial(&kept, c);
        }
        out
    }

    /// Evaluates with every symbol bound; returns `None` if a symbol is unbound.
    pub fn evaluate(&self, values: &BTreeMap<Symbol, Rational>) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (s, k) in m.factors() {
                let x = values.get(s)?;
                v *= num_traits::pow(x.clone(), *k as usize);
            }
            acc += v;
        }
        Some(acc)
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lm, lc) = d.leading_term()?;
        if d.len() == 1 {
            let inv = lc.recip();
            let mut out = Poly::zero();
            for (m, c) in &self.terms {
                out.terms.insert(m.div(lm)?, c * &inv);
            }
            return Some(out);
        }
        let inv = lc.recip();
        let mut q = Poly::zero();
        let mut r = self.clone();
        while let Some((rm, rc)) = r.leading_term() {
            let qm = rm.div(lm)?;
            let qc = rc * &inv;
            r -= &d.mul_monomial(&qm, &qc);
            q.add_term(qm, qc);
        }
        Some(q)
    }

    /// Greatest common divisor, normalized to be monic; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        gcd_rec(self, other).monic()
    }

    /// Source-syntax rendering, highest term first.
    pub fn render(&self, one_dim: bool) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if m.is_one() {
                s.push_str(&a.to_string());
            } else if a.is_one() {
                s.push_str(&m.render(one_dim));
            } else {
                s.push_str(&format!("{}*{}", a, m.render(one_dim)));
            }
        }
        s
    }
}

fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    // A monomial's divisors are monomials, so only exponents matter.
    if a.len() == 1 || b.len() == 1 {
        let mut g = a.terms.keys().next().unwrap().clone();
        for m in a.terms.keys().chain(b.terms.keys()) {
            g = g.gcd(m);
            if g.is_one() {
                break;
            }
        }
        return Poly::term(g, Rational::one());
    }
    let v = a
        .terms
        .keys()
        .chain(b.terms.keys())
        .flat_map(|m| m.symbols())
        .min()
        .cloned()
        .expect("non-constant polynomial has a symbol");
    match (a.contains_symbol(&v), b.contains_symbol(&v)) {
        (true, false) => gcd_rec(&content_in(a, &v), b),
        (false, true) => gcd_rec(a, &content_in(b, &v)),
        _ => {
            let ca = content_in(a, &v);
            let cb = content_in(b, &v);
            let pa = a.div_exact(&ca).expect("content divides");
            let pb = b.div_exact(&cb).expect("content divides");
            let c = gcd_rec(&ca, &cb);
            if images_coprime(&pa, &pb, &v) {
                return c;
            }
            // A gcd free of some shared variable is the gcd of the contents in it.
            let shared: Vec<Symbol> = pa
                .symbols()
                .intersection(&pb.symbols())
                .filter(|s| **s != v)
                .cloned()
                .collect();
            for w in shared {
                if images_coprime(&pa, &pb, &w) {
                    return &c * &gcd_rec(&content_in(&pa, &w), &content_in(&pb, &w));
                }
            }
            let (mut f, mut g) = if pa.degree_in(&v) >= pb.degree_in(&v) {
                (pa, pb)
            } else {
                (pb, pa)
            };
            loop {
                let r = pseudo_remainder(&f, &g, &v);
                if r.is_zero() {
                    break;
                }
                if r.degree_in(&v) == 0 {
                    g = Poly::one();
                    break;
                }
                f = g;
                g = primitive_part(&r, &v);
            }
            &c * &primitive_part(&g, &v)
        }
    }
}

/// Specializes every variable except `v` at small integers that keep both
/// leading coefficients nonzero. A gcd of positive degree in `v` survives such
/// a specialization, so coprime images prove the gcd is free of `v`.
fn images_coprime(a: &Poly, b: &Poly, v: &Symbol) -> bool {
    let others: BTreeSet<Symbol> = a.symbols().into_iter().chain(b.symbols()).filter(|s| s != v).collect();
    if others.is_empty() {
        return false;
    }
    let (da, db) = (a.degree_in(v), b.degree_in(v));
    let lca = a.coefficients_in(v).remove(&da).unwrap_or_default();
    let lcb = b.coefficients_in(v).remove(&db).unwrap_or_default();
    for attempt in 0..3i64 {
        let point: BTreeMap<Symbol, Rational> = others
            .iter()
            .enumerate()
            .map(|(k, s)| {
                (
                    s.clone(),
                    Rational::from_integer((3 + 7 * attempt + 2 * k as i64 * (attempt + 1)).into()),
                )
            })
            .collect();
        let nonzero = |p: &Poly| p.evaluate(&point).is_some_and(|x| !x.is_zero());
        if !nonzero(&lca) || !nonzero(&lcb) {
            continue;
        }
        let bindings: BTreeMap<Symbol, Poly> = point.into_iter().map(|(s, x)| (s, Poly::constant(x))).collect();
        return gcd_rec(&a.substitute(&bindings), &b.substitute(&bindings)).is_constant();
    }
    false
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `v`.
fn content_in(p: &Poly, v: &Symbol) -> Poly {
    let mut g = Poly::zero();
    for c in p.coefficients_in(v).into_values() {
        g = gcd_rec(&g, &c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g.monic()
}

fn primitive_part(p: &Poly, v: &Symbol) -> Poly {
    if p.is_constant() {
        return Poly::one();
    }
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides").monic()
}

fn pseudo_remainder(f: &Poly, g: &Poly, v: &Symbol) -> Poly {
    let dg = g.degree_in(v);
    let lcg = g.coefficients_in(v).remove(&dg).unwrap_or_default();
    let mut r = f.clone();
    while !r.is_zero() && r.degree_in(v) >= dg {
        let dr = r.degree_in(v);
        let lcr = r.coefficients_in(v).remove(&dr).unwrap_or_default();
        let shift = Poly::term(Monomial::pow(v.clone(), dr - dg), Rational::one());
        r = &(&r * &lcg) - &(&(&lcr * &shift) * g);
    }
    r
}

impl std::ops::AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl std::ops::SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= rhs.len() {
            (self.clone(), rhs)
        } else {
            (rhs.clone(), self)
        };
        big += small;
        big
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m.mul(m2), c * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}
